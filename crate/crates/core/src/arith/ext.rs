use std::fmt;

use super::field::PrimeField;
use super::poly::{Degree, Poly};
use crate::error::{Error, Result};

/// An element of F_{p^d}, held as its residue polynomial of degree `< d`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExtElem(Poly);

impl ExtElem {
    pub fn as_poly(&self) -> &Poly {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl fmt::Debug for ExtElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.0)
    }
}

/// F_p[t]/(modulus) for a monic irreducible modulus of degree d.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExtField {
    base: PrimeField,
    modulus: Poly,
    degree: usize,
}

/// Rabin-style test: no common factor with t^{p^k} - t for k < d, and
/// the modulus divides t^{p^d} - t.
pub fn is_irreducible(f: &Poly) -> bool {
    let d = match f.degree() {
        Degree::Finite(d) if d >= 1 => d as u32,
        _ => return false,
    };
    let field = f.field();
    let p = field.p() as u128;
    let t = Poly::t(field);
    let mut x = t.rem(f);
    for k in 1..=d {
        x = x.pow_mod(p, f);
        let diff = x.sub(&t).rem(f);
        if k < d {
            if !diff.gcd(f).degree().eq(&Degree::Finite(0)) {
                return false;
            }
        } else if !diff.is_zero() {
            return false;
        }
    }
    true
}

impl ExtField {
    pub fn new(modulus: Poly) -> Result<Self> {
        if !modulus.is_monic() || !is_irreducible(&modulus) {
            return Err(Error::NotIrreducible(modulus.to_string()));
        }
        let degree = modulus.degree().finite().unwrap_or(0) as usize;
        Ok(Self { base: modulus.field(), modulus, degree })
    }

    /// F_p viewed as the degree-1 extension F_p[t]/(t).
    pub fn prime(base: PrimeField) -> Self {
        Self { base, modulus: Poly::t(base), degree: 1 }
    }

    pub fn base(&self) -> PrimeField {
        self.base
    }

    pub fn modulus(&self) -> &Poly {
        &self.modulus
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// p^d.
    pub fn order(&self) -> u128 {
        (self.base.p() as u128).pow(self.degree as u32)
    }

    pub fn elem(&self, f: &Poly) -> ExtElem {
        ExtElem(f.rem(&self.modulus))
    }

    pub fn from_base(&self, c: u32) -> ExtElem {
        self.elem(&Poly::constant(self.base, c))
    }

    pub fn zero(&self) -> ExtElem {
        ExtElem(Poly::zero(self.base))
    }

    pub fn one(&self) -> ExtElem {
        self.from_base(1)
    }

    /// Class of t.
    pub fn theta(&self) -> ExtElem {
        self.elem(&Poly::t(self.base))
    }

    pub fn add(&self, a: &ExtElem, b: &ExtElem) -> ExtElem {
        ExtElem(a.0.add(&b.0))
    }

    pub fn sub(&self, a: &ExtElem, b: &ExtElem) -> ExtElem {
        ExtElem(a.0.sub(&b.0))
    }

    pub fn neg(&self, a: &ExtElem) -> ExtElem {
        ExtElem(a.0.neg())
    }

    pub fn mul(&self, a: &ExtElem, b: &ExtElem) -> ExtElem {
        ExtElem(a.0.mul_mod(&b.0, &self.modulus))
    }

    pub fn pow(&self, a: &ExtElem, e: u128) -> ExtElem {
        ExtElem(a.0.pow_mod(e, &self.modulus))
    }

    /// Panics on zero.
    pub fn inv(&self, a: &ExtElem) -> ExtElem {
        assert!(!a.is_zero(), "inverse of zero in extension field");
        self.pow(a, self.order() - 2)
    }

    pub fn frobenius(&self, a: &ExtElem) -> ExtElem {
        self.pow(a, self.base.p() as u128)
    }

    /// Base-p digits of the residue coefficients, constant term least significant.
    pub fn index_of(&self, a: &ExtElem) -> usize {
        let p = self.base.p() as usize;
        a.0.coeffs().iter().rev().fold(0, |acc, &c| acc * p + c as usize)
    }

    pub fn from_index(&self, mut idx: usize) -> ExtElem {
        let p = self.base.p() as usize;
        let mut coeffs = Vec::with_capacity(self.degree);
        for _ in 0..self.degree {
            coeffs.push((idx % p) as u32);
            idx /= p;
        }
        ExtElem(Poly::from_coeffs(self.base, coeffs))
    }

    /// All p^d elements in index order.
    pub fn elements(&self) -> impl Iterator<Item = ExtElem> + '_ {
        (0..self.order() as usize).map(move |i| self.from_index(i))
    }

    pub fn is_in_prime_field(&self, a: &ExtElem) -> bool {
        a.0.degree() <= Degree::Finite(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gf(p: u32, coeffs: Vec<u32>) -> ExtField {
        let k = PrimeField::new(p).unwrap();
        ExtField::new(Poly::from_coeffs(k, coeffs)).unwrap()
    }

    #[test]
    fn rejects_reducible_modulus() {
        let k = PrimeField::new(2).unwrap();
        // t^2 + 1 = (t + 1)^2 over F_2
        assert!(ExtField::new(Poly::from_coeffs(k, vec![1, 0, 1])).is_err());
        // not monic
        let k3 = PrimeField::new(3).unwrap();
        assert!(ExtField::new(Poly::from_coeffs(k3, vec![1, 0, 2])).is_err());
    }

    #[test]
    fn multiplicative_group_order() {
        let f = gf(2, vec![1, 1, 0, 1]); // F_8
        let q = f.order();
        for a in f.elements().filter(|a| !a.is_zero()) {
            assert_eq!(f.pow(&a, q - 1), f.one());
            assert_eq!(f.mul(&a, &f.inv(&a)), f.one());
        }
    }

    #[test]
    fn index_round_trip() {
        let f = gf(3, vec![2, 2, 1]);
        for i in 0..9 {
            assert_eq!(f.index_of(&f.from_index(i)), i);
        }
    }

    proptest! {
        #[test]
        fn frobenius_is_additive(a in 0usize..9, b in 0usize..9) {
            let f = gf(3, vec![1, 0, 1]);
            let (x, y) = (f.from_index(a), f.from_index(b));
            prop_assert_eq!(f.frobenius(&f.add(&x, &y)), f.add(&f.frobenius(&x), &f.frobenius(&y)));
        }

        #[test]
        fn multiplication_associates(a in 0usize..32, b in 0usize..32, c in 0usize..32) {
            let f = gf(2, vec![1, 0, 1, 0, 0, 1]);
            let (x, y, z) = (f.from_index(a), f.from_index(b), f.from_index(c));
            prop_assert_eq!(f.mul(&f.mul(&x, &y), &z), f.mul(&x, &f.mul(&y, &z)));
        }
    }
}
