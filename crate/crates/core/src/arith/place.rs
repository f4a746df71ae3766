use std::fmt;

use super::ext::{is_irreducible, ExtElem, ExtField};
use super::field::PrimeField;
use super::poly::Poly;
use crate::error::{Error, Result};

/// A closed point of the projective line over F_p.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Place {
    Finite(Poly),
    Infinity(PrimeField),
}

impl Place {
    pub fn finite(poly: Poly) -> Result<Self> {
        if !poly.is_monic() || !is_irreducible(&poly) {
            return Err(Error::NotIrreducible(poly.to_string()));
        }
        Ok(Place::Finite(poly))
    }

    pub fn field(&self) -> PrimeField {
        match self {
            Place::Finite(poly) => poly.field(),
            Place::Infinity(k) => *k,
        }
    }

    pub fn degree(&self) -> usize {
        match self {
            Place::Finite(poly) => poly.degree().finite().unwrap_or(0) as usize,
            Place::Infinity(_) => 1,
        }
    }

    pub fn uniformizer(&self) -> Result<&Poly> {
        match self {
            Place::Finite(poly) => Ok(poly),
            Place::Infinity(_) => Err(Error::InfinitePlace),
        }
    }

    pub fn residue_field(&self) -> Result<ExtField> {
        ExtField::new(self.uniformizer()?.clone())
    }

    /// Image of `f` in the residue field F_p[t]/(pi).
    pub fn residue(&self, f: &Poly) -> Result<ExtElem> {
        Ok(self.residue_field()?.elem(f))
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Finite(poly) => write!(f, "({poly})"),
            Place::Infinity(_) => write!(f, "inf"),
        }
    }
}

/// Monic irreducible polynomials of degree `d` over F_p, lexicographic in
/// their coefficients read from the top down.
pub fn enumerate_monic_irreducibles(field: PrimeField, d: usize) -> Result<Vec<Poly>> {
    if d == 0 {
        return Err(Error::InvalidDegree(0));
    }
    let p = field.p() as usize;
    let total = p.checked_pow(d as u32).ok_or(Error::InvalidDegree(d as i64))?;
    let mut out = Vec::new();
    for idx in 0..total {
        // constant term is the least significant digit
        let mut coeffs = Vec::with_capacity(d + 1);
        let mut rest = idx;
        for _ in 0..d {
            coeffs.push((rest % p) as u32);
            rest /= p;
        }
        coeffs.push(1);
        let poly = Poly::from_coeffs(field, coeffs);
        if is_irreducible(&poly) {
            out.push(poly);
        }
    }
    Ok(out)
}

/// Number of monic irreducibles of degree d, by the necklace formula.
pub fn count_monic_irreducibles(p: u64, d: u64) -> u64 {
    let mut total: i128 = 0;
    for e in 1..=d {
        if d % e == 0 {
            total += mobius(d / e) as i128 * (p as i128).pow(e as u32);
        }
    }
    (total / d as i128) as u64
}

fn mobius(mut n: u64) -> i64 {
    let mut sign = 1;
    let mut k = 2;
    while k * k <= n {
        if n % k == 0 {
            n /= k;
            if n % k == 0 {
                return 0;
            }
            sign = -sign;
        }
        k += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn k(p: u32) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    #[test]
    fn small_irreducible_lists() {
        let two = enumerate_monic_irreducibles(k(2), 1).unwrap();
        assert_eq!(two.iter().map(|f| f.to_string()).collect::<Vec<_>>(), ["t", "t + 1"]);
        let quad = enumerate_monic_irreducibles(k(2), 2).unwrap();
        assert_eq!(quad.len(), 1);
        assert_eq!(quad[0].to_string(), "t^2 + t + 1");
        assert_eq!(enumerate_monic_irreducibles(k(3), 2).unwrap().len(), 3);
        assert!(enumerate_monic_irreducibles(k(3), 0).is_err());
    }

    /// Sieve: every monic product of two lower-degree monics is reducible.
    fn reducible_by_sieve(field: PrimeField, d: usize) -> BTreeSet<Poly> {
        let p = field.p() as usize;
        let monics = |deg: usize| -> Vec<Poly> {
            (0..p.pow(deg as u32))
                .map(|mut idx| {
                    let mut c = Vec::new();
                    for _ in 0..deg {
                        c.push((idx % p) as u32);
                        idx /= p;
                    }
                    c.push(1);
                    Poly::from_coeffs(field, c)
                })
                .collect()
        };
        let mut out = BTreeSet::new();
        for a in 1..d {
            for f in monics(a) {
                for g in monics(d - a) {
                    out.insert(f.mul(&g));
                }
            }
        }
        out
    }

    #[test]
    fn matches_exhaustive_factoring_and_necklace_count() {
        for (p, d) in [(2, 1), (2, 2), (2, 3), (2, 4), (2, 5), (3, 2), (3, 3), (5, 2)] {
            let field = k(p);
            let irr = enumerate_monic_irreducibles(field, d).unwrap();
            assert_eq!(irr.len() as u64, count_monic_irreducibles(p as u64, d as u64));
            let red = reducible_by_sieve(field, d);
            assert_eq!(irr.len() + red.len(), (p as usize).pow(d as u32));
            for f in &irr {
                assert!(!red.contains(f));
                if d >= 2 {
                    assert!((0..p).all(|x| f.eval(x) != 0), "{f} has a root");
                }
            }
        }
    }

    #[test]
    fn residue_examples() {
        let field = k(2);
        let place = Place::finite(Poly::from_coeffs(field, vec![1, 1, 1])).unwrap();
        let rf = place.residue_field().unwrap();
        let t2 = Poly::monomial(field, 1, 2);
        let t3 = Poly::monomial(field, 1, 3);
        assert_eq!(place.residue(&t2).unwrap(), rf.add(&rf.theta(), &rf.one()));
        assert_eq!(place.residue(&t3).unwrap(), rf.one());
        assert_eq!(place.residue(&Poly::one(field)).unwrap(), rf.one());
        assert_eq!(Place::Infinity(field).residue(&t2), Err(Error::InfinitePlace));
    }

    #[test]
    fn residue_is_bijective_below_degree() {
        for (p, d) in [(2, 3), (3, 2), (5, 2)] {
            let field = k(p);
            for pi in enumerate_monic_irreducibles(field, d).unwrap() {
                let place = Place::finite(pi).unwrap();
                let rf = place.residue_field().unwrap();
                let mut seen = BTreeSet::new();
                for idx in 0..(p as usize).pow(d as u32) {
                    // polynomials of degree < d, enumerated independently of the field
                    let mut c = Vec::new();
                    let mut r = idx;
                    for _ in 0..d {
                        c.push((r % p as usize) as u32);
                        r /= p as usize;
                    }
                    let f = Poly::from_coeffs(field, c);
                    seen.insert(rf.index_of(&place.residue(&f).unwrap()));
                }
                assert_eq!(seen.len(), (p as usize).pow(d as u32));
            }
        }
    }
}
