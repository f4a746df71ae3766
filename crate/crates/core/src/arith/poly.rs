use std::cmp::Ordering;
use std::fmt;

use super::field::PrimeField;

/// Degree of a polynomial. The zero polynomial has degree `NegInf`, which
/// sorts below every finite degree and is absorbed by shifts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Degree {
    NegInf,
    Finite(i64),
}

impl Degree {
    pub fn shift(self, by: i64) -> Degree {
        match self {
            Degree::NegInf => Degree::NegInf,
            Degree::Finite(d) => Degree::Finite(d + by),
        }
    }

    pub fn finite(self) -> Option<i64> {
        match self {
            Degree::NegInf => None,
            Degree::Finite(d) => Some(d),
        }
    }

    pub fn is_neg_inf(self) -> bool {
        self == Degree::NegInf
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degree::NegInf => write!(f, "-inf"),
            Degree::Finite(d) => write!(f, "{d}"),
        }
    }
}

/// Polynomial over F_p. Coefficients are stored lowest degree first with
/// no trailing zeros, so the leading coefficient is nonzero unless the
/// polynomial is zero (empty vector).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    field: PrimeField,
    coeffs: Vec<u32>,
}

impl Poly {
    pub fn zero(field: PrimeField) -> Self {
        Self { field, coeffs: Vec::new() }
    }

    pub fn one(field: PrimeField) -> Self {
        Self::constant(field, 1)
    }

    pub fn constant(field: PrimeField, c: u32) -> Self {
        Self::from_coeffs(field, vec![c])
    }

    /// The indeterminate `t`.
    pub fn t(field: PrimeField) -> Self {
        Self::monomial(field, 1, 1)
    }

    pub fn monomial(field: PrimeField, c: u32, k: usize) -> Self {
        let mut coeffs = vec![0; k + 1];
        coeffs[k] = c;
        Self::from_coeffs(field, coeffs)
    }

    /// Coefficients lowest degree first; reduced mod p and trimmed.
    pub fn from_coeffs(field: PrimeField, coeffs: Vec<u32>) -> Self {
        let mut coeffs: Vec<u32> = coeffs.into_iter().map(|c| field.reduce(c as u64)).collect();
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Self { field, coeffs }
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> u32 {
        self.coeffs.get(k).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Degree {
        if self.coeffs.is_empty() {
            Degree::NegInf
        } else {
            Degree::Finite(self.coeffs.len() as i64 - 1)
        }
    }

    pub fn leading_coeff(&self) -> u32 {
        self.coeffs.last().copied().unwrap_or(0)
    }

    pub fn is_monic(&self) -> bool {
        self.leading_coeff() == 1
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(self.field.inv(self.leading_coeff()))
    }

    pub fn add(&self, other: &Self) -> Self {
        let f = self.field;
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|k| f.add(self.coeff(k), other.coeff(k))).collect();
        Self::from_coeffs(f, coeffs)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let f = self.field;
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|k| f.sub(self.coeff(k), other.coeff(k))).collect();
        Self::from_coeffs(f, coeffs)
    }

    pub fn neg(&self) -> Self {
        let f = self.field;
        Self { field: f, coeffs: self.coeffs.iter().map(|&c| f.neg(c)).collect() }
    }

    pub fn scale(&self, c: u32) -> Self {
        let f = self.field;
        Self::from_coeffs(f, self.coeffs.iter().map(|&a| f.mul(a, c)).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.field);
        }
        let f = self.field;
        let p = f.p() as u64;
        let mut acc = vec![0u64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                acc[i + j] = (acc[i + j] + a as u64 * b as u64) % p;
            }
        }
        Self::from_coeffs(f, acc.into_iter().map(|c| c as u32).collect())
    }

    /// `self - c * t^k * other`, the elementary step of lattice reduction.
    pub fn sub_scaled_shift(&self, c: u32, k: usize, other: &Self) -> Self {
        let f = self.field;
        let n = self.coeffs.len().max(other.coeffs.len() + k);
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(n, 0);
        for (j, &b) in other.coeffs.iter().enumerate() {
            coeffs[j + k] = f.sub(coeffs[j + k], f.mul(c, b));
        }
        Self::from_coeffs(f, coeffs)
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        assert!(!divisor.is_zero(), "polynomial division by zero");
        let f = self.field;
        let dl = divisor.coeffs.len();
        if self.coeffs.len() < dl {
            return (Self::zero(f), self.clone());
        }
        let inv_lc = f.inv(divisor.leading_coeff());
        let mut rem = self.coeffs.clone();
        let mut quot = vec![0u32; rem.len() - dl + 1];
        for k in (0..quot.len()).rev() {
            let c = f.mul(rem[k + dl - 1], inv_lc);
            quot[k] = c;
            if c != 0 {
                for (j, &b) in divisor.coeffs.iter().enumerate() {
                    rem[k + j] = f.sub(rem[k + j], f.mul(c, b));
                }
            }
        }
        rem.truncate(dl - 1);
        (Self::from_coeffs(f, quot), Self::from_coeffs(f, rem))
    }

    pub fn rem(&self, divisor: &Self) -> Self {
        self.div_rem(divisor).1
    }

    /// Monic gcd (zero if both are zero).
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn mul_mod(&self, other: &Self, modulus: &Self) -> Self {
        self.mul(other).rem(modulus)
    }

    pub fn pow_mod(&self, mut e: u128, modulus: &Self) -> Self {
        let mut base = self.rem(modulus);
        let mut acc = Self::one(self.field).rem(modulus);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_mod(&base, modulus);
            }
            base = base.mul_mod(&base, modulus);
            e >>= 1;
        }
        acc
    }

    pub fn eval(&self, x: u32) -> u32 {
        let f = self.field;
        self.coeffs.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, x), c))
    }
}

impl PartialOrd for Poly {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Degree first, then coefficients from the top down.
impl Ord for Poly {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.coeffs.iter().rev().cmp(other.coeffs.iter().rev()))
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match (k, c) {
                (0, c) => write!(f, "{c}")?,
                (1, 1) => write!(f, "t")?,
                (1, c) => write!(f, "{c}t")?,
                (k, 1) => write!(f, "t^{k}")?,
                (k, c) => write!(f, "{c}t^{k}")?,
            }
        }
        Ok(())
    }
}
