//! Scalar abstraction for exact matrix entries.

use std::fmt::{Debug, Display};
use std::ops::{Add, Mul, Sub};

use num_bigint::BigInt;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

/// An exact signed integer type usable as a matrix entry. Implemented for
/// the machine integers and for `BigInt`; the fixed-width types overflow
/// (and panic in debug builds) once p^d-scale products leave their range.
pub trait Scalar:
    Clone
    + Debug
    + Display
    + Ord
    + Send
    + Sync
    + Zero
    + One
    + Signed
    + FromPrimitive
    + ToPrimitive
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
{
    fn from_u128(v: u128) -> Self {
        <Self as FromPrimitive>::from_u128(v).expect("value fits the scalar type")
    }

    fn to_bigint(&self) -> BigInt {
        BigInt::from_i128(self.to_i128().unwrap_or_else(|| panic!("{self} outside i128")))
            .expect("i128 fits BigInt")
    }
}

impl Scalar for i64 {}
impl Scalar for i128 {}

impl Scalar for BigInt {
    fn to_bigint(&self) -> BigInt {
        self.clone()
    }
}

/// `base^exp` in the scalar type.
pub fn pow<T: Scalar>(base: u64, exp: u32) -> T {
    let b = <T as FromPrimitive>::from_u64(base).expect("base fits");
    num_traits::pow(b, exp as usize)
}
