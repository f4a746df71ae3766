//! Quotient graphs of Bruhat-Tits trees at places of the rational function
//! field F_p(t), classifying split maximal orders of M_2(F_p(t)).
//!
//! The split order of class `i` is the endomorphism order of `O + O(i)`.
//! Its neighbors in the tree at a place `P` of degree `d` are computed
//! by lattice reduction ([`bundles`]), tallied into neighbor-count
//! matrices ([`nmatrix`]), grouped into stabilizer orbits ([`orbits`]) and
//! assembled into the quotient multigraph ([`graph`]).

pub mod arith;
pub mod bundles;
pub mod cli;
pub mod error;
pub mod fixtures;
pub mod graph;
pub mod nmatrix;
pub mod orbits;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Neighbor-count matrix with unbounded entries.
pub type NMatrix = nmatrix::NeighborMatrix<num_bigint::BigInt>;
/// Machine-word variant for small `p^d`.
pub type NMatrix64 = nmatrix::NeighborMatrix<i64>;
pub type NMatrix128 = nmatrix::NeighborMatrix<i128>;
/// Exact rationals used by the closed-form tables.
pub type Rational = num_rational::BigRational;
