//! Exact arithmetic over F_p, F_{p^d} and F_p[t], plus the closed points
//! of the projective line and their residue fields.

mod ext;
mod field;
mod place;
mod poly;
mod proj;

pub use ext::{is_irreducible, ExtElem, ExtField};
pub use field::{is_prime, PrimeField};
pub use place::{count_monic_irreducibles, enumerate_monic_irreducibles, Place};
pub use poly::{Degree, Poly};
pub use proj::{enumerate_proj_line, ProjPoint};
