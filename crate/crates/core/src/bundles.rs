//! Rank-2 vector bundles on P^1 as polynomial lattices with a twist at
//! infinity.
//!
//! A bundle is a free F_p[t]-module of rank 2, given by the columns of a
//! nonsingular generator matrix, together with an integer twist `i`. A
//! vector `(f, g)` has weight `max(deg f, deg g - i)`; the negated
//! successive minima of this weight are the splitting type `(a, b)` of the
//! bundle `O(a) + O(b)`. The standard bundle of twist `i` is `O + O(i)`,
//! whose endomorphism order is the split maximal order of class `i`.

use std::fmt;

use crate::arith::{Degree, ExtField, Place, Poly, PrimeField, ProjPoint};
use crate::error::{Error, Result};

/// 2x2 matrix over F_p[t], row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct PolyMatrix {
    pub entries: [[Poly; 2]; 2],
}

impl PolyMatrix {
    pub fn new(entries: [[Poly; 2]; 2]) -> Self {
        Self { entries }
    }

    pub fn identity(field: PrimeField) -> Self {
        let (o, z) = (Poly::one(field), Poly::zero(field));
        Self::new([[o.clone(), z.clone()], [z, o]])
    }

    pub fn from_columns(c0: (Poly, Poly), c1: (Poly, Poly)) -> Self {
        Self::new([[c0.0, c1.0], [c0.1, c1.1]])
    }

    pub fn column(&self, c: usize) -> (Poly, Poly) {
        (self.entries[0][c].clone(), self.entries[1][c].clone())
    }

    pub fn det(&self) -> Poly {
        let e = &self.entries;
        e[0][0].mul(&e[1][1]).sub(&e[0][1].mul(&e[1][0]))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = (&self.entries, &other.entries);
        let cell = |r: usize, c: usize| a[r][0].mul(&b[0][c]).add(&a[r][1].mul(&b[1][c]));
        Self::new([[cell(0, 0), cell(0, 1)], [cell(1, 0), cell(1, 1)]])
    }
}

impl fmt::Debug for PolyMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = &self.entries;
        write!(f, "[[{}, {}], [{}, {}]]", e[0][0], e[0][1], e[1][0], e[1][1])
    }
}

/// Weight of `(f, g)` under twist `i`: `max(deg f, deg g - i)`.
pub fn weight(f: &Poly, g: &Poly, twist: i64) -> Degree {
    f.degree().max(g.degree().shift(-twist))
}

/// A rank-2 lattice over F_p[t] with a twist at infinity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticePair {
    generators: PolyMatrix,
    twist: i64,
}

/// Splitting type `(a, b)`, `a <= b`, of `O(a) + O(b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SplittingType {
    pub a: i64,
    pub b: i64,
}

impl SplittingType {
    pub fn gap(&self) -> u64 {
        (self.b - self.a) as u64
    }
}

impl LatticePair {
    pub fn new(generators: PolyMatrix, twist: i64) -> Result<Self> {
        if generators.det().is_zero() {
            return Err(Error::ZeroDeterminant);
        }
        Ok(Self { generators, twist })
    }

    pub fn generators(&self) -> &PolyMatrix {
        &self.generators
    }

    pub fn twist(&self) -> i64 {
        self.twist
    }

    pub fn field(&self) -> PrimeField {
        self.generators.entries[0][0].field()
    }

    pub fn det_degree(&self) -> i64 {
        self.generators.det().degree().finite().expect("nonzero determinant")
    }

    pub fn is_standard(&self) -> bool {
        self.generators == PolyMatrix::identity(self.field())
    }

    /// Same lattice, generators multiplied on the right by `m`.
    pub fn transform(&self, m: &PolyMatrix) -> Result<Self> {
        Self::new(self.generators.mul(m), self.twist)
    }

    /// Whether `(f, g)` lies in the lattice: `adj(G) v = 0 mod det G`.
    pub fn contains(&self, f: &Poly, g: &Poly) -> bool {
        let e = &self.generators.entries;
        let det = self.generators.det();
        let x = e[1][1].mul(f).sub(&e[0][1].mul(g));
        let y = e[0][0].mul(g).sub(&e[1][0].mul(f));
        x.rem(&det).is_zero() && y.rem(&det).is_zero()
    }

    /// Column weights after reduction, ascending. These are the successive
    /// minima of the weight function on the lattice.
    pub fn successive_minima(&self) -> (i64, i64) {
        let reduced = self.reduced();
        let w = |c: usize| {
            let (f, g) = reduced.column(c);
            weight(&f, &g, self.twist).finite().expect("nonzero column")
        };
        let (w0, w1) = (w(0), w(1));
        (w0.min(w1), w0.max(w1))
    }

    /// Shifted column reduction. Subtracts monomial multiples of one column
    /// from the other until the leading positions differ; the result has
    /// the predictable-degree property, so its column weights are minimal.
    pub fn reduced(&self) -> PolyMatrix {
        let twist = self.twist;
        let mut cols = [self.generators.column(0), self.generators.column(1)];
        // pivot: component of maximal shifted degree, ties go to the second
        let pivot = |v: &(Poly, Poly)| -> (Degree, usize) {
            let d0 = v.0.degree();
            let d1 = v.1.degree().shift(-twist);
            if d1 >= d0 {
                (d1, 1)
            } else {
                (d0, 0)
            }
        };
        let component = |v: &(Poly, Poly), k: usize| -> Poly {
            if k == 0 {
                v.0.clone()
            } else {
                v.1.clone()
            }
        };
        let start: i64 = cols
            .iter()
            .map(|c| pivot(c).0.finite().expect("nonzero column"))
            .sum();
        let floor = -(twist.abs() + self.det_degree());
        let ceiling = (2 * (start - 2 * floor) + 8).max(8) as usize;
        let mut steps = 0usize;
        loop {
            let (w0, k0) = pivot(&cols[0]);
            let (w1, k1) = pivot(&cols[1]);
            if k0 != k1 {
                break;
            }
            let (hi, lo) = if w0 >= w1 { (0, 1) } else { (1, 0) };
            let shift = (pivot(&cols[hi]).0.finite().unwrap() - pivot(&cols[lo]).0.finite().unwrap()) as usize;
            let field = cols[0].0.field();
            let c = field.mul(
                component(&cols[hi], k0).leading_coeff(),
                field.inv(component(&cols[lo], k0).leading_coeff()),
            );
            let (lf, lg) = cols[lo].clone();
            let (hf, hg) = &cols[hi];
            cols[hi] = (hf.sub_scaled_shift(c, shift, &lf), hg.sub_scaled_shift(c, shift, &lg));
            steps += 1;
            assert!(steps <= ceiling, "lattice reduction exceeded {ceiling} steps");
        }
        PolyMatrix::from_columns(cols[0].clone(), cols[1].clone())
    }

    pub fn splitting_type(&self) -> SplittingType {
        let (m1, m2) = self.successive_minima();
        let st = SplittingType { a: -m2, b: -m1 };
        assert_eq!(
            st.a + st.b,
            self.twist - self.det_degree(),
            "degree bookkeeping failed for {:?}",
            self.generators
        );
        st
    }
}

/// `O + O(i)`: identity generators with twist `i`.
pub fn standard_bundle(field: PrimeField, i: u64) -> LatticePair {
    LatticePair { generators: PolyMatrix::identity(field), twist: i as i64 }
}

/// Sublattice of index p^d whose residue at `place`, in the coordinates of
/// the current basis, lies on `line`.
pub fn neighbor_lattice(lattice: &LatticePair, place: &Place, line: &ProjPoint) -> Result<LatticePair> {
    let pi = place.uniformizer()?.clone();
    let field = lattice.field();
    let (one, zero) = (Poly::one(field), Poly::zero(field));
    let step = match line {
        ProjPoint::Affine(alpha) => PolyMatrix::from_columns((alpha.as_poly().clone(), one), (pi, zero)),
        ProjPoint::Infinity => PolyMatrix::from_columns((one, zero.clone()), (zero, pi)),
    };
    lattice.transform(&step)
}

/// Class index |b - a| of the neighbor of the standard bundle of twist `i`
/// along `line` at `place`.
pub fn neighbor_gap(field: PrimeField, i: u64, place: &Place, line: &ProjPoint) -> Result<u64> {
    Ok(neighbor_lattice(&standard_bundle(field, i), place, line)?.splitting_type().gap())
}

/// Gaps of all p^d + 1 neighbors of class `i`, in projective-line order.
pub fn neighbor_gaps(i: u64, place: &Place, residue: &ExtField) -> Result<Vec<u64>> {
    let field = place.field();
    crate::arith::enumerate_proj_line(residue)
        .iter()
        .map(|line| neighbor_gap(field, i, place, line))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::enumerate_monic_irreducibles;

    fn k(p: u32) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    fn place_t(field: PrimeField) -> Place {
        Place::finite(Poly::t(field)).unwrap()
    }

    #[test]
    fn standard_splitting() {
        let f = k(2);
        for i in [0, 1, 3, 5] {
            let st = standard_bundle(f, i).splitting_type();
            assert_eq!((st.a, st.b), (0, i as i64));
        }
    }

    #[test]
    fn neighbor_construction_examples() {
        let f = k(2);
        let place = place_t(f);
        let rf = place.residue_field().unwrap();
        let e = neighbor_lattice(&standard_bundle(f, 1), &place, &ProjPoint::Affine(rf.zero())).unwrap();
        assert_eq!(e.generators().column(0), (Poly::zero(f), Poly::one(f)));
        assert_eq!(e.generators().column(1), (Poly::t(f), Poly::zero(f)));
        assert_eq!(e.splitting_type(), SplittingType { a: -1, b: 1 });

        let e = neighbor_lattice(&standard_bundle(f, 1), &place, &ProjPoint::Affine(rf.one())).unwrap();
        assert_eq!(e.splitting_type().gap(), 0);

        let e = neighbor_lattice(&standard_bundle(f, 0), &place, &ProjPoint::Infinity).unwrap();
        assert_eq!(e.generators().column(0), (Poly::one(f), Poly::zero(f)));
        assert_eq!(e.generators().column(1), (Poly::zero(f), Poly::t(f)));
        assert_eq!(e.det_degree(), 1);
    }

    #[test]
    fn degree_one_neighbors_of_class_one() {
        let f = k(2);
        let place = place_t(f);
        let rf = place.residue_field().unwrap();
        let gaps = neighbor_gaps(1, &place, &rf).unwrap();
        let mut sorted = gaps.clone();
        sorted.sort();
        assert_eq!(sorted, vec![0, 0, 2]);
    }

    #[test]
    fn generic_line_at_degree_four() {
        let f = k(2);
        let pi = enumerate_monic_irreducibles(f, 4).unwrap().remove(0);
        let place = Place::finite(pi).unwrap();
        let rf = place.residue_field().unwrap();
        let alpha = rf.theta();
        assert_eq!(neighbor_gap(f, 7, &place, &ProjPoint::Affine(alpha)).unwrap(), 3);
    }

    #[test]
    fn trivial_bundle_degree_two() {
        for p in [2, 3] {
            let f = k(p);
            let pi = enumerate_monic_irreducibles(f, 2).unwrap().remove(0);
            let place = Place::finite(pi).unwrap();
            let rf = place.residue_field().unwrap();
            for a in rf.elements() {
                let rational = rf.is_in_prime_field(&a);
                let gap = neighbor_gap(f, 0, &place, &ProjPoint::Affine(a)).unwrap();
                assert_eq!(gap == 0, !rational);
            }
        }
    }

    #[test]
    fn rejects_singular_and_infinite() {
        let f = k(3);
        let z = Poly::zero(f);
        let m = PolyMatrix::from_columns((Poly::one(f), z.clone()), (Poly::t(f), z));
        assert_eq!(LatticePair::new(m, 0), Err(Error::ZeroDeterminant));
        let res = neighbor_lattice(&standard_bundle(f, 1), &Place::Infinity(f), &ProjPoint::Infinity);
        assert_eq!(res, Err(Error::InfinitePlace));
    }

    #[test]
    fn parity_and_band() {
        for p in [2u32, 3] {
            let f = k(p);
            for d in 1..=4usize {
                let pi = enumerate_monic_irreducibles(f, d).unwrap().remove(0);
                let place = Place::finite(pi).unwrap();
                let rf = place.residue_field().unwrap();
                for i in 0..=12u64 {
                    for gap in neighbor_gaps(i, &place, &rf).unwrap() {
                        assert_eq!((gap + i + d as u64) % 2, 0);
                        assert!((gap as i64 - i as i64).unsigned_abs() <= d as u64);
                    }
                }
            }
        }
    }
}
