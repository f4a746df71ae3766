//! Neighbor-count matrices N_d.
//!
//! Entry `(i, j)` of `N_d` counts the neighbors of the class-`i` split
//! order, in the tree at a place of degree `d`, that are isomorphic to the
//! class-`j` order. Rows index the source vertex, so every complete row
//! sums to `p^d + 1`.
//!
//! Three constructions are provided: the explicit `N_1`, the recurrence
//! `N_d = N_1^d - sum_{k=1}^{d/2} C(d,k) p^k N_{d-2k}`, and the brute-force
//! oracle that reduces every neighbor lattice.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{enumerate_monic_irreducibles, enumerate_proj_line, Place, PrimeField};
use crate::bundles::neighbor_gap;
use crate::error::{Error, Result};
use crate::scalar::{pow, Scalar};

pub const DEFAULT_BUDGET: u128 = 4096;

/// Window-truncated square matrix over an exact scalar type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborMatrix<T> {
    p: u32,
    d: u32,
    window: usize,
    entries: Vec<T>,
}

impl<T: Scalar> NeighborMatrix<T> {
    pub fn zeros(p: u32, d: u32, window: usize) -> Self {
        Self { p, d, window, entries: vec![T::zero(); window * window] }
    }

    pub fn identity(p: u32, window: usize) -> Self {
        let mut m = Self::zeros(p, 0, window);
        for i in 0..window {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn from_rows(p: u32, d: u32, rows: Vec<Vec<T>>) -> Result<Self> {
        let window = rows.len();
        if rows.iter().any(|r| r.len() != window) {
            return Err(Error::Parse("matrix rows must be square".into()));
        }
        Ok(Self { p, d, window, entries: rows.into_iter().flatten().collect() })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.d
    }

    pub fn window(&self) -> usize {
        self.window
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.entries[i * self.window + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.entries[i * self.window + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.entries[i * self.window..(i + 1) * self.window]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.entries.chunks(self.window.max(1)).take(self.window)
    }

    /// Rows whose neighbors all fall inside the window.
    pub fn is_interior_row(&self, i: usize) -> bool {
        i + (self.d as usize) < self.window
    }

    pub fn row_sum(&self, i: usize) -> T {
        self.row(i).iter().fold(T::zero(), |acc, x| acc + x)
    }

    /// Truncated product; entries are exact wherever the support of the
    /// left row stays inside the window.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.window, other.window);
        let w = self.window;
        let mut out = Self::zeros(self.p, self.d + other.d, w);
        for i in 0..w {
            for k in 0..w {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..w {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let v = out.get(i, j).clone() + a.clone() * b;
                        out.set(i, j, v);
                    }
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a.clone() - b.clone()).collect();
        Self { p: self.p, d: self.d, window: self.window, entries }
    }

    pub fn scaled(&self, c: &T) -> Self {
        let entries = self.entries.iter().map(|a| a.clone() * c).collect();
        Self { p: self.p, d: self.d, window: self.window, entries }
    }

    /// Leading `window x window` block.
    pub fn crop(&self, window: usize) -> Self {
        let window = window.min(self.window);
        let mut out = Self::zeros(self.p, self.d, window);
        for i in 0..window {
            for j in 0..window {
                out.set(i, j, self.get(i, j).clone());
            }
        }
        out
    }

    fn with_degree(mut self, d: u32) -> Self {
        self.d = d;
        self
    }

    /// Nonzero entries violating `|i-j| <= d` or `i+j+d` even.
    pub fn structural_violations(&self) -> Vec<(usize, usize)> {
        let d = self.d as usize;
        let mut out = Vec::new();
        for i in 0..self.window {
            for j in 0..self.window {
                let banded = i.abs_diff(j) <= d && (i + j + d) % 2 == 0;
                if !banded && !self.get(i, j).is_zero() {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Interior rows whose sum is not `p^d + 1`.
    pub fn row_sum_violations(&self) -> Vec<usize> {
        let expected: T = pow::<T>(self.p as u64, self.d) + T::one();
        (0..self.window)
            .filter(|&i| self.is_interior_row(i) && self.row_sum(i) != expected)
            .collect()
    }

    /// First entry at which two matrices differ.
    pub fn first_difference(&self, other: &Self) -> Option<(usize, usize)> {
        let w = self.window.min(other.window);
        (0..w)
            .flat_map(|i| (0..w).map(move |j| (i, j)))
            .find(|&(i, j)| self.get(i, j) != other.get(i, j))
    }

    pub fn to_json(&self) -> MatrixJson {
        MatrixJson {
            p: self.p,
            d: self.d,
            window: self.window,
            convention: ROW_SOURCE.to_string(),
            entries: self.rows().map(|r| r.iter().map(|x| x.to_string()).collect()).collect(),
        }
    }

    pub fn into_bigint(&self) -> NeighborMatrix<BigInt> {
        NeighborMatrix {
            p: self.p,
            d: self.d,
            window: self.window,
            entries: self.entries.iter().map(|x| x.to_bigint()).collect(),
        }
    }
}

pub const ROW_SOURCE: &str = "row-source";

/// Export format; entries are decimal strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub p: u32,
    pub d: u32,
    pub window: usize,
    pub convention: String,
    pub entries: Vec<Vec<String>>,
}

impl MatrixJson {
    pub fn to_matrix(&self) -> Result<NeighborMatrix<BigInt>> {
        if self.convention != ROW_SOURCE {
            return Err(Error::Parse(format!("unsupported convention {}", self.convention)));
        }
        let rows = self
            .entries
            .iter()
            .map(|r| {
                r.iter()
                    .map(|s| s.parse::<BigInt>().map_err(|e| Error::Parse(format!("{s}: {e}"))))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let m = NeighborMatrix::from_rows(self.p, self.d, rows)?;
        if m.window != self.window {
            return Err(Error::Parse("window does not match entries".into()));
        }
        Ok(m)
    }
}

/// The explicit degree-1 matrix, rows as source: `(0,1) = p+1`, and for
/// `i >= 1`, `(i,i-1) = p`, `(i,i+1) = 1`.
pub fn n1<T: Scalar>(p: u32, window: usize) -> Result<NeighborMatrix<T>> {
    if window < 2 {
        return Err(Error::WindowTooSmall { window, needed: 2 });
    }
    PrimeField::new(p)?;
    let mut m = NeighborMatrix::zeros(p, 1, window);
    let pp = pow::<T>(p as u64, 1);
    m.set(0, 1, pp.clone() + T::one());
    for i in 1..window {
        m.set(i, i - 1, pp.clone());
        if i + 1 < window {
            m.set(i, i + 1, T::one());
        }
    }
    Ok(m)
}

fn binomial(n: u32, k: u32) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// `N_0 .. N_d` at the given (already guarded) window.
fn recurrence_family<T: Scalar>(p: u32, d: u32, window: usize) -> Result<Vec<NeighborMatrix<T>>> {
    let base = n1::<T>(p, window)?;
    let mut powers = vec![NeighborMatrix::identity(p, window)];
    for k in 1..=d {
        let next = powers[k as usize - 1].mul(&base);
        powers.push(next);
    }
    let mut family: Vec<NeighborMatrix<T>> = Vec::with_capacity(d as usize + 1);
    for k in 0..=d {
        let mut m = powers[k as usize].clone();
        for j in 1..=k / 2 {
            let coeff = <T as Scalar>::from_u128(binomial(k, j)) * pow::<T>(p as u64, j);
            m = m.sub(&family[(k - 2 * j) as usize].scaled(&coeff));
        }
        family.push(m.with_degree(k));
    }
    Ok(family)
}

/// `N_d` by the recurrence, computed with a guard band of `d` and cropped.
pub fn nd_recurrence<T: Scalar>(p: u32, d: u32, window: usize) -> Result<NeighborMatrix<T>> {
    if d == 0 {
        return Err(Error::InvalidDegree(0));
    }
    let guarded = window + d as usize + 1;
    let family = recurrence_family::<T>(p, d, guarded)?;
    Ok(family[d as usize].crop(window))
}

/// Brute force at a specific place: for each class `i`, reduce all p^d + 1
/// neighbor lattices and tally their gaps.
pub fn nd_oracle_at<T: Scalar>(place: &Place, window: usize, budget: u128) -> Result<NeighborMatrix<T>> {
    let field = place.field();
    let residue = place.residue_field()?;
    let needed = residue.order();
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let lines = enumerate_proj_line(&residue);
    let d = place.degree() as u32;
    let rows: Vec<Vec<u64>> = (0..window)
        .into_par_iter()
        .map(|i| {
            let mut counts = vec![0u64; window];
            for line in &lines {
                let gap = neighbor_gap(field, i as u64, place, line)? as usize;
                if gap < window {
                    counts[gap] += 1;
                }
            }
            Ok(counts)
        })
        .collect::<Result<_>>()?;
    let rows = rows
        .into_iter()
        .map(|r| r.into_iter().map(|c| <T as Scalar>::from_u128(c as u128)).collect())
        .collect();
    NeighborMatrix::from_rows(field.p(), d, rows)
}

/// Brute-force `N_d` at the first monic irreducible of degree `d`; when a
/// second place exists the last one is computed too and must agree.
pub fn nd_oracle<T: Scalar>(p: u32, d: u32, window: usize, budget: u128) -> Result<NeighborMatrix<T>> {
    if d == 0 {
        return Err(Error::InvalidDegree(0));
    }
    let field = PrimeField::new(p)?;
    let needed = (p as u128).pow(d);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let places = enumerate_monic_irreducibles(field, d as usize)?;
    let first = Place::finite(places[0].clone())?;
    let m = nd_oracle_at::<T>(&first, window, budget)?;
    if places.len() > 1 {
        let last = Place::finite(places[places.len() - 1].clone())?;
        let other = nd_oracle_at::<T>(&last, window, budget)?;
        if let Some((i, j)) = m.first_difference(&other) {
            return Err(Error::InvariantViolation(format!(
                "neighbor counts depend on the place: {first} and {last} differ at ({i},{j})"
            )));
        }
    }
    Ok(m)
}

/// Rows `A_0 .. A_t` at `start`: entry `j` of `A_s` counts tree vertices
/// at distance exactly `s` from the class-`start` vertex that are of class
/// `j`. Non-backtracking walk recursion over `N_d`.
pub fn distance_profile(p: u32, d: u32, start: usize, radius: usize, window: usize) -> Result<Vec<Vec<BigInt>>> {
    let needed = start + radius * d as usize + 1;
    if window < needed {
        return Err(Error::WindowTooSmall { window, needed });
    }
    let guarded = window + (radius + 1) * d as usize + 1;
    let n = nd_recurrence::<BigInt>(p, d, guarded)?;
    let q = BigInt::from(p).pow(d);
    let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(radius + 1);
    let mut indicator = vec![BigInt::from(0); guarded];
    indicator[start] = BigInt::from(1);
    rows.push(indicator);
    for s in 1..=radius {
        let prev = &rows[s - 1];
        let mut next = vec![BigInt::from(0); guarded];
        for (k, a) in prev.iter().enumerate() {
            if a == &BigInt::from(0) {
                continue;
            }
            for (j, slot) in next.iter_mut().enumerate() {
                let b = n.get(k, j);
                if b != &BigInt::from(0) {
                    *slot += a * b;
                }
            }
        }
        // remove walks that step straight back
        let back = if s == 1 {
            None
        } else if s == 2 {
            Some(&q + 1)
        } else {
            Some(q.clone())
        };
        if let Some(c) = back {
            for (slot, b) in next.iter_mut().zip(&rows[s - 2]) {
                *slot -= &c * b;
            }
        }
        rows.push(next);
    }
    Ok(rows.into_iter().map(|mut r| {
        r.truncate(window);
        r
    })
    .collect())
}

/// Source of "classes within distance t" used by the containment search.
pub trait Adjacency {
    fn ball(&self, degree: u32, class: usize, radius: usize) -> Result<BTreeSet<usize>>;
}

/// True neighborhoods from the recurrence matrices.
#[derive(Debug, Clone)]
pub struct RecurrenceAdjacency {
    pub p: u32,
    pub window: usize,
}

impl Adjacency for RecurrenceAdjacency {
    fn ball(&self, degree: u32, class: usize, radius: usize) -> Result<BTreeSet<usize>> {
        let rows = distance_profile(self.p, degree, class, radius, self.window)?;
        let zero = BigInt::from(0);
        Ok(rows
            .iter()
            .flat_map(|r| r.iter().enumerate().filter(|(_, v)| **v != zero).map(|(j, _)| j))
            .collect())
    }
}

/// Replaces the neighborhoods at selected degrees by walks in a supplied
/// quotient graph (edge list), e.g. a hypothesized multiplicity assignment.
pub struct GraphAdjacency<'a> {
    pub base: &'a dyn Adjacency,
    pub graphs: BTreeMap<u32, Vec<(usize, usize)>>,
}

impl Adjacency for GraphAdjacency<'_> {
    fn ball(&self, degree: u32, class: usize, radius: usize) -> Result<BTreeSet<usize>> {
        let Some(edges) = self.graphs.get(&degree) else {
            return self.base.ball(degree, class, radius);
        };
        let mut seen = BTreeSet::from([class]);
        let mut frontier = vec![class];
        for _ in 0..radius {
            let mut next = Vec::new();
            for &v in &frontier {
                for &(a, b) in edges {
                    let w = if a == v {
                        b
                    } else if b == v {
                        a
                    } else {
                        continue;
                    };
                    if seen.insert(w) {
                        next.push(w);
                    }
                }
            }
            frontier = next;
        }
        Ok(seen)
    }
}

/// Classes containing the iterated suborder: starting from `{start}`,
/// replace the set by its distance-`t_k` neighborhoods at a degree-`d_k`
/// place, for each `(d_k, t_k)` in turn.
pub fn ball_support_with(adj: &dyn Adjacency, start: usize, schedule: &[(u32, usize)]) -> Result<BTreeSet<usize>> {
    let mut set = BTreeSet::from([start]);
    for &(degree, radius) in schedule {
        let mut next = BTreeSet::new();
        for &c in &set {
            next.extend(adj.ball(degree, c, radius)?);
        }
        set = next;
    }
    Ok(set)
}

pub fn ball_support(p: u32, start: usize, schedule: &[(u32, usize)], window: usize) -> Result<BTreeSet<usize>> {
    ball_support_with(&RecurrenceAdjacency { p, window }, start, schedule)
}

/// Outcome of a commutation test on an interior window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReciprocityReport {
    pub pass: bool,
    pub interior: usize,
    pub max_discrepancy: BigInt,
    pub first_mismatch: Option<(usize, usize)>,
}

/// Compares `(A B)(i,j)` and `(B A)(i,j)` for `i, j < interior`.
pub fn commutation_report<T: Scalar>(a: &NeighborMatrix<T>, b: &NeighborMatrix<T>, interior: usize) -> ReciprocityReport {
    let ab = a.mul(b);
    let ba = b.mul(a);
    let mut max = BigInt::from(0);
    let mut first = None;
    for i in 0..interior {
        for j in 0..interior {
            let diff = (ab.get(i, j).clone() - ba.get(i, j).clone()).abs().to_bigint();
            if diff > BigInt::from(0) && first.is_none() {
                first = Some((i, j));
            }
            if diff > max {
                max = diff;
            }
        }
    }
    ReciprocityReport { pass: first.is_none(), interior, max_discrepancy: max, first_mismatch: first }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixSource {
    Recurrence,
    Oracle,
}

/// Commutation of `N_{d1}` and `N_{d2}` on `[0, W - d1 - d2)`.
pub fn reciprocity_check(
    p: u32,
    d1: u32,
    d2: u32,
    window: usize,
    source: MatrixSource,
    budget: u128,
) -> Result<ReciprocityReport> {
    let reach = (d1 + d2) as usize;
    if window <= reach {
        return Err(Error::WindowTooSmall { window, needed: reach + 1 });
    }
    let build = |d: u32| -> Result<NeighborMatrix<BigInt>> {
        match source {
            MatrixSource::Recurrence => nd_recurrence(p, d, window),
            MatrixSource::Oracle => nd_oracle(p, d, window, budget),
        }
    };
    Ok(commutation_report(&build(d1)?, &build(d2)?, window - reach))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(m: &NeighborMatrix<i64>) -> Vec<Vec<i64>> {
        m.rows().map(|r| r.to_vec()).collect()
    }

    #[test]
    fn n1_fixture_p2() {
        let m = n1::<i64>(2, 5).unwrap();
        assert_eq!(
            rows(&m),
            vec![
                vec![0, 3, 0, 0, 0],
                vec![2, 0, 1, 0, 0],
                vec![0, 2, 0, 1, 0],
                vec![0, 0, 2, 0, 1],
                vec![0, 0, 0, 2, 0],
            ]
        );
        assert!(n1::<i64>(2, 1).is_err());
    }

    #[test]
    fn n2_small_window() {
        let m = nd_recurrence::<i64>(2, 2, 5).unwrap();
        assert_eq!(&m.row(0)[..3], &[2, 0, 3]);
        assert_eq!(&m.row(1)[..4], &[0, 4, 0, 1]);
        assert_eq!(&m.row(2)[..5], &[4, 0, 0, 0, 1]);
    }

    #[test]
    fn n6_row_zero() {
        for p in [2i64, 3, 5] {
            let m = nd_recurrence::<i64>(p as u32, 6, 10).unwrap();
            let row = m.row(0);
            assert_eq!(row[0], p.pow(5) * (p - 1));
            assert_eq!(row[2], p.pow(3) * (p * p - 1));
            assert_eq!(row[4], p * (p * p - 1));
            assert_eq!(row[6], p + 1);
            assert_eq!(m.row_sum(0), p.pow(6) + 1);
        }
    }

    #[test]
    fn truncation_stability() {
        let small = nd_recurrence::<i64>(3, 3, 8).unwrap();
        let large = nd_recurrence::<i64>(3, 3, 14).unwrap();
        assert_eq!(small, large.crop(8));
    }

    #[test]
    fn oracle_matches_n1() {
        for p in [2, 3, 5] {
            let o = nd_oracle::<i64>(p, 1, 8, DEFAULT_BUDGET).unwrap();
            assert_eq!(o, n1::<i64>(p, 8).unwrap());
        }
    }

    #[test]
    fn oracle_budget() {
        assert_eq!(
            nd_oracle::<i64>(2, 13, 4, DEFAULT_BUDGET),
            Err(Error::BudgetExceeded { needed: 8192, budget: DEFAULT_BUDGET })
        );
    }

    #[test]
    fn oracle_is_place_independent() {
        let field = PrimeField::new(3).unwrap();
        let mats: Vec<_> = enumerate_monic_irreducibles(field, 2)
            .unwrap()
            .into_iter()
            .map(|pi| nd_oracle_at::<i64>(&Place::finite(pi).unwrap(), 8, DEFAULT_BUDGET).unwrap())
            .collect();
        assert_eq!(mats.len(), 3);
        assert!(mats.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn stability_rows() {
        for (p, d) in [(2u32, 3u32), (3, 2), (2, 5)] {
            let m = nd_recurrence::<i64>(p, d, 16).unwrap();
            let q = (p as i64).pow(d);
            for i in d as usize..16 - d as usize {
                for j in 0..16 {
                    let expected = if j + d as usize == i {
                        q
                    } else if j == i + d as usize {
                        1
                    } else {
                        0
                    };
                    assert_eq!(*m.get(i, j), expected, "p={p} d={d} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn profile_depth_two() {
        let rows = distance_profile(2, 1, 0, 2, 8).unwrap();
        assert_eq!(rows[0][0], BigInt::from(1));
        assert_eq!(rows[2][0], BigInt::from(3));
        assert_eq!(rows[2][2], BigInt::from(3));
        let total: BigInt = rows[2].iter().sum();
        assert_eq!(total, BigInt::from(6));
    }

    #[test]
    fn profile_window_guard() {
        assert!(matches!(distance_profile(2, 4, 7, 1, 11), Err(Error::WindowTooSmall { .. })));
        assert!(distance_profile(2, 4, 7, 1, 16).is_ok());
    }

    #[test]
    fn ball_examples() {
        assert_eq!(ball_support(2, 7, &[(4, 1)], 24).unwrap(), BTreeSet::from([3, 7, 11]));
        assert_eq!(ball_support(2, 5, &[], 24).unwrap(), BTreeSet::from([5]));
    }

    #[test]
    fn json_round_trip() {
        let m = nd_recurrence::<BigInt>(3, 2, 6).unwrap();
        let js = m.to_json();
        let text = serde_json::to_string(&js).unwrap();
        let back: MatrixJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_matrix().unwrap(), m);
    }

    #[test]
    fn commutation_detects_perturbation() {
        let a = nd_recurrence::<i64>(2, 1, 16).unwrap();
        let mut b = nd_recurrence::<i64>(2, 2, 16).unwrap();
        assert!(commutation_report(&a, &b, 13).pass);
        let v = *b.get(2, 0) + 1;
        b.set(2, 0, v);
        assert!(!commutation_report(&a, &b, 13).pass);
    }
}
