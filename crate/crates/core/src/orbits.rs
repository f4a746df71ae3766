//! Stabilizers of split orders acting on the neighbors of a vertex, their
//! orbits, and the closed-form orbit counts (valencies) and edge
//! multiplicities.
//!
//! For class `i = 0` the global units are `GL_2(F_p)` acting by Moebius
//! maps. For `i >= 1` they are the maps `(f, g) -> (a f, b f + c g)` with
//! `deg b <= i`; on residues this is `z -> u z + v` with `u` in `F_p^*`
//! and `v` in the span `W_i` of `1, theta, ..., theta^{r-1}`,
//! `r = min(i + 1, d)`. The point `[0:1]` is fixed and leads to class
//! `i + d`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{enumerate_proj_line, ExtElem, ExtField, Place, PrimeField, ProjPoint};
use crate::bundles::neighbor_gap;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TypeTag {
    I,
    II,
    III,
    IV,
}

impl fmt::Display for TypeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TypeTag::I => "I",
            TypeTag::II => "II",
            TypeTag::III => "III",
            TypeTag::IV => "IV",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for TypeTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" => Ok(TypeTag::I),
            "II" => Ok(TypeTag::II),
            "III" => Ok(TypeTag::III),
            "IV" => Ok(TypeTag::IV),
            other => Err(Error::Parse(format!("unknown order type {other}"))),
        }
    }
}

/// Order type with the dimension `r` of the radical image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrderType {
    pub tag: TypeTag,
    pub r: u32,
}

impl OrderType {
    /// Type of the split order of class `i` at a place of degree `d`.
    pub fn of_class(i: u64, d: u32) -> Self {
        if i == 0 {
            OrderType { tag: TypeTag::I, r: 0 }
        } else {
            OrderType { tag: TypeTag::III, r: radical_dim(i, d) }
        }
    }
}

/// `min(i + 1, d)`.
pub fn radical_dim(i: u64, d: u32) -> u32 {
    (i + 1).min(d as u64) as u32
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilizerKind {
    FullMoebius,
    AffineShift { r: u32 },
}

/// Global units of the class-`i` order, modulo scalars.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilizerGroup {
    pub class: u64,
    pub p: u32,
    pub d: u32,
    pub kind: StabilizerKind,
}

/// 2x2 matrix over the residue field, acting on column vectors `(x, y)`.
pub type ResidueMatrix = [[ExtElem; 2]; 2];

impl StabilizerGroup {
    pub fn order(&self) -> u128 {
        let p = self.p as u128;
        match self.kind {
            StabilizerKind::FullMoebius => p * (p * p - 1),
            StabilizerKind::AffineShift { r } => (p - 1) * p.pow(r),
        }
    }

    /// Generators as matrices over `residue`.
    pub fn generators(&self, residue: &ExtField) -> Vec<ResidueMatrix> {
        let base = PrimeField::new(self.p).expect("validated prime");
        let g = residue.from_base(base.primitive_root());
        let (one, zero) = (residue.one(), residue.zero());
        match self.kind {
            StabilizerKind::FullMoebius => vec![
                [[one.clone(), one.clone()], [zero.clone(), one.clone()]],
                [[one.clone(), zero.clone()], [one.clone(), one.clone()]],
                [[g, zero.clone()], [zero, one]],
            ],
            StabilizerKind::AffineShift { r } => {
                let mut gens = vec![[[one.clone(), zero.clone()], [zero.clone(), g]]];
                let theta = residue.theta();
                let mut power = residue.one();
                for _ in 0..r {
                    gens.push([[one.clone(), zero.clone()], [power.clone(), one.clone()]]);
                    power = residue.mul(&power, &theta);
                }
                gens
            }
        }
    }
}

pub fn stabilizer(i: u64, p: u32, d: u32) -> Result<StabilizerGroup> {
    PrimeField::new(p)?;
    if d == 0 {
        return Err(Error::InvalidDegree(0));
    }
    let kind = if i == 0 {
        StabilizerKind::FullMoebius
    } else {
        StabilizerKind::AffineShift { r: radical_dim(i, d) }
    };
    Ok(StabilizerGroup { class: i, p, d, kind })
}

pub fn apply(residue: &ExtField, m: &ResidueMatrix, pt: &ProjPoint) -> ProjPoint {
    let (x, y) = pt.coords(residue);
    let nx = residue.add(&residue.mul(&m[0][0], &x), &residue.mul(&m[0][1], &y));
    let ny = residue.add(&residue.mul(&m[1][0], &x), &residue.mul(&m[1][1], &y));
    ProjPoint::from_coords(residue, &nx, &ny).expect("invertible matrix")
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Keeps the smaller index as root.
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orbit {
    /// Smallest point index in the orbit.
    pub representative: usize,
    pub size: usize,
    /// Class of every neighbor in the orbit.
    pub gap: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitDecomposition {
    pub class: u64,
    pub point_count: usize,
    pub orbits: Vec<Orbit>,
}

impl OrbitDecomposition {
    /// Number of orbits per target class.
    pub fn multiplicities(&self) -> BTreeMap<u64, u64> {
        let mut out = BTreeMap::new();
        for o in &self.orbits {
            *out.entry(o.gap).or_insert(0) += 1;
        }
        out
    }

    /// Number of neighbors per target class.
    pub fn neighbor_counts(&self) -> BTreeMap<u64, u64> {
        let mut out = BTreeMap::new();
        for o in &self.orbits {
            *out.entry(o.gap).or_insert(0) += o.size as u64;
        }
        out
    }
}

/// Orbits of the class-`i` stabilizer on the neighbors at `place`, each
/// labeled with its (asserted constant) class.
pub fn orbit_decomposition(i: u64, place: &Place, budget: u128) -> Result<OrbitDecomposition> {
    let residue = place.residue_field()?;
    if residue.order() > budget {
        return Err(Error::BudgetExceeded { needed: residue.order(), budget });
    }
    let field = place.field();
    let group = stabilizer(i, field.p(), place.degree() as u32)?;
    let gens = group.generators(&residue);
    let points = enumerate_proj_line(&residue);
    let mut dsu = DisjointSet::new(points.len());
    for (idx, pt) in points.iter().enumerate() {
        for g in &gens {
            dsu.union(idx, apply(&residue, g, pt).index(&residue));
        }
    }
    let gaps = points
        .iter()
        .map(|line| neighbor_gap(field, i, place, line))
        .collect::<Result<Vec<_>>>()?;
    let mut by_root: BTreeMap<usize, Orbit> = BTreeMap::new();
    for idx in 0..points.len() {
        let root = dsu.find(idx);
        let orbit = by_root.entry(root).or_insert(Orbit { representative: root, size: 0, gap: gaps[root] });
        if orbit.gap != gaps[idx] {
            return Err(Error::InvariantViolation(format!(
                "class {i}: orbit of point {root} mixes gaps {} and {}",
                orbit.gap, gaps[idx]
            )));
        }
        orbit.size += 1;
    }
    Ok(OrbitDecomposition { class: i, point_count: points.len(), orbits: by_root.into_values().collect() })
}

fn big(v: u128) -> BigInt {
    BigInt::from(v)
}

fn pw(p: u32, e: u32) -> BigInt {
    BigInt::from(p).pow(e)
}

fn epsilon(n: u32) -> BigInt {
    if n % 2 == 0 {
        BigInt::one()
    } else {
        BigInt::zero()
    }
}

fn integral(value: BigRational, expr: impl FnOnce() -> String) -> Result<BigInt> {
    if value.is_integer() {
        Ok(value.to_integer())
    } else {
        Err(Error::NonIntegral { expr: expr() })
    }
}

fn rat(n: BigInt) -> BigRational {
    BigRational::from_integer(n)
}

fn check_r(t: OrderType, n: u32) -> Result<()> {
    if t.r > n {
        return Err(Error::InvariantViolation(format!("radical dimension {} exceeds degree {n}", t.r)));
    }
    Ok(())
}

/// Number of stabilizer orbits on the neighbors (the valency), per type.
pub fn valency_closed_form(t: OrderType, p: u32, n: u32) -> Result<BigInt> {
    if n == 0 {
        return Err(Error::InvalidDegree(0));
    }
    check_r(t, n)?;
    let pb = || rat(BigInt::from(p));
    let value = match t.tag {
        TypeTag::I => {
            rat(BigInt::one())
                + rat(pw(p, n - 1) - 1) / (pb() * pb() - rat(BigInt::one()))
                + pb() * rat(epsilon(n)) / (pb() + rat(BigInt::one()))
        }
        TypeTag::II => rat(pw(p, n - t.r) + 1),
        TypeTag::III => rat(BigInt::from(2)) + rat(pw(p, n - t.r) - 1) / (pb() - rat(BigInt::one())),
        TypeTag::IV => rat(pw(p, n) + BigInt::from(2 * p) * epsilon(n) + 1) / (pb() + rat(BigInt::one())),
    };
    integral(value, || format!("valency of {:?} at p={p}, N={n}", t))
}

/// Census of group elements by Jordan form: `[b 1; 0 b]`, scalar,
/// split semisimple `diag(b, c)`, no eigenvalues.
pub fn jordan_census(t: OrderType, p: u32) -> [BigInt; 4] {
    let pb = BigInt::from(p);
    let one = BigInt::one();
    let pr = pw(p, t.r);
    match t.tag {
        TypeTag::I => [
            (&pb - 1) * (&pb - 1) * (&pb + 1),
            &pb - 1,
            (&pb * &pb - 1) * (&pb - 2) * &pb / 2,
            (&pb - 1) * (&pb - 1) * &pb * &pb / 2,
        ],
        TypeTag::II => [(&pb - 1) * (&pr - &one), &pb - 1, BigInt::zero(), BigInt::zero()],
        TypeTag::III => [(&pb - 1) * (&pr - &one), &pb - 1, (&pb - 1) * (&pb - 2) * &pr, BigInt::zero()],
        TypeTag::IV => [BigInt::zero(), &pb - 1, BigInt::zero(), (&pb - 1) * &pb],
    }
}

/// Fixed points on P^1(F_{p^N}) of an element of each Jordan form.
pub fn fixed_points(p: u32, n: u32) -> [BigInt; 4] {
    [BigInt::one(), pw(p, n) + 1, BigInt::from(2), BigInt::from(2) * epsilon(n)]
}

/// Order of the unit group as listed in the census.
pub fn census_group_order(t: OrderType, p: u32) -> BigInt {
    jordan_census(t, p).iter().sum()
}

/// Orbit count by averaging fixed points over the census.
pub fn burnside_valency(t: OrderType, p: u32, n: u32) -> Result<BigInt> {
    check_r(t, n)?;
    let census = jordan_census(t, p);
    let fixed = fixed_points(p, n);
    let total: BigInt = census.iter().zip(&fixed).map(|(c, f)| c * f).sum();
    let order = census_group_order(t, p);
    let (q, r) = total.div_rem(&order);
    if !r.is_zero() {
        return Err(Error::NonIntegral { expr: format!("burnside {total}/{order}") });
    }
    Ok(q)
}

/// Rows of the multiplicity table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MultCase {
    A,
    B1,
    B2,
    B3,
    B4,
    B5,
    B6,
    B7,
    C1,
    C2,
    C3,
}

/// Columns of the multiplicity table: the `B + P` neighbor, the
/// exceptional class (when different from `B + P`), any other class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MultColumn {
    BPlusP,
    Exceptional,
    Other,
}

/// Edge multiplicity as a function of the neighbor count `n`.
pub fn multiplicity_closed_form(case: MultCase, column: MultColumn, n: &BigInt, p: u32, r: u32) -> Result<BigInt> {
    use MultCase::*;
    use MultColumn::*;
    let n = rat(n.clone());
    let pb = rat(BigInt::from(p));
    let one = rat(BigInt::one());
    let two = rat(BigInt::from(2));
    let a_den = (pb.clone() - one.clone()) * rat(pw(p, r));
    let b_den = two.clone() * (pb.clone() - one.clone());
    let c_den = pb.clone() * (pb.clone() * pb.clone() - one.clone());
    let pm1 = pb.clone() - one.clone();
    let value = match (case, column) {
        (A, BPlusP) => one.clone() + (n - one.clone()) / a_den,
        (A, Exceptional) => one.clone() + (n - rat(pw(p, r))) / a_den,
        (A, Other) => n / a_den,
        (B1 | B2 | B3 | B4 | B5 | B6 | B7, Other) => n / b_den,
        (B1 | B6, BPlusP) => two.clone() + (n - pm1 - two) / b_den,
        (B2 | B3 | B5, BPlusP) => one.clone() + (n - two) / b_den,
        (B4 | B7, BPlusP) => two.clone() + (n - two) / b_den,
        (B2 | B6 | B7, Exceptional) => one.clone() + (n - pm1) / b_den,
        (B5, Exceptional) => one.clone() + n / b_den,
        (C1 | C2 | C3, Other) => n / c_den,
        (C1 | C2, BPlusP) => one.clone() + (n - pb.clone() - one.clone()) / c_den,
        (C2, Exceptional) => one.clone() + (n - pb.clone() * pm1) / c_den,
        (C3, BPlusP) => two + (n - pb.clone() * pb - one) / c_den,
        (case, column) => return Err(Error::UndefinedCell(format!("{case:?}/{column:?}"))),
    };
    if value < rat(BigInt::zero()) {
        return Err(Error::NonIntegral { expr: format!("negative multiplicity for {case:?}/{column:?}") });
    }
    integral(value, || format!("{case:?}/{column:?} at p={p}, r={r}"))
}

/// Which table row applies at class `i`, and the class reached by the
/// exceptional orbit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexCase {
    pub case: MultCase,
    pub r: u32,
    pub b_plus_p: u64,
    pub exceptional: Option<u64>,
}

/// An element of `F_{p^2} \ F_p` inside an even-degree residue field.
fn quadratic_point(residue: &ExtField) -> Option<ExtElem> {
    let p2 = (residue.base().p() as u128).pow(2);
    residue
        .elements()
        .find(|a| !residue.is_in_prime_field(a) && residue.pow(a, p2) == *a)
}

/// Classifies the vertex; exceptional targets are found by reducing one
/// representative lattice each.
pub fn vertex_case(i: u64, place: &Place) -> Result<VertexCase> {
    let d = place.degree() as u32;
    let field = place.field();
    let residue = place.residue_field()?;
    let b_plus_p = i + d as u64;
    if i > 0 {
        let r = radical_dim(i, d);
        // the W_i orbit contains [1:0]
        let ex = neighbor_gap(field, i, place, &ProjPoint::Infinity)?;
        return Ok(VertexCase { case: MultCase::A, r, b_plus_p, exceptional: Some(ex) });
    }
    if d % 2 == 1 {
        return Ok(VertexCase { case: MultCase::C1, r: 0, b_plus_p, exceptional: None });
    }
    let mu = quadratic_point(&residue).ok_or_else(|| Error::InvariantViolation("no quadratic point".into()))?;
    let target = neighbor_gap(field, 0, place, &ProjPoint::Affine(mu))?;
    // the table lists the "both exceptional orbits reach B + P" row as C3
    if target == b_plus_p {
        Ok(VertexCase { case: MultCase::C3, r: 0, b_plus_p, exceptional: None })
    } else {
        Ok(VertexCase { case: MultCase::C2, r: 0, b_plus_p, exceptional: Some(target) })
    }
}

/// Multiplicities at class `i` from a neighbor-count row.
pub fn closed_form_multiplicities(vc: &VertexCase, counts: &BTreeMap<u64, BigInt>, p: u32) -> Result<BTreeMap<u64, u64>> {
    let mut out = BTreeMap::new();
    for (&j, n) in counts {
        if n.is_zero() {
            continue;
        }
        let column = if j == vc.b_plus_p {
            MultColumn::BPlusP
        } else if Some(j) == vc.exceptional {
            MultColumn::Exceptional
        } else {
            MultColumn::Other
        };
        let m = multiplicity_closed_form(vc.case, column, n, p, vc.r)?;
        let m = u64::try_from(m).map_err(|_| Error::InvariantViolation("multiplicity overflow".into()))?;
        if m > 0 {
            out.insert(j, m);
        }
    }
    Ok(out)
}

pub fn big_u(v: u64) -> BigInt {
    big(v as u128)
}
