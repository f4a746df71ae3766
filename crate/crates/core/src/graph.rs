//! C-graphs: quotients of the Bruhat-Tits tree at a place of degree `d`
//! by the global units, restricted to a window of split classes.
//!
//! Loops carry their orbit-end count: the number of stabilizer orbits of
//! neighbors isomorphic to the vertex itself. With that convention the
//! multiplicities at a vertex sum to its valency.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{enumerate_monic_irreducibles, Place, PrimeField};
use crate::error::{Error, Result};
use crate::nmatrix::nd_recurrence;
use crate::orbits::{closed_form_multiplicities, orbit_decomposition, valency_closed_form, vertex_case, OrderType, TypeTag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Line,
    Extra,
    Loop,
}

impl EdgeKind {
    /// Line edges are those on the images of apartments through the
    /// standard flag: `j = i + d` or the folded `j = |i - d|`.
    pub fn classify(i: u64, j: u64, d: u64) -> Self {
        if i == j {
            EdgeKind::Loop
        } else if i.abs_diff(j) == d || i + j == d {
            EdgeKind::Line
        } else {
            EdgeKind::Extra
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            EdgeKind::Line => "line",
            EdgeKind::Extra => "extra",
            EdgeKind::Loop => "loop",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexClass {
    pub i: u64,
    #[serde(rename = "type")]
    pub tag: TypeTag,
    pub r: u32,
    pub valency: u64,
    pub component: u32,
    pub complete: bool,
    /// Sheet of the double cover; only set on S-graphs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sheet: Option<u8>,
}

impl VertexClass {
    pub fn order_type(&self) -> OrderType {
        OrderType { tag: self.tag, r: self.r }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiEdge {
    pub i: u64,
    pub j: u64,
    pub m: u64,
    pub kind: EdgeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub si: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sj: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientGraph {
    pub p: u32,
    pub d: u32,
    pub window: usize,
    pub vertices: Vec<VertexClass>,
    pub edges: Vec<MultiEdge>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    Bruteforce,
    ClosedForm,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bruteforce" => Ok(Method::Bruteforce),
            "closed-form" => Ok(Method::ClosedForm),
            other => Err(Error::Parse(format!("unknown method {other}"))),
        }
    }
}

/// Apartment edges `{i, i + d}` and `{i, |i - d|}` inside the window, as
/// sorted pairs. Folding at `0` and `d / 2` falls out of the absolute value.
pub fn line_skeleton(d: u32, window: usize) -> Result<BTreeSet<(u64, u64)>> {
    if d == 0 {
        return Err(Error::InvalidDegree(0));
    }
    if window < d as usize + 1 {
        return Err(Error::WindowTooSmall { window, needed: d as usize + 1 });
    }
    let d = d as u64;
    let w = window as u64;
    let mut out = BTreeSet::new();
    for i in 0..w {
        for j in [i + d, i.abs_diff(d)] {
            if j < w {
                out.insert((i.min(j), i.max(j)));
            }
        }
    }
    Ok(out)
}

/// Proposition-style check that no vertex is fixed by an element swapping
/// the two sheets. On the projective line `2B ~ 0` forces `B ~ 0`, so the
/// answer is always "unramified".
pub fn ramification_predicate(_i: u64, _d: u32) -> bool {
    false
}

fn component(i: u64, d: u32) -> u32 {
    if d % 2 == 0 {
        (i % 2) as u32
    } else {
        0
    }
}

/// The first monic irreducible of degree `d`; the graph does not depend on
/// the choice.
pub fn default_place(p: u32, d: u32) -> Result<Place> {
    let field = PrimeField::new(p)?;
    if d == 0 {
        return Err(Error::InvalidDegree(0));
    }
    let pi = enumerate_monic_irreducibles(field, d as usize)?.remove(0);
    Place::finite(pi)
}

/// Orbit counts `M(i, j)` at every vertex of the window (all targets,
/// including those beyond the window).
pub fn vertex_multiplicities(
    p: u32,
    d: u32,
    window: usize,
    method: Method,
    budget: u128,
) -> Result<Vec<BTreeMap<u64, u64>>> {
    let place = default_place(p, d)?;
    match method {
        Method::Bruteforce => (0..window as u64)
            .into_par_iter()
            .map(|i| Ok(orbit_decomposition(i, &place, budget)?.multiplicities()))
            .collect(),
        Method::ClosedForm => {
            let guard = window + d as usize + 1;
            let n = nd_recurrence::<BigInt>(p, d, guard)?;
            (0..window as u64)
                .into_par_iter()
                .map(|i| {
                    let counts: BTreeMap<u64, BigInt> =
                        n.row(i as usize).iter().enumerate().map(|(j, v)| (j as u64, v.clone())).collect();
                    closed_form_multiplicities(&vertex_case(i, &place)?, &counts, p)
                })
                .collect()
        }
    }
}

/// Assembles the C-graph on classes `0..window`. Fails if the two
/// endpoints of an edge disagree on its multiplicity.
pub fn build_cgraph(p: u32, d: u32, window: usize, method: Method, budget: u128) -> Result<QuotientGraph> {
    PrimeField::new(p)?;
    if d == 0 {
        return Err(Error::InvalidDegree(0));
    }
    let mults = vertex_multiplicities(p, d, window, method, budget)?;
    let mut vertices = Vec::with_capacity(window);
    for i in 0..window as u64 {
        let t = OrderType::of_class(i, d);
        let valency = valency_closed_form(t, p, d)?;
        vertices.push(VertexClass {
            i,
            tag: t.tag,
            r: t.r,
            valency: u64::try_from(valency).map_err(|_| Error::InvariantViolation("valency overflow".into()))?,
            component: component(i, d),
            complete: i + (d as u64) < window as u64,
            sheet: None,
        });
    }
    let mut edges = Vec::new();
    for (i, row) in mults.iter().enumerate() {
        let i = i as u64;
        for (&j, &m) in row.range(i..window as u64) {
            if j != i {
                let back = mults[j as usize].get(&i).copied().unwrap_or(0);
                if back != m {
                    return Err(Error::InvariantViolation(format!(
                        "edge {i}-{j}: multiplicity {m} from {i}, {back} from {j}"
                    )));
                }
            }
            edges.push(MultiEdge { i, j, m, kind: EdgeKind::classify(i, j, d as u64), si: None, sj: None });
        }
    }
    for (j, row) in mults.iter().enumerate() {
        for (&i, _) in row.range(..j as u64) {
            if !mults[i as usize].contains_key(&(j as u64)) {
                return Err(Error::InvariantViolation(format!("edge {i}-{j} seen only from {j}")));
            }
        }
    }
    Ok(QuotientGraph { p, d, window, vertices, edges })
}

impl QuotientGraph {
    pub fn is_sgraph(&self) -> bool {
        self.vertices.iter().any(|v| v.sheet.is_some())
    }

    pub fn multiplicity(&self, i: u64, j: u64) -> u64 {
        let (a, b) = (i.min(j), i.max(j));
        self.edges.iter().filter(|e| e.i == a && e.j == b).map(|e| e.m).sum()
    }

    /// Multiplicity beyond the single apartment edge, if `{i, j}` is one.
    pub fn extra_multiplicity(&self, i: u64, j: u64) -> u64 {
        let line = (i != j && EdgeKind::classify(i, j, self.d as u64) == EdgeKind::Line) as u64;
        self.multiplicity(i, j).saturating_sub(line)
    }

    /// Sum of multiplicities at `i`, loops counted once (as orbit ends).
    pub fn degree_at(&self, i: u64) -> u64 {
        self.edges.iter().filter(|e| e.i == i || e.j == i).map(|e| e.m).sum()
    }

    /// Complete vertices whose degree differs from the Table-1 valency.
    pub fn valency_violations(&self) -> Vec<(u64, u64, u64)> {
        self.vertices
            .iter()
            .filter(|v| v.complete)
            .filter_map(|v| {
                let got = self.degree_at(v.i);
                (got != v.valency).then_some((v.i, got, v.valency))
            })
            .collect()
    }

    /// Edges breaking `i + j + d` even or `|i - j| <= d`.
    pub fn parity_band_violations(&self) -> Vec<(u64, u64)> {
        let d = self.d as u64;
        self.edges
            .iter()
            .filter(|e| (e.i + e.j + d) % 2 == 1 || e.i.abs_diff(e.j) > d)
            .map(|e| (e.i, e.j))
            .collect()
    }

    /// Connected components of the windowed graph, each sorted.
    pub fn components(&self) -> Vec<Vec<u64>> {
        let mut by_id: BTreeMap<u32, Vec<u64>> = BTreeMap::new();
        for ((i, _), c) in component_ids(self) {
            by_id.entry(c).or_default().push(i);
        }
        by_id
            .into_values()
            .map(|mut ids| {
                ids.sort();
                ids
            })
            .collect()
    }

    /// Two-colors the graph by parity of the class index.
    pub fn is_bipartite_by_parity(&self) -> bool {
        self.edges.iter().all(|e| (e.i + e.j) % 2 == 1)
    }

    /// Parity double cover for even `d`; the graph itself for odd `d`.
    pub fn derive_sgraph(&self) -> QuotientGraph {
        if self.d % 2 == 1 {
            return self.clone();
        }
        let mut vertices = Vec::with_capacity(2 * self.vertices.len());
        for v in &self.vertices {
            for s in 0..2u8 {
                debug_assert!(!ramification_predicate(v.i, self.d));
                vertices.push(VertexClass { sheet: Some(s), component: 0, ..v.clone() });
            }
        }
        let mut edges = Vec::with_capacity(2 * self.edges.len());
        for e in &self.edges {
            for s in 0..2u8 {
                edges.push(MultiEdge { si: Some(s), sj: Some(1 - s), ..e.clone() });
            }
        }
        let mut g = QuotientGraph { vertices, edges, ..self.clone() };
        let owner = component_ids(&g);
        for v in &mut g.vertices {
            v.component = owner[&(v.i, v.sheet)];
        }
        g
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable graph")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_dot(&self) -> String {
        let kind = if self.is_sgraph() { "S" } else { "C" };
        let mut out = format!("graph {kind}_p{}_d{} {{\n", self.p, self.d);
        if self.vertices.is_empty() {
            out.push_str("}\n");
            return out;
        }
        let name = |i: u64, s: Option<u8>| match s {
            Some(s) => format!("D_{i}_{s}"),
            None => format!("D_{i}"),
        };
        let mut by_comp: BTreeMap<u32, Vec<&VertexClass>> = BTreeMap::new();
        for v in &self.vertices {
            by_comp.entry(v.component).or_default().push(v);
        }
        for (c, vs) in &by_comp {
            let _ = writeln!(out, "  subgraph cluster_{c} {{");
            for v in vs {
                let style = if v.complete { "" } else { ", style=dashed" };
                let _ = writeln!(out, "    {} [label=\"D_{{{}}}\"{style}];", name(v.i, v.sheet), v.i);
            }
            out.push_str("  }\n");
        }
        let mut edges: Vec<&MultiEdge> = self.edges.iter().collect();
        edges.sort_by_key(|e| (e.i, e.j, e.si, e.sj));
        for e in edges {
            let _ = writeln!(
                out,
                "  {} -- {} [label=\"{}\", kind={}];",
                name(e.i, e.si),
                name(e.j, e.sj),
                e.m,
                e.kind.as_str()
            );
        }
        out.push_str("}\n");
        out
    }
}

/// Invariant audit of a C-graph. Returns one message per failed check.
///
/// Checks Table-1 valencies on complete vertices, parity and band, the
/// expected component structure, and that orbit sizes per target add up
/// to the neighbor counts `N_d(i, j)`.
pub fn audit(g: &QuotientGraph, budget: u128) -> Result<Vec<String>> {
    let mut failures = Vec::new();
    for (i, got, want) in g.valency_violations() {
        failures.push(format!("valency at D_{i}: {got}, expected {want}"));
    }
    for (i, j) in g.parity_band_violations() {
        failures.push(format!("edge D_{i}-D_{j} breaks parity or band"));
    }
    let comps = g.components().len();
    if g.d % 2 == 1 {
        if !g.is_bipartite_by_parity() {
            failures.push("odd degree graph is not bipartite".into());
        }
        if comps > 1 {
            failures.push(format!("{comps} components, expected 1"));
        }
    } else if g.window >= 2 && comps != 2 {
        failures.push(format!("{comps} components, expected 2"));
    }
    let place = default_place(g.p, g.d)?;
    let n = nd_recurrence::<BigInt>(g.p, g.d, g.window + g.d as usize + 1)?;
    let decomps = g
        .vertices
        .par_iter()
        .filter(|v| v.complete)
        .map(|v| orbit_decomposition(v.i, &place, budget))
        .collect::<Result<Vec<_>>>()?;
    for dec in decomps {
        let counts = dec.neighbor_counts();
        for (j, want) in n.row(dec.class as usize).iter().enumerate() {
            let got = BigInt::from(counts.get(&(j as u64)).copied().unwrap_or(0));
            if &got != want {
                failures.push(format!("N({}, {j}): orbits cover {got}, matrix has {want}", dec.class));
            }
        }
    }
    Ok(failures)
}

/// Vertex key: class index and, on S-graphs, the sheet.
type Node = (u64, Option<u8>);

/// Connected-component id of every vertex, numbered in vertex order.
fn component_ids(g: &QuotientGraph) -> BTreeMap<Node, u32> {
    let mut adj: BTreeMap<Node, Vec<Node>> = g.vertices.iter().map(|v| ((v.i, v.sheet), Vec::new())).collect();
    for e in &g.edges {
        adj.entry((e.i, e.si)).or_default().push((e.j, e.sj));
        adj.entry((e.j, e.sj)).or_default().push((e.i, e.si));
    }
    let mut owner = BTreeMap::new();
    let mut next = 0;
    for &start in adj.keys() {
        if owner.contains_key(&start) {
            continue;
        }
        owner.insert(start, next);
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for &w in &adj[&v] {
                if let std::collections::btree_map::Entry::Vacant(slot) = owner.entry(w) {
                    slot.insert(next);
                    stack.push(w);
                }
            }
        }
        next += 1;
    }
    owner
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nmatrix::DEFAULT_BUDGET;

    fn edge_map(g: &QuotientGraph) -> BTreeMap<(u64, u64), u64> {
        g.edges.iter().map(|e| ((e.i, e.j), e.m)).collect()
    }

    #[test]
    fn skeleton_examples() {
        let s = line_skeleton(1, 4).unwrap();
        assert_eq!(s.into_iter().collect::<Vec<_>>(), vec![(0, 1), (1, 2), (2, 3)]);
        let s = line_skeleton(4, 10).unwrap();
        assert!(s.contains(&(1, 3)) && s.contains(&(1, 5)) && s.contains(&(2, 2)) && s.contains(&(0, 4)));
        let s = line_skeleton(5, 12).unwrap();
        assert!(s.contains(&(2, 3)) && s.contains(&(1, 4)) && s.contains(&(0, 5)));
        assert!(line_skeleton(4, 4).is_err());
    }

    #[test]
    fn degree_two_graph() {
        let g = build_cgraph(2, 2, 6, Method::Bruteforce, DEFAULT_BUDGET).unwrap();
        let m = edge_map(&g);
        assert_eq!(m[&(0, 0)], 1);
        assert_eq!(m[&(1, 1)], 1);
        assert_eq!(m[&(0, 2)], 1);
        assert_eq!(m[&(2, 4)], 1);
        assert_eq!(m[&(1, 3)], 1);
        assert_eq!(m[&(3, 5)], 1);
        assert_eq!(g.components(), vec![vec![0, 2, 4], vec![1, 3, 5]]);
        assert!(g.valency_violations().is_empty());
    }

    #[test]
    fn degree_five_extra_edges() {
        let g = build_cgraph(2, 5, 12, Method::Bruteforce, DEFAULT_BUDGET).unwrap();
        assert_eq!(g.multiplicity(0, 1), 4);
        assert_eq!(g.multiplicity(1, 2), 3);
        assert_eq!(g.multiplicity(0, 3), 1);
        assert_eq!(g.multiplicity(2, 3), 1);
        assert_eq!(g.extra_multiplicity(2, 3), 0);
        assert!(g.is_bipartite_by_parity());
        assert_eq!(g.components().len(), 1);
    }

    #[test]
    fn closed_form_matches_bruteforce() {
        for (p, d) in [(2, 1), (2, 2), (2, 3), (2, 4), (3, 1), (3, 2), (3, 3)] {
            let a = build_cgraph(p, d, 12, Method::Bruteforce, DEFAULT_BUDGET).unwrap();
            let b = build_cgraph(p, d, 12, Method::ClosedForm, DEFAULT_BUDGET).unwrap();
            assert_eq!(a, b, "p={p} d={d}");
        }
    }

    #[test]
    fn sgraph_doubles() {
        let g = build_cgraph(2, 2, 6, Method::Bruteforce, DEFAULT_BUDGET).unwrap();
        let s = g.derive_sgraph();
        assert_eq!(s.vertices.len(), 2 * g.vertices.len());
        assert_eq!(s.edges.len(), 2 * g.edges.len());
        assert!(s.edges.iter().any(|e| e.i == 0 && e.j == 0 && e.si != e.sj));
        let g1 = build_cgraph(2, 1, 5, Method::Bruteforce, DEFAULT_BUDGET).unwrap();
        assert_eq!(g1.derive_sgraph(), g1);
    }

    #[test]
    fn emitters() {
        let g = build_cgraph(2, 1, 4, Method::Bruteforce, DEFAULT_BUDGET).unwrap();
        let dot = g.to_dot();
        assert_eq!(dot.matches(" -- ").count(), 3);
        assert_eq!(dot, g.to_dot());
        assert_eq!(QuotientGraph::from_json(&g.to_json()).unwrap(), g);
        let empty = QuotientGraph { p: 2, d: 1, window: 0, vertices: vec![], edges: vec![] };
        assert_eq!(empty.to_dot(), "graph C_p2_d1 {\n}\n");
    }

    #[test]
    fn never_ramified() {
        assert!(!ramification_predicate(0, 3));
        assert!(!ramification_predicate(3, 2));
        assert!(!ramification_predicate(2, 4));
    }
}
