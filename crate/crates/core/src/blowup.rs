//! Unweighted blowups of gadget graphs.
//!
//! Base vertex `v` becomes `4·n_v` twin copies with `n_v = round(n·w(v))`
//! and `n = |V|/ρ`; copies of adjacent base vertices are all adjacent.
//! Blowup vertex ids run over base vertices in order, copies contiguous.

use std::ops::Range;

use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::flow::symmetric_b_matching;
use crate::fracmatch::{Component, FractionalMatching};
use crate::gadget::{independent_set, GadgetGraph};
use crate::graph::{mask, normalize, Edge, Graph, Matching, Maximality};
use crate::rational::{from_usize, round_half_away, to_usize, Rational};
use crate::ulc::Planted;

pub const DEFAULT_VERTEX_CAP: usize = 200_000;
/// Edge cap for materializing a blowup with [`BlowupGraph::to_graph`].
pub const MAX_MATERIALIZED_EDGES: usize = 1 << 24;

#[derive(Debug, Clone)]
pub struct BlowupGraph<'a> {
    base: &'a GadgetGraph,
    rho: Rational,
    n: usize,
    /// `n_v` per base vertex.
    units: Vec<usize>,
    /// Start of each base vertex's copy block; one extra trailing entry.
    offsets: Vec<usize>,
}

/// A blowup vertex `⟨v, i⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CopyVertex {
    pub base: usize,
    pub index: usize,
}

pub fn blow_up<'a>(base: &'a GadgetGraph, rho: &Rational) -> Result<BlowupGraph<'a>> {
    blow_up_with_cap(base, rho, DEFAULT_VERTEX_CAP)
}

pub fn blow_up_with_cap<'a>(base: &'a GadgetGraph, rho: &Rational, cap: usize) -> Result<BlowupGraph<'a>> {
    if *rho <= Rational::zero() {
        return Err(Error::InvalidParameter(format!("rho = {rho} must be positive")));
    }
    let n_exact = from_usize(base.num_vertices()) / rho;
    if !n_exact.is_integer() {
        return Err(Error::InvalidParameter(format!(
            "|V|/rho = {n_exact} is not an integer"
        )));
    }
    let n = to_usize(&n_exact.to_integer())?;
    let n_q = from_usize(n);
    let mut units = Vec::with_capacity(base.num_vertices());
    let mut offsets = Vec::with_capacity(base.num_vertices() + 1);
    let mut total = 0usize;
    for v in 0..base.num_vertices() {
        let nv = to_usize(&round_half_away(&(&n_q * base.weight(v))))?;
        offsets.push(total);
        total = nv
            .checked_mul(4)
            .and_then(|c| total.checked_add(c))
            .filter(|&t| t <= cap)
            .ok_or_else(|| Error::CapExceeded(format!("blowup exceeds {cap} vertices")))?;
        units.push(nv);
    }
    offsets.push(total);
    Ok(BlowupGraph {
        base,
        rho: rho.clone(),
        n,
        units,
        offsets,
    })
}

impl<'a> BlowupGraph<'a> {
    pub fn base(&self) -> &'a GadgetGraph {
        self.base
    }

    pub fn rho(&self) -> &Rational {
        &self.rho
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn units(&self, v: usize) -> usize {
        self.units[v]
    }

    /// `4·n_v`.
    pub fn copy_count(&self, v: usize) -> usize {
        4 * self.units[v]
    }

    pub fn copies(&self, v: usize) -> Range<usize> {
        self.offsets[v]..self.offsets[v + 1]
    }

    pub fn id(&self, v: usize, index: usize) -> usize {
        debug_assert!(index < self.copy_count(v));
        self.offsets[v] + index
    }

    pub fn num_vertices(&self) -> usize {
        *self.offsets.last().expect("trailing offset")
    }

    pub fn project(&self, id: usize) -> CopyVertex {
        // Last block starting at or before `id`; empty blocks share offsets.
        let base = self.offsets.partition_point(|&o| o <= id) - 1;
        CopyVertex {
            base,
            index: id - self.offsets[base],
        }
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a < self.num_vertices()
            && b < self.num_vertices()
            && self.base.graph().has_edge(self.project(a).base, self.project(b).base)
    }

    pub fn num_edges(&self) -> usize {
        self.base
            .graph()
            .edges()
            .map(|(u, v)| self.copy_count(u) * self.copy_count(v))
            .sum()
    }

    /// Explicit graph; refuses beyond [`MAX_MATERIALIZED_EDGES`].
    pub fn to_graph(&self) -> Result<Graph> {
        if self.num_edges() > MAX_MATERIALIZED_EDGES {
            return Err(Error::CapExceeded(format!(
                "blowup has {} edges, cap {MAX_MATERIALIZED_EDGES}",
                self.num_edges()
            )));
        }
        let mut adj = vec![Vec::new(); self.num_vertices()];
        for (u, v) in self.base.graph().edges() {
            for a in self.copies(u) {
                for b in self.copies(v) {
                    adj[a].push(b);
                    adj[b].push(a);
                }
            }
        }
        Ok(Graph::from_adjacency(adj))
    }

    /// First uncovered blowup edge, checked per base edge through twin copies.
    pub fn verify_cover(&self, set: &[usize]) -> std::result::Result<(), Edge> {
        let in_set = mask(self.num_vertices(), set);
        let missing = |v: usize| self.copies(v).find(|&c| !in_set[c]);
        for (u, v) in self.base.graph().edges() {
            if let (Some(a), Some(b)) = (missing(u), missing(v)) {
                return Err(normalize(a, b));
            }
        }
        Ok(())
    }

    pub fn verify_maximal(&self, matching: &Matching) -> Result<Maximality> {
        let mut used = vec![false; self.num_vertices()];
        for &(a, b) in matching.edges() {
            if !self.has_edge(a, b) {
                return Err(Error::NotAMatching(format!("({a}, {b}) is not a blowup edge")));
            }
            for c in [a, b] {
                if std::mem::replace(&mut used[c], true) {
                    return Err(Error::NotAMatching(format!("copy {c} matched twice")));
                }
            }
        }
        let free = |v: usize| self.copies(v).find(|&c| !used[c]);
        for (u, v) in self.base.graph().edges() {
            if let (Some(a), Some(b)) = (free(u), free(v)) {
                return Ok(Maximality::Extendable(normalize(a, b)));
            }
        }
        Ok(Maximality::Maximal)
    }
}

/// All copies of the base cover's vertices.
pub fn product_cover(blowup: &BlowupGraph<'_>, base_cover: &[usize]) -> Result<Vec<usize>> {
    if base_cover.iter().any(|&v| v >= blowup.base.num_vertices()) {
        return Err(Error::InvalidParameter("cover vertex out of range".into()));
    }
    crate::graph::verify_vertex_cover(blowup.base.graph(), base_cover)
        .map_err(|(u, v)| Error::NotACover(u, v))?;
    let mut cover: Vec<usize> = base_cover.iter().flat_map(|&v| blowup.copies(v)).collect();
    cover.sort_unstable();
    cover.dedup();
    blowup
        .verify_cover(&cover)
        .map_err(|(a, b)| Error::Internal(format!("product cover misses ({a}, {b})")))?;
    Ok(cover)
}

/// Drops removable vertices, trying low-degree vertices first (ties by id),
/// until the cover is minimal.
pub fn minimalize_cover(graph: &Graph, cover: &[usize]) -> Result<Vec<usize>> {
    if let Some(&v) = cover.iter().find(|&&v| v >= graph.num_vertices()) {
        return Err(Error::InvalidParameter(format!("cover vertex {v} out of range")));
    }
    crate::graph::verify_vertex_cover(graph, cover)
        .map_err(|(u, v)| Error::NotACover(u, v))?;
    let mut in_set = mask(graph.num_vertices(), cover);
    let mut order: Vec<usize> = crate::graph::members(&in_set);
    order.sort_by_key(|&v| (graph.degree(v), v));
    for v in order {
        if graph.neighbors(v).iter().all(|&w| in_set[w]) {
            in_set[v] = false;
        }
    }
    Ok(crate::graph::members(&in_set))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProductVerdict {
    /// Base vertices whose copies are all in the cover.
    Product(Vec<usize>),
    /// A base vertex with some copies in and some out.
    Mixed { base: usize },
}

pub fn is_product_cover(blowup: &BlowupGraph<'_>, cover: &[usize]) -> ProductVerdict {
    let inside: Vec<usize> = cover.iter().copied().filter(|&c| c < blowup.num_vertices()).collect();
    let in_set = mask(blowup.num_vertices(), &inside);
    let mut base = Vec::new();
    for v in 0..blowup.base.num_vertices() {
        let inside = blowup.copies(v).filter(|&c| in_set[c]).count();
        if inside == blowup.copy_count(v) && inside > 0 {
            base.push(v);
        } else if inside > 0 {
            return ProductVerdict::Mixed { base: v };
        }
    }
    ProductVerdict::Product(base)
}

/// Integral matching on a blowup, each edge tagged with its base edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CopyMatching {
    pub matching: Matching,
    /// Base edge of `matching.edges()[i]`.
    pub base_edges: Vec<Edge>,
}

impl CopyMatching {
    pub fn len(&self) -> usize {
        self.matching.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matching.is_empty()
    }
}

struct Allocator {
    next: Vec<usize>,
    edges: Vec<Edge>,
}

impl Allocator {
    fn leftover(&self, blowup: &BlowupGraph<'_>, v: usize) -> usize {
        blowup.copy_count(v) - self.next[v]
    }

    fn pair(&mut self, blowup: &BlowupGraph<'_>, u: usize, v: usize, count: usize) -> Result<()> {
        if count > self.leftover(blowup, u) || count > self.leftover(blowup, v) {
            return Err(Error::Internal(format!(
                "leftover mismatch: {count} copy pairs on base edge ({u}, {v})"
            )));
        }
        for i in 0..count {
            self.edges
                .push((blowup.id(u, self.next[u] + i), blowup.id(v, self.next[v] + i)));
        }
        self.next[u] += count;
        self.next[v] += count;
        Ok(())
    }
}

/// Replays the construction of `fm` (which must come from `build_full` on
/// the blowup's base) on vertex copies, producing a maximal matching that
/// covers exactly the copies of vertices outside the planted independent set.
pub fn discretize_matching(
    fm: &FractionalMatching,
    blowup: &BlowupGraph<'_>,
    planted: &Planted,
) -> Result<CopyMatching> {
    let base = blowup.base;
    let nb = base.num_vertices();
    let mut alloc = Allocator {
        next: vec![0; nb],
        edges: Vec::new(),
    };
    if fm.components().is_empty() && !fm.is_empty() {
        return Err(Error::InvalidParameter(
            "fractional matching carries no construction record".into(),
        ));
    }
    for component in fm.components() {
        match component {
            Component::Pair((u, v)) => {
                let count = blowup.copy_count(*u).min(blowup.copy_count(*v));
                alloc.pair(blowup, *u, *v, count)?;
            }
            Component::Walk {
                edges, incidences, ..
            } => {
                let share = |v: usize| -> Result<usize> {
                    let left = alloc.leftover(blowup, v);
                    if !left.is_multiple_of(*incidences) {
                        return Err(Error::Internal(format!(
                            "leftover {left} at base vertex {v} not divisible by {incidences}"
                        )));
                    }
                    Ok(left / incidences)
                };
                let mut per_edge = None;
                for &(u, v) in edges {
                    for w in [u, v] {
                        let s = share(w)?;
                        if *per_edge.get_or_insert(s) != s {
                            return Err(Error::Internal(format!(
                                "leftover mismatch along walk at base vertex {w}"
                            )));
                        }
                    }
                }
                let count = per_edge.unwrap_or(0);
                for &(u, v) in edges {
                    alloc.pair(blowup, u, v, count)?;
                }
            }
            Component::Uniform { .. } => {
                return Err(Error::InvalidParameter(
                    "uniform layer spreading has no integral replay; use Kneser cycles".into(),
                ))
            }
            Component::Flow { vertices, .. } => {
                let mut half = Vec::with_capacity(vertices.len());
                for &v in vertices {
                    let left = alloc.leftover(blowup, v);
                    if !left.is_multiple_of(2) {
                        return Err(Error::Internal(format!(
                            "odd leftover {left} at base vertex {v}"
                        )));
                    }
                    half.push(i64::try_from(left / 2).map_err(|_| {
                        Error::CapExceeded(format!("leftover {left} too large"))
                    })?);
                }
                let mut local = Vec::new();
                for i in 0..vertices.len() {
                    for j in i + 1..vertices.len() {
                        if base.graph().has_edge(vertices[i], vertices[j]) {
                            local.push((i, j));
                        }
                    }
                }
                let y = symmetric_b_matching(&half, &local).ok_or_else(|| {
                    Error::Internal(
                        "rounded empty-set leftovers admit no integral b-matching".into(),
                    )
                })?;
                for (&(i, j), count) in local.iter().zip(y) {
                    let count = count.to_usize().expect("flow is nonnegative");
                    alloc.pair(blowup, vertices[i], vertices[j], count)?;
                }
            }
        }
    }

    let is = independent_set(base, planted)?;
    for v in 0..nb {
        let expected = if is.contains(v) { 0 } else { blowup.copy_count(v) };
        if alloc.next[v] != expected {
            return Err(Error::Internal(format!(
                "leftover mismatch: base vertex {} has {} of {} copies matched, expected {expected}",
                base.label(v),
                alloc.next[v],
                blowup.copy_count(v)
            )));
        }
    }
    let matching = Matching::new(alloc.edges);
    if let Maximality::Extendable(e) = blowup.verify_maximal(&matching)? {
        return Err(Error::Internal(format!("discretized matching extendable by {e:?}")));
    }
    let base_edges = matching
        .edges()
        .iter()
        .map(|&(a, b)| normalize(blowup.project(a).base, blowup.project(b).base))
        .collect::<Vec<_>>();
    if let Some(&(u, v)) = base_edges.iter().find(|&&(u, v)| fm.value(u, v).is_zero()) {
        return Err(Error::Internal(format!(
            "copy pair projects to unsupported base edge ({u}, {v})"
        )));
    }
    Ok(CopyMatching {
        matching,
        base_edges,
    })
}

/// A vertex cover in which every member has a neighbour inside the set.
pub fn total_vertex_cover_check(graph: &Graph, set: &[usize]) -> bool {
    if set.iter().any(|&v| v >= graph.num_vertices()) {
        return false;
    }
    let in_set = mask(graph.num_vertices(), set);
    crate::graph::verify_vertex_cover(graph, set).is_ok()
        && set
            .iter()
            .all(|&v| graph.neighbors(v).iter().any(|&w| in_set[w]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fracmatch::{build_full, build_full_with, BuildOptions, F1Strategy};
    use crate::gadget::{build_gadget, cover_complement, Flavor};
    use crate::rational::rat;
    use crate::ulc::{generate_yes, Topology, UlcInstance, YesParams};

    fn instance(num_vars: usize, num_colors: usize, xi: Rational, seed: u64) -> UlcInstance {
        generate_yes(&YesParams {
            num_vars,
            num_colors,
            xi,
            topology: Topology::Cycle,
            seed,
        })
        .unwrap()
    }

    fn setup_a() -> (GadgetGraph, Planted) {
        let inst = instance(3, 2, rat(0, 1), 1);
        let g = build_gadget(&inst, &rat(1, 4), Flavor::Extended).unwrap();
        (g, inst.planted().unwrap().clone())
    }

    #[test]
    fn copy_counts_by_hand() {
        let (g, _) = setup_a();
        assert_eq!(g.num_vertices(), 12);
        let b = blow_up(&g, &rat(1, 2)).unwrap();
        assert_eq!(b.n(), 24);
        // μ(0) = 3/16 → round(4.5) = 5; μ(2) = 1/48 → round(0.5) = 1.
        assert_eq!(b.copy_count(g.vertex(0, 0)), 20);
        assert_eq!(b.copy_count(g.vertex(0, 0b11)), 4);
        assert_eq!(b.copy_count(g.vertex(0, 0b01)), 8);
        for v in 0..g.num_vertices() {
            assert_eq!(b.copy_count(v) % 4, 0);
        }
        assert_eq!(b.num_vertices(), 3 * (20 + 8 + 8 + 4));
    }

    #[test]
    fn integral_scaling_has_no_drift() {
        let (g, _) = setup_a();
        // n = 48: 48·w(v) ∈ {9, 3, 1}.
        let b = blow_up(&g, &rat(1, 4)).unwrap();
        assert_eq!(b.num_vertices(), 4 * 48);
    }

    #[test]
    fn projection_and_adjacency() {
        let (g, _) = setup_a();
        let b = blow_up(&g, &rat(1, 2)).unwrap();
        let graph = b.to_graph().unwrap();
        assert_eq!(graph.num_edges(), b.num_edges());
        for a in 0..b.num_vertices() {
            let c = b.project(a);
            assert_eq!(b.id(c.base, c.index), a);
        }
        for (x, y) in graph.edges().take(200) {
            assert!(g.graph().has_edge(b.project(x).base, b.project(y).base));
        }
        assert!(blow_up_with_cap(&g, &rat(1, 2), 10).is_err());
        assert!(blow_up(&g, &rat(0, 1)).is_err());
        assert!(blow_up(&g, &rat(5, 1)).is_err());
    }

    #[test]
    fn product_covers() {
        let (g, planted) = setup_a();
        let b = blow_up(&g, &rat(1, 2)).unwrap();
        let is = independent_set(&g, &planted).unwrap();
        let cover = product_cover(&b, &cover_complement(&g, &is)).unwrap();
        assert_eq!(b.verify_cover(&cover), Ok(()));
        assert_eq!(crate::graph::verify_vertex_cover(&b.to_graph().unwrap(), &cover), Ok(()));
        assert!(matches!(is_product_cover(&b, &cover), ProductVerdict::Product(_)));
        assert!(product_cover(&b, &[]).is_err());

        let mut mixed = cover.clone();
        mixed.retain(|&c| c != b.id(g.vertex(0, 0), 0));
        assert_eq!(is_product_cover(&b, &mixed), ProductVerdict::Mixed { base: g.vertex(0, 0) });
    }

    #[test]
    fn minimalize_examples() {
        let triangle = Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(minimalize_cover(&triangle, &[0, 1, 2]).unwrap().len(), 2);
        let star = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(minimalize_cover(&star, &[0, 1, 2, 3]).unwrap(), vec![0]);
        assert_eq!(minimalize_cover(&star, &[1, 2, 3]).unwrap(), vec![1, 2, 3]);
        assert!(minimalize_cover(&star, &[1]).is_err());
    }

    #[test]
    fn minimal_covers_of_blowups_are_product() {
        let (g, planted) = setup_a();
        let b = blow_up(&g, &rat(1, 1)).unwrap();
        let graph = b.to_graph().unwrap();
        let fm = build_full(&g, &planted).unwrap();
        let cm = discretize_matching(&fm, &b, &planted).unwrap();
        let minimal = minimalize_cover(&graph, &cm.matching.matched_vertices()).unwrap();
        assert!(matches!(is_product_cover(&b, &minimal), ProductVerdict::Product(_)));
    }

    #[test]
    fn discretized_matching_setup_a() {
        let (g, planted) = setup_a();
        let is = independent_set(&g, &planted).unwrap();
        for rho in [rat(1, 1), rat(1, 2), rat(1, 4)] {
            let b = blow_up(&g, &rho).unwrap();
            let fm = build_full(&g, &planted).unwrap();
            let cm = discretize_matching(&fm, &b, &planted).unwrap();
            let is_copies: usize = is.vertices.iter().map(|&v| b.copy_count(v)).sum();
            assert_eq!(2 * cm.len(), b.num_vertices() - is_copies);
            assert_eq!(b.verify_maximal(&cm.matching).unwrap(), Maximality::Maximal);
            let graph = b.to_graph().unwrap();
            assert!(total_vertex_cover_check(&graph, &cm.matching.matched_vertices()));
            // 2|M| < |V|·(1/2 + 2ε + ρ) with ε = 1/4.
            let bound = from_usize(b.num_vertices()) * (rat(1, 2) + rat(1, 2) + &rho);
            assert!(from_usize(2 * cm.len()) < bound);
        }
    }

    #[test]
    fn discretize_three_colors_with_singleton_class() {
        let inst = instance(4, 3, rat(1, 4), 2);
        let g = build_gadget(&inst, &rat(1, 4), Flavor::Extended).unwrap();
        let planted = inst.planted().unwrap().clone();
        let fm = build_full(&g, &planted).unwrap();
        let b = blow_up(&g, &rat(1, 1)).unwrap();
        let cm = discretize_matching(&fm, &b, &planted).unwrap();
        assert_eq!(b.verify_maximal(&cm.matching).unwrap(), Maximality::Maximal);
    }

    #[test]
    fn uniform_spreading_is_not_discretized() {
        let inst = instance(3, 4, rat(0, 1), 4);
        let g = build_gadget(&inst, &rat(1, 8), Flavor::Extended).unwrap();
        let planted = inst.planted().unwrap().clone();
        let fm = build_full_with(
            &g,
            &planted,
            BuildOptions {
                f1: F1Strategy::Uniform,
                ..Default::default()
            },
        )
        .unwrap();
        let b = blow_up(&g, &rat(1, 1)).unwrap();
        assert!(discretize_matching(&fm, &b, &planted).is_err());
    }

    #[test]
    fn total_vertex_cover_examples() {
        let star = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        assert!(!total_vertex_cover_check(&star, &[0]));
        assert!(total_vertex_cover_check(&star, &[0, 1]));
        assert!(!total_vertex_cover_check(&star, &[1, 2]));
    }
}
