//! Bipartite double covers with their matching structure, and the
//! complement-and-pad biclique gadget.

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{mask, members, verify_maximal_matching, verify_vertex_cover, Edge, Graph, Matching, Maximality};
use crate::rational::{from_usize, rat, to_usize, Rational};

/// Bipartite double cover: `v^l = v`, `v^r = n + v`, edges `u^l ~ v^r` for
/// every base edge `uv`, in both orientations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bipartisation {
    base: Graph,
    graph: Graph,
}

impl Bipartisation {
    pub fn base(&self) -> &Graph {
        &self.base
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn base_size(&self) -> usize {
        self.base.num_vertices()
    }

    pub fn left(&self, v: usize) -> usize {
        v
    }

    pub fn right(&self, v: usize) -> usize {
        self.base_size() + v
    }

    /// `(base vertex, is_left)`.
    pub fn split(&self, id: usize) -> (usize, bool) {
        let n = self.base_size();
        if id < n {
            (id, true)
        } else {
            (id - n, false)
        }
    }
}

pub fn bipartise(graph: &Graph) -> Bipartisation {
    let n = graph.num_vertices();
    let mut adj = vec![Vec::new(); 2 * n];
    for (u, v) in graph.edges() {
        for (a, b) in [(u, v), (v, u)] {
            adj[a].push(n + b);
            adj[n + b].push(a);
        }
    }
    Bipartisation {
        base: graph.clone(),
        graph: Graph::from_adjacency(adj),
    }
}

/// `{u^l v^r, v^l u^r : uv ∈ M}`; verified maximal whenever `M` is.
pub fn double_matching(bip: &Bipartisation, base_matching: &Matching) -> Result<Matching> {
    base_matching.validate(&bip.base)?;
    let doubled = Matching::new(
        base_matching
            .edges()
            .iter()
            .flat_map(|&(u, v)| [(bip.left(u), bip.right(v)), (bip.left(v), bip.right(u))]),
    );
    doubled.validate(&bip.graph)?;
    if verify_maximal_matching(&bip.base, base_matching)?.is_maximal() {
        if let Maximality::Extendable(e) = verify_maximal_matching(&bip.graph, &doubled)? {
            return Err(Error::Internal(format!("doubled matching extendable by {e:?}")));
        }
    }
    Ok(doubled)
}

/// Directed paths and cycles over base vertices; matching edge
/// `(u^l, v^r)` is the arc `u → v`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PathCycleDecomposition {
    /// Vertex sequences; a path with `k` arcs lists `k + 1` vertices.
    pub paths: Vec<Vec<usize>>,
    /// Vertex sequences starting at the smallest member; the closing arc is implicit.
    pub cycles: Vec<Vec<usize>>,
}

impl PathCycleDecomposition {
    pub fn num_arcs(&self) -> usize {
        self.paths.iter().map(|p| p.len() - 1).sum::<usize>() + self.cycles.iter().map(Vec::len).sum::<usize>()
    }

    pub fn arcs(&self) -> Vec<(usize, usize)> {
        let mut arcs = Vec::with_capacity(self.num_arcs());
        for p in &self.paths {
            arcs.extend(p.windows(2).map(|w| (w[0], w[1])));
        }
        for c in &self.cycles {
            arcs.extend((0..c.len()).map(|i| (c[i], c[(i + 1) % c.len()])));
        }
        arcs
    }

    /// Shortest path length in arcs, if any path exists.
    pub fn shortest_path(&self) -> Option<usize> {
        self.paths.iter().map(|p| p.len() - 1).min()
    }
}

pub fn decompose(bip: &Bipartisation, matching: &Matching) -> Result<PathCycleDecomposition> {
    matching.validate(&bip.graph)?;
    let n = bip.base_size();
    let mut succ = vec![usize::MAX; n];
    let mut has_pred = vec![false; n];
    for &(a, b) in matching.edges() {
        // Normalized edges put the left copy first.
        let (u, _) = bip.split(a);
        let (v, _) = bip.split(b);
        succ[u] = v;
        has_pred[v] = true;
    }
    let mut seen = vec![false; n];
    let mut paths = Vec::new();
    for start in 0..n {
        if has_pred[start] || succ[start] == usize::MAX {
            continue;
        }
        let mut path = vec![start];
        seen[start] = true;
        let mut v = start;
        while succ[v] != usize::MAX {
            v = succ[v];
            seen[v] = true;
            path.push(v);
        }
        paths.push(path);
    }
    let mut cycles = Vec::new();
    for start in 0..n {
        if seen[start] || succ[start] == usize::MAX {
            continue;
        }
        let mut cycle = vec![start];
        seen[start] = true;
        let mut v = succ[start];
        while v != start {
            seen[v] = true;
            cycle.push(v);
            v = succ[v];
        }
        cycles.push(cycle);
    }
    let mut decomposition = PathCycleDecomposition { paths, cycles };
    decomposition.paths.sort_by_key(|p| *p.iter().min().expect("nonempty path"));
    Ok(decomposition)
}

/// Every vertex met by the decomposition; a cover of the base when the
/// matching was maximal.
pub fn cover_from_decomposition(bip: &Bipartisation, decomposition: &PathCycleDecomposition) -> Result<Vec<usize>> {
    let mut cover: Vec<usize> = decomposition
        .paths
        .iter()
        .chain(&decomposition.cycles)
        .flatten()
        .copied()
        .collect();
    cover.sort_unstable();
    cover.dedup();
    verify_vertex_cover(&bip.base, &cover).map_err(|(u, v)| Error::NotACover(u, v))?;
    Ok(cover)
}

/// A balanced bipartite graph with sides `A = 0..n` and `B = n..2n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BalancedBipartite {
    side: usize,
    graph: Graph,
}

impl BalancedBipartite {
    /// Edges are `(a, b)` with `a, b ∈ 0..side` indexing `A` and `B`.
    pub fn new(side: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut list = Vec::new();
        for (a, b) in edges {
            if a >= side || b >= side {
                return Err(Error::InvalidParameter(format!(
                    "edge ({a}, {b}) outside sides of size {side}"
                )));
            }
            list.push((a, side + b));
        }
        Ok(BalancedBipartite {
            side,
            graph: Graph::from_edges(2 * side, list)?,
        })
    }

    /// Checks that `graph` only joins `0..side` to `side..2·side`.
    pub fn from_graph(side: usize, graph: Graph) -> Result<Self> {
        if graph.num_vertices() != 2 * side {
            return Err(Error::InvalidParameter(format!(
                "{} vertices do not form two sides of {side}",
                graph.num_vertices()
            )));
        }
        if let Some((u, v)) = graph.edges().find(|&(u, v)| (u < side) == (v < side)) {
            return Err(Error::InvalidParameter(format!("edge ({u}, {v}) inside one side")));
        }
        Ok(BalancedBipartite { side, graph })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.graph.has_edge(a, self.side + b)
    }

    pub fn left(&self) -> Vec<usize> {
        (0..self.side).collect()
    }

    pub fn right(&self) -> Vec<usize> {
        (self.side..2 * self.side).collect()
    }

    /// Whether every `K_A × K_B` pair is an edge (indices into the sides).
    pub fn is_biclique(&self, k_a: &[usize], k_b: &[usize]) -> bool {
        k_a.iter().all(|&a| a < self.side && k_b.iter().all(|&b| b < self.side && self.has_edge(a, b)))
    }
}

/// Random balanced bipartite graph (each pair with probability `num/den`)
/// containing a planted `K_{k,k}`. Returns the graph with `K_A` and `K_B`
/// as sorted side indices.
pub fn planted_biclique_input(
    side: usize,
    k: usize,
    num: u64,
    den: u64,
    seed: u64,
) -> Result<(BalancedBipartite, Vec<usize>, Vec<usize>)> {
    if k > side || den == 0 || num > den {
        return Err(Error::InvalidParameter(format!(
            "biclique {k} in side {side} with probability {num}/{den}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pick = || {
        let mut order: Vec<usize> = (0..side).collect();
        order.shuffle(&mut rng);
        let mut chosen = order[..k].to_vec();
        chosen.sort_unstable();
        chosen
    };
    let k_a = pick();
    let k_b = pick();
    let in_a = mask(side, &k_a);
    let in_b = mask(side, &k_b);
    let mut edges = Vec::new();
    for (a, &planted_a) in in_a.iter().enumerate() {
        for (b, &planted_b) in in_b.iter().enumerate() {
            let coin = rng.gen_range(0..den) < num;
            if coin || (planted_a && planted_b) {
                edges.push((a, b));
            }
        }
    }
    Ok((BalancedBipartite::new(side, edges)?, k_a, k_b))
}

/// `G′`: complement of `G` on `A × B`, plus pads `A′`, `B′` of size
/// `(1/2 + ε)·n` joined to the whole opposite side. Layout: `A = 0..n`,
/// `A′ = n..s`, `B = s..s+n`, `B′ = s+n..2s` with `s = n + pad`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SsehGadget {
    input: BalancedBipartite,
    epsilon: Rational,
    pad: usize,
    graph: Graph,
}

impl SsehGadget {
    pub fn input(&self) -> &BalancedBipartite {
        &self.input
    }

    pub fn epsilon(&self) -> &Rational {
        &self.epsilon
    }

    pub fn n(&self) -> usize {
        self.input.side
    }

    pub fn pad(&self) -> usize {
        self.pad
    }

    /// `(3/2 + ε)·n`.
    pub fn side_size(&self) -> usize {
        self.n() + self.pad
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn a(&self, i: usize) -> usize {
        i
    }

    pub fn a_pad(&self, j: usize) -> usize {
        self.n() + j
    }

    pub fn b(&self, i: usize) -> usize {
        self.side_size() + i
    }

    pub fn b_pad(&self, j: usize) -> usize {
        self.side_size() + self.n() + j
    }

    pub fn left(&self) -> Vec<usize> {
        (0..self.side_size()).collect()
    }

    pub fn right(&self) -> Vec<usize> {
        (self.side_size()..2 * self.side_size()).collect()
    }

    /// Planted biclique size `(1/2 − ε)·n`.
    pub fn planted_size(&self) -> Result<usize> {
        integral(&((rat(1, 2) - &self.epsilon) * from_usize(self.n())), "(1/2 - eps)·n")
    }
}

fn integral(q: &Rational, what: &str) -> Result<usize> {
    if !q.is_integer() {
        return Err(Error::InvalidParameter(format!("{what} = {q} is not an integer")));
    }
    to_usize(&q.to_integer())
}

pub fn sseh_gadget(input: &BalancedBipartite, epsilon: &Rational) -> Result<SsehGadget> {
    if *epsilon <= Rational::zero() || *epsilon >= rat(1, 2) {
        return Err(Error::InvalidParameter(format!("epsilon = {epsilon} outside (0, 1/2)")));
    }
    let n = input.side;
    let pad = integral(&((rat(1, 2) + epsilon) * from_usize(n)), "(1/2 + eps)·n")?;
    let s = n + pad;
    let mut edges = Vec::new();
    for a in 0..s {
        for b in 0..s {
            let keep = if a < n && b < n { !input.has_edge(a, b) } else { true };
            if keep {
                edges.push((a, s + b));
            }
        }
    }
    Ok(SsehGadget {
        input: input.clone(),
        epsilon: epsilon.clone(),
        pad,
        graph: Graph::from_edges(2 * s, edges)?,
    })
}

/// Matches `A∖K_A` to `B′` and `A′` to `B∖K_B`, in index order; the
/// unmatched `K_A ∪ K_B` spans no edge of `G′`.
pub fn sseh_yes_matching(gadget: &SsehGadget, k_a: &[usize], k_b: &[usize]) -> Result<Matching> {
    let k = gadget.planted_size()?;
    if k_a.len() != k || k_b.len() != k {
        return Err(Error::InvalidParameter(format!(
            "planted biclique must have {k} vertices per side, got {} and {}",
            k_a.len(),
            k_b.len()
        )));
    }
    if !gadget.input.is_biclique(k_a, k_b) {
        return Err(Error::InvalidParameter("planted sets do not form a biclique".into()));
    }
    let n = gadget.n();
    let in_a = mask(n, k_a);
    let in_b = mask(n, k_b);
    if members(&in_a).len() != k || members(&in_b).len() != k {
        return Err(Error::InvalidParameter("planted sets repeat a vertex".into()));
    }
    let rest_a = (0..n).filter(|&i| !in_a[i]);
    let rest_b = (0..n).filter(|&i| !in_b[i]);
    let mut edges: Vec<Edge> = rest_a.zip(0..gadget.pad).map(|(i, j)| (gadget.a(i), gadget.b_pad(j))).collect();
    edges.extend((0..gadget.pad).zip(rest_b).map(|(j, i)| (gadget.a_pad(j), gadget.b(i))));
    let matching = Matching::new(edges);
    if let Maximality::Extendable(e) = verify_maximal_matching(&gadget.graph, &matching)? {
        return Err(Error::Internal(format!("yes matching extendable by {e:?}")));
    }
    let matched = matching.matched_mask(gadget.graph.num_vertices());
    let mut unmatched: Vec<usize> = members(&matched.iter().map(|m| !m).collect::<Vec<_>>());
    let mut planted: Vec<usize> = k_a.iter().map(|&i| gadget.a(i)).chain(k_b.iter().map(|&i| gadget.b(i))).collect();
    unmatched.sort_unstable();
    planted.sort_unstable();
    if unmatched != planted {
        return Err(Error::Internal("unmatched set differs from the planted biclique".into()));
    }
    Ok(matching)
}

/// `MMM(G′) ≥ s − (mbb(G) + 1)`: a maximal matching leaves a balanced
/// anti-biclique unmatched, and those live inside `A × B` as bicliques of `G`
/// (up to one stray pad vertex).
pub fn anti_biclique_bound(gadget: &SsehGadget, mbb: usize) -> usize {
    gadget.side_size().saturating_sub(mbb + 1)
}

/// Ratio `|C| / |M|` of a cover built from a decomposition.
pub fn cover_ratio(cover_size: usize, matching_size: usize) -> Rational {
    if matching_size == 0 {
        return if cover_size == 0 { Rational::one() } else { from_usize(cover_size) };
    }
    from_usize(cover_size) / from_usize(matching_size)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> Graph {
        Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn bipartisation_sizes() {
        let e = bipartise(&Graph::from_edges(2, [(0, 1)]).unwrap());
        assert_eq!((e.graph().num_vertices(), e.graph().num_edges()), (4, 2));
        let p = bipartise(&path3());
        assert_eq!((p.graph().num_vertices(), p.graph().num_edges()), (6, 4));
        let t = bipartise(&Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap());
        assert_eq!((t.graph().num_vertices(), t.graph().num_edges()), (6, 6));
        for (a, b) in t.graph().edges() {
            assert_ne!(t.split(a).1, t.split(b).1);
        }
        for v in 0..3 {
            assert_eq!(t.graph().degree(t.left(v)), 2);
            assert_eq!(t.graph().degree(t.right(v)), 2);
        }
    }

    #[test]
    fn doubling_keeps_maximality() {
        let bip = bipartise(&path3());
        let doubled = double_matching(&bip, &Matching::new([(0, 1)])).unwrap();
        assert_eq!(doubled.len(), 2);
        assert!(verify_maximal_matching(bip.graph(), &doubled).unwrap().is_maximal());
        assert!(double_matching(&bip, &Matching::new([(0, 2)])).is_err());
    }

    #[test]
    fn two_cycle_decomposition() {
        let bip = bipartise(&Graph::from_edges(2, [(0, 1)]).unwrap());
        let m = double_matching(&bip, &Matching::new([(0, 1)])).unwrap();
        let d = decompose(&bip, &m).unwrap();
        assert_eq!(d.cycles, vec![vec![0, 1]]);
        assert!(d.paths.is_empty());
        assert_eq!(cover_from_decomposition(&bip, &d).unwrap(), vec![0, 1]);
    }

    #[test]
    fn path_decomposition() {
        let bip = bipartise(&path3());
        let m = Matching::new([(bip.left(0), bip.right(1)), (bip.left(1), bip.right(2))]);
        let d = decompose(&bip, &m).unwrap();
        assert_eq!(d.paths, vec![vec![0, 1, 2]]);
        assert_eq!(d.num_arcs(), 2);
        let cover = cover_from_decomposition(&bip, &d).unwrap();
        assert_eq!(cover, vec![0, 1, 2]);
        assert!(cover_ratio(cover.len(), m.len()) <= rat(3, 2));
    }

    #[test]
    fn sseh_shapes() {
        let g = BalancedBipartite::new(4, [(0, 0)]).unwrap();
        let s = sseh_gadget(&g, &rat(1, 4)).unwrap();
        assert_eq!((s.side_size(), s.pad()), (7, 3));
        assert!(!s.graph().has_edge(s.a(0), s.b(0)));
        assert!(s.graph().has_edge(s.a(0), s.b(1)));
        for j in 0..3 {
            assert_eq!(s.graph().degree(s.a_pad(j)), 7);
            assert_eq!(s.graph().degree(s.b_pad(j)), 7);
        }
        assert!(sseh_gadget(&BalancedBipartite::new(3, []).unwrap(), &rat(1, 4)).is_err());

        let complete = BalancedBipartite::new(3, (0..3).flat_map(|a| (0..3).map(move |b| (a, b)))).unwrap();
        let c = sseh_gadget(&complete, &rat(1, 6)).unwrap();
        assert!(c.graph().edges().all(|(u, v)| u >= 3 || v >= c.b(3)));
        let empty = sseh_gadget(&BalancedBipartite::new(3, []).unwrap(), &rat(1, 6)).unwrap();
        assert_eq!(empty.graph().num_edges(), 25);
    }

    #[test]
    fn sseh_yes_matching_n4() {
        let g = BalancedBipartite::new(4, [(0, 0), (1, 2)]).unwrap();
        let s = sseh_gadget(&g, &rat(1, 4)).unwrap();
        let m = sseh_yes_matching(&s, &[0], &[0]).unwrap();
        assert_eq!(m.len(), 6);
        assert!(sseh_yes_matching(&s, &[0], &[1]).is_err());
        assert!(sseh_yes_matching(&s, &[], &[]).is_err());
        assert_eq!(anti_biclique_bound(&s, 1), 5);
    }

    #[test]
    fn balanced_bipartite_rejects_same_side_edges() {
        let g = Graph::from_edges(4, [(0, 1)]).unwrap();
        assert!(BalancedBipartite::from_graph(2, g).is_err());
    }
}
