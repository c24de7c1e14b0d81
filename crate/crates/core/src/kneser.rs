//! Bipartite Kneser graphs and Hamiltonian cycle search.
//!
//! Cycles are found by backtracking with least-remaining-degree-first
//! branching, then checked by [`HamCycle::validate`], which shares no code
//! with the search.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::ulc::{ColorSet, MAX_COLORS};

/// Default node budget for a single cycle search.
pub const DEFAULT_SEARCH_BUDGET: u64 = 100_000_000;

/// Upper bound on the number of `k`-subsets per side.
pub const MAX_SIDE: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// `B^k` over ground set `0..n`: vertex `i` is `S_i^L`, vertex `C + i` is
/// `S_i^R`, with `S_i` the `i`-th `k`-subset in increasing mask order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteKneser {
    n: usize,
    k: usize,
    sets: Vec<ColorSet>,
    graph: Graph,
}

impl BipartiteKneser {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn side_size(&self) -> usize {
        self.sets.len()
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn sets(&self) -> &[ColorSet] {
        &self.sets
    }

    pub fn set_of(&self, vertex: usize) -> (ColorSet, Side) {
        let c = self.sets.len();
        if vertex < c {
            (self.sets[vertex], Side::Left)
        } else {
            (self.sets[vertex - c], Side::Right)
        }
    }
}

/// All `k`-subsets of `0..n` as masks, in increasing order.
pub fn k_subsets(n: usize, k: usize) -> Vec<ColorSet> {
    if k == 0 {
        return vec![0];
    }
    if k > n {
        return Vec::new();
    }
    let mut out = Vec::new();
    let limit: u64 = 1 << n;
    let mut s: u64 = (1 << k) - 1;
    while s < limit {
        out.push(s as ColorSet);
        // Gosper's hack: next larger integer with the same popcount.
        let c = s & s.wrapping_neg();
        let r = s + c;
        s = (((r ^ s) >> 2) / c) | r;
    }
    out
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

pub fn build_bipartite_kneser(n: usize, k: usize) -> Result<BipartiteKneser> {
    if k == 0 || 2 * k >= n {
        return Err(Error::InvalidParameter(format!(
            "bipartite Kneser graph needs 1 <= k and 2k < n, got n = {n}, k = {k}"
        )));
    }
    if n > MAX_COLORS || binomial(n, k) > MAX_SIDE {
        return Err(Error::CapExceeded(format!("B^{k} over {n} elements")));
    }
    let sets = k_subsets(n, k);
    let c = sets.len();
    let mut adj = vec![Vec::new(); 2 * c];
    for (i, &a) in sets.iter().enumerate() {
        for (j, &b) in sets.iter().enumerate() {
            if a & b == 0 {
                adj[i].push(c + j);
                adj[c + j].push(i);
            }
        }
    }
    Ok(BipartiteKneser {
        n,
        k,
        sets,
        graph: Graph::from_adjacency(adj),
    })
}

/// Cyclic vertex sequence; the closing edge is implicit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HamCycle(pub Vec<usize>);

impl HamCycle {
    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Consecutive pairs including the closing pair.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.0.len();
        (0..n).map(move |i| (self.0[i], self.0[(i + 1) % n]))
    }

    /// Checks the sequence is a permutation of `0..n` with every consecutive
    /// pair, and the closing pair, adjacent.
    pub fn validate(&self, graph: &Graph) -> Result<()> {
        let n = graph.num_vertices();
        if self.0.len() != n || n < 3 {
            return Err(Error::NoHamiltonianCycle(format!(
                "cycle has {} vertices, graph has {n}",
                self.0.len()
            )));
        }
        let mut seen = vec![false; n];
        for &v in &self.0 {
            if v >= n || std::mem::replace(&mut seen[v], true) {
                return Err(Error::NoHamiltonianCycle(format!("vertex {v} repeated or out of range")));
            }
        }
        for (a, b) in self.edges() {
            if !graph.has_edge(a, b) {
                return Err(Error::NoHamiltonianCycle(format!("({a}, {b}) is not an edge")));
            }
        }
        Ok(())
    }
}

fn cache() -> &'static Mutex<HashMap<(usize, usize), HamCycle>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), HamCycle>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Hamiltonian cycle of `B^k`, memoized per `(n, k)`.
pub fn hamiltonian_cycle(kneser: &BipartiteKneser) -> Result<HamCycle> {
    hamiltonian_cycle_with_budget(kneser, DEFAULT_SEARCH_BUDGET)
}

pub fn hamiltonian_cycle_with_budget(kneser: &BipartiteKneser, budget: u64) -> Result<HamCycle> {
    let key = (kneser.n, kneser.k);
    if let Some(hit) = cache().lock().expect("cycle cache").get(&key) {
        return Ok(hit.clone());
    }
    let cycle = search(&kneser.graph, budget)
        .map_err(|e| match e {
            Error::BudgetExhausted { budget, .. } => Error::BudgetExhausted {
                budget,
                context: format!("Hamiltonian cycle of B^{} over n = {}", kneser.k, kneser.n),
            },
            other => other,
        })?
        .ok_or_else(|| {
            Error::Internal(format!(
                "no Hamiltonian cycle found in B^{} over n = {} although one exists",
                kneser.k, kneser.n
            ))
        })?;
    cycle.validate(&kneser.graph)?;
    // Searches are deterministic, so concurrent inserts store equal values.
    cache().lock().expect("cycle cache").insert(key, cycle.clone());
    Ok(cycle)
}

/// Hamiltonian cycle of the subgraph induced by `vertices` under the
/// adjacency oracle. The returned cycle uses the caller's vertex labels.
pub fn cycle_in_subgraph(
    vertices: &[usize],
    adjacent: impl Fn(usize, usize) -> bool,
) -> Result<HamCycle> {
    cycle_in_subgraph_with_budget(vertices, adjacent, DEFAULT_SEARCH_BUDGET)
}

pub fn cycle_in_subgraph_with_budget(
    vertices: &[usize],
    adjacent: impl Fn(usize, usize) -> bool,
    budget: u64,
) -> Result<HamCycle> {
    if vertices.len() < 3 {
        return Err(Error::NoHamiltonianCycle(format!(
            "{} vertices cannot carry a cycle",
            vertices.len()
        )));
    }
    let mut edges = Vec::new();
    for i in 0..vertices.len() {
        for j in i + 1..vertices.len() {
            if adjacent(vertices[i], vertices[j]) {
                edges.push((i, j));
            }
        }
    }
    let local = Graph::from_edges(vertices.len(), edges)?;
    let cycle = search(&local, budget)?
        .ok_or_else(|| Error::NoHamiltonianCycle("induced subgraph is not Hamiltonian".into()))?;
    cycle.validate(&local)?;
    Ok(HamCycle(cycle.0.into_iter().map(|i| vertices[i]).collect()))
}

struct Frame {
    vertex: usize,
    candidates: Vec<usize>,
    next: usize,
}

/// Backtracking with restarts. Attempt `i` gets `RESTART_BASE·2^i`
/// expansions and breaks ties among equal-degree candidates by a fixed
/// pseudo-random rank (attempt 0 uses plain vertex order). The final attempt
/// receives whatever budget is left and runs to exhaustion, so `Ok(None)`
/// still means the graph has no Hamiltonian cycle.
fn search(graph: &Graph, budget: u64) -> Result<Option<HamCycle>> {
    let n = graph.num_vertices();
    if n < 3 || (0..n).any(|v| graph.degree(v) < 2) {
        return Ok(None);
    }
    let mut spent = 0u64;
    let mut attempt = 0u32;
    loop {
        let rank = tie_break_rank(n, attempt);
        let slice = RESTART_BASE.saturating_mul(1 << attempt.min(40));
        let last = spent.saturating_add(slice) >= budget / 2;
        let allowance = if last { budget - spent } else { slice };
        match search_once(graph, allowance, &rank) {
            // A completed attempt is exhaustive whatever the order.
            Ok(found) => return Ok(found),
            Err(Error::BudgetExhausted { .. }) if !last => {
                spent += allowance;
                attempt += 1;
            }
            Err(Error::BudgetExhausted { .. }) => {
                return Err(Error::BudgetExhausted {
                    budget,
                    context: format!("Hamiltonian cycle search on {n} vertices"),
                })
            }
            Err(e) => return Err(e),
        }
    }
}

const RESTART_BASE: u64 = 20_000;

fn tie_break_rank(n: usize, attempt: u32) -> Vec<usize> {
    let mut rank: Vec<usize> = (0..n).collect();
    if attempt > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(u64::from(attempt));
        rank.shuffle(&mut rng);
    }
    rank
}

/// One backtracking run from vertex 0.
fn search_once(graph: &Graph, budget: u64, rank: &[usize]) -> Result<Option<HamCycle>> {
    let n = graph.num_vertices();
    let start = 0;
    let mut visited = vec![false; n];
    let mut remaining: Vec<usize> = (0..n).map(|v| graph.degree(v)).collect();
    let mut path = Vec::with_capacity(n);
    let mut stack: Vec<Frame> = Vec::new();
    let mut expansions = 0u64;

    let visit = |v: usize, visited: &mut Vec<bool>, remaining: &mut Vec<usize>| {
        visited[v] = true;
        for &w in graph.neighbors(v) {
            remaining[w] -= 1;
        }
    };
    let unvisit = |v: usize, visited: &mut Vec<bool>, remaining: &mut Vec<usize>| {
        visited[v] = false;
        for &w in graph.neighbors(v) {
            remaining[w] += 1;
        }
    };

    let adj_start: Vec<bool> = (0..n).map(|w| graph.has_edge(w, start)).collect();
    let mut scratch = Scratch::new(n);

    visit(start, &mut visited, &mut remaining);
    path.push(start);
    stack.push(Frame {
        vertex: start,
        candidates: order_candidates(graph, start, &visited, &remaining, rank),
        next: 0,
    });

    while let Some(frame) = stack.last_mut() {
        if path.len() == n {
            if graph.has_edge(frame.vertex, start) {
                return Ok(Some(HamCycle(path)));
            }
        } else if frame.next < frame.candidates.len() {
            let v = frame.candidates[frame.next];
            frame.next += 1;
            expansions += 1;
            if expansions > budget {
                return Err(Error::BudgetExhausted {
                    budget,
                    context: format!("Hamiltonian cycle search on {n} vertices"),
                });
            }
            visit(v, &mut visited, &mut remaining);
            path.push(v);
            let plan = if path.len() == n {
                graph.has_edge(v, start).then(Vec::new)
            } else {
                plan_moves(graph, v, &adj_start, &visited, &remaining, rank, &mut scratch)
            };
            match plan {
                Some(candidates) => stack.push(Frame {
                    vertex: v,
                    candidates,
                    next: 0,
                }),
                None => {
                    path.pop();
                    unvisit(v, &mut visited, &mut remaining);
                }
            }
            continue;
        }
        // Exhausted or dead end: backtrack.
        let frame = stack.pop().expect("nonempty");
        if frame.vertex != start {
            path.pop();
            unvisit(frame.vertex, &mut visited, &mut remaining);
        }
    }
    Ok(None)
}

fn order_candidates(
    graph: &Graph,
    v: usize,
    visited: &[bool],
    remaining: &[usize],
    rank: &[usize],
) -> Vec<usize> {
    let mut c: Vec<usize> = graph
        .neighbors(v)
        .iter()
        .copied()
        .filter(|&w| !visited[w])
        .collect();
    c.sort_by_key(|&w| (remaining[w], rank[w]));
    c
}

struct Scratch {
    near_end: Vec<bool>,
    seen: Vec<bool>,
    queue: Vec<usize>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Scratch {
            near_end: vec![false; n],
            seen: vec![false; n],
            queue: Vec::with_capacity(n),
        }
    }
}

/// Necessary conditions for closing the cycle once the path ends at `v`,
/// and the candidate moves that survive them.
///
/// The unvisited vertices must form one contiguous stretch of the final
/// cycle between `v` and the start, so they induce a connected subgraph and
/// each needs two usable neighbors among the unvisited vertices, `v`, and
/// the start. A vertex whose only spare neighbor is `v` must come next.
fn plan_moves(
    graph: &Graph,
    v: usize,
    adj_start: &[bool],
    visited: &[bool],
    remaining: &[usize],
    rank: &[usize],
    scratch: &mut Scratch,
) -> Option<Vec<usize>> {
    let n = graph.num_vertices();
    for &w in graph.neighbors(v) {
        scratch.near_end[w] = true;
    }
    let mut forced_next = None;
    let mut forced_last = 0;
    let mut unvisited = 0;
    let mut first_unvisited = None;
    let mut ok = true;
    for w in 0..n {
        if visited[w] {
            continue;
        }
        unvisited += 1;
        first_unvisited.get_or_insert(w);
        let near_end = scratch.near_end[w];
        match (remaining[w], near_end, adj_start[w]) {
            // Isolated among the unvisited: only the final vertex, joined to both ends.
            (0, true, true) => {}
            (0, _, _) => {
                ok = false;
                break;
            }
            (1, false, false) => {
                ok = false;
                break;
            }
            (1, true, false) => {
                if forced_next.replace(w).is_some() {
                    ok = false;
                    break;
                }
            }
            (1, false, true) => forced_last += 1,
            _ => {}
        }
    }
    for &w in graph.neighbors(v) {
        scratch.near_end[w] = false;
    }
    if !ok || forced_last > 1 && unvisited > 1 {
        return None;
    }
    if let Some(root) = first_unvisited {
        scratch.queue.clear();
        scratch.queue.push(root);
        scratch.seen[root] = true;
        let mut head = 0;
        while head < scratch.queue.len() {
            let u = scratch.queue[head];
            head += 1;
            for &w in graph.neighbors(u) {
                if !visited[w] && !scratch.seen[w] {
                    scratch.seen[w] = true;
                    scratch.queue.push(w);
                }
            }
        }
        let reached = scratch.queue.len();
        for &u in &scratch.queue {
            scratch.seen[u] = false;
        }
        if reached != unvisited {
            return None;
        }
    }
    Some(match forced_next {
        Some(w) => vec![w],
        None => order_candidates(graph, v, visited, remaining, rank),
    })
}

/// Number of cycle-edge incidences per underlying set (both sides pooled).
pub fn set_incidences(kneser: &BipartiteKneser, cycle: &HamCycle) -> HashMap<ColorSet, usize> {
    let mut counts = HashMap::new();
    for (a, b) in cycle.edges() {
        for v in [a, b] {
            *counts.entry(kneser.set_of(v).0).or_insert(0) += 1;
        }
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kneser_sizes() {
        let b = build_bipartite_kneser(3, 1).unwrap();
        assert_eq!(b.graph().num_vertices(), 6);
        assert_eq!(b.graph().num_edges(), 6);
        let b = build_bipartite_kneser(4, 1).unwrap();
        assert_eq!(b.graph().num_vertices(), 8);
        assert!((0..8).all(|v| b.graph().degree(v) == 3));
        let b = build_bipartite_kneser(5, 2).unwrap();
        assert_eq!(b.graph().num_vertices(), 20);
        assert!((0..20).all(|v| b.graph().degree(v) == 3));
        assert!(build_bipartite_kneser(4, 2).is_err());
        assert!(build_bipartite_kneser(4, 0).is_err());
    }

    #[test]
    fn subsets_in_mask_order() {
        assert_eq!(k_subsets(4, 2), vec![0b0011, 0b0101, 0b0110, 0b1001, 0b1010, 0b1100]);
        assert_eq!(binomial(6, 2), 15);
    }

    #[test]
    fn smallest_cycle_is_the_hand_checked_one() {
        let b = build_bipartite_kneser(3, 1).unwrap();
        let c = hamiltonian_cycle(&b).unwrap();
        // {0}^L {1}^R {2}^L {0}^R {1}^L {2}^R
        assert_eq!(c.vertices(), &[0, 4, 2, 3, 1, 5]);
    }

    #[test]
    fn cycles_validate_and_hit_each_set_four_times() {
        for (n, k) in [(4, 1), (5, 1), (5, 2), (6, 2), (7, 3), (8, 3), (9, 4)] {
            let b = build_bipartite_kneser(n, k).unwrap();
            let c = hamiltonian_cycle(&b).unwrap();
            assert_eq!(c.len(), 2 * binomial(n, k));
            c.validate(b.graph()).unwrap();
            let counts = set_incidences(&b, &c);
            assert_eq!(counts.len(), binomial(n, k));
            assert!(counts.values().all(|&x| x == 4));
        }
    }

    #[test]
    fn validator_rejects_bad_cycles() {
        let b = build_bipartite_kneser(3, 1).unwrap();
        assert!(HamCycle(vec![0, 4, 2, 3, 5, 1]).validate(b.graph()).is_err());
        assert!(HamCycle(vec![0, 4, 2, 3, 1]).validate(b.graph()).is_err());
        assert!(HamCycle(vec![0, 4, 2, 3, 1, 1]).validate(b.graph()).is_err());
    }

    #[test]
    fn subgraph_cycles() {
        let tri = cycle_in_subgraph(&[10, 20, 30], |_, _| true).unwrap();
        assert_eq!(tri.len(), 3);
        let ring = |a: usize, b: usize| (a + 1) % 4 == b || (b + 1) % 4 == a;
        let c4 = cycle_in_subgraph(&[0, 1, 2, 3], ring).unwrap();
        assert_eq!(c4.vertices(), &[0, 1, 2, 3]);
        let path = |a: usize, b: usize| a.abs_diff(b) == 1;
        let err = cycle_in_subgraph(&[0, 1, 2], path).unwrap_err();
        assert!(matches!(err, Error::NoHamiltonianCycle(_)));
    }

    #[test]
    fn budget_is_enforced() {
        // Petersen graph is not Hamiltonian; a tiny budget trips first.
        let outer = (0..5).map(|i| (i, (i + 1) % 5));
        let spokes = (0..5).map(|i| (i, i + 5));
        let inner = (0..5).map(|i| (5 + i, 5 + (i + 2) % 5));
        let petersen = Graph::from_edges(10, outer.chain(spokes).chain(inner)).unwrap();
        assert!(matches!(search(&petersen, 3), Err(Error::BudgetExhausted { .. })));
        assert_eq!(search(&petersen, DEFAULT_SEARCH_BUDGET).unwrap(), None);
    }
}
