//! Exact and greedy oracles on small graphs.
//!
//! The exact searches run on `u64` bitsets, so every graph they accept has
//! at most 64 vertices; the default cap is lower.

use std::ops::Add;

use num_traits::{ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{verify_maximal_matching, verify_vertex_cover, Edge, Graph, Matching, Maximality};
use crate::rational::{from_usize, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    /// Node limit hit; the witness is the best found so far.
    LimitReached,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult<W> {
    pub objective: Rational,
    pub witness: W,
    pub nodes: u64,
    pub status: SolveStatus,
}

impl<W> SolveResult<W> {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverOptions {
    pub node_limit: u64,
    pub max_vertices: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            node_limit: 50_000_000,
            max_vertices: 60,
        }
    }
}

pub const MAX_MBB_SIDE: usize = 20;
pub const MAX_TOTAL_VC_VERTICES: usize = 24;

fn bitsets(graph: &Graph, cap: usize) -> Result<Vec<u64>> {
    let n = graph.num_vertices();
    if n > cap.min(64) {
        return Err(Error::CapExceeded(format!(
            "{n} vertices exceed the exact-solver cap of {}",
            cap.min(64)
        )));
    }
    Ok((0..n)
        .map(|v| graph.neighbors(v).iter().fold(0u64, |m, &w| m | 1 << w))
        .collect())
}

fn bits(mut m: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        (m != 0).then(|| {
            let v = m.trailing_zeros() as usize;
            m &= m - 1;
            v
        })
    })
}

/// Scans edges in a seeded random order, taking every edge whose endpoints
/// are both free.
pub fn greedy_maximal_matching(graph: &Graph, seed: u64) -> Matching {
    let mut edges: Vec<Edge> = graph.edges().collect();
    edges.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    greedy_in_order(graph, &edges)
}

fn greedy_in_order(graph: &Graph, edges: &[Edge]) -> Matching {
    let mut used = vec![false; graph.num_vertices()];
    let mut chosen = Vec::new();
    for &(u, v) in edges {
        if !used[u] && !used[v] {
            used[u] = true;
            used[v] = true;
            chosen.push((u, v));
        }
    }
    Matching::new(chosen)
}

trait Cost: Clone + Ord + Zero + Add<Output = Self> {}
impl<T: Clone + Ord + Zero + Add<Output = T>> Cost for T {}

struct MmmSearch<'a, C> {
    n: usize,
    adj: &'a [u64],
    /// `weight[u·n + v]` for adjacent `u, v`.
    weight: Vec<C>,
    /// `twins_below[w]`: lower-numbered vertices with the same neighbourhood
    /// and weight row as `w`.
    twins_below: Vec<u64>,
    nodes: u64,
    limit: u64,
    best: Option<(C, Vec<Edge>)>,
    /// Proven lower bound on the optimum; reaching it ends the search.
    floor: Option<C>,
    stack: Vec<Edge>,
}

impl<C: Cost> MmmSearch<'_, C> {
    fn w(&self, u: usize, v: usize) -> &C {
        &self.weight[u * self.n + v]
    }

    /// Lower bound on the cost still needed, or `None` when some undominated
    /// edge can no longer be dominated.
    fn bound(&self, matched: u64, forbidden: u64) -> Option<C> {
        let unmatched = !matched & mask_of(self.n);
        let available = unmatched & !forbidden;
        let mut cheapest: Vec<Option<C>> = vec![None; self.n];
        for a in bits(available) {
            for c in bits(self.adj[a] & available) {
                let w = self.w(a, c);
                if cheapest[a].as_ref().is_none_or(|m| w < m) {
                    cheapest[a] = Some(w.clone());
                }
            }
        }
        let mut blocked = 0u64;
        let mut total = C::zero();
        let mut least: Option<C> = None;
        for a in bits(unmatched) {
            for b in bits(self.adj[a] & unmatched & above(a)) {
                let need = match (&cheapest[a], &cheapest[b]) {
                    (Some(x), Some(y)) => x.min(y).clone(),
                    (Some(x), None) | (None, Some(x)) => x.clone(),
                    (None, None) => return None,
                };
                if least.as_ref().is_none_or(|l| need < *l) {
                    least = Some(need.clone());
                }
                if blocked >> a & 1 == 0 && blocked >> b & 1 == 0 {
                    blocked |= self.adj[a] | self.adj[b] | 1 << a | 1 << b;
                    total = total + need;
                }
            }
        }
        // Disjoint cliques of the undominated graph: a cover misses at most
        // one vertex of each.
        let live = bits(unmatched).filter(|&a| self.adj[a] & unmatched != 0).fold(0u64, |m, a| m | 1 << a);
        let mut rest = live;
        let mut cover_floor = 0usize;
        while rest != 0 {
            let a = rest.trailing_zeros() as usize;
            rest &= !(1 << a);
            let mut candidates = self.adj[a] & rest;
            while candidates != 0 {
                let c = candidates.trailing_zeros() as usize;
                rest &= !(1 << c);
                candidates &= self.adj[c];
                cover_floor += 1;
            }
        }
        // Any matching among undominated edges bounds the cover of them too.
        let pairs = matching_size(self.adj, live);
        let mut spread = C::zero();
        if let Some(least) = least {
            for _ in 0..pairs.max(cover_floor).div_ceil(2) {
                spread = spread + least.clone();
            }
        }
        Some(total.max(spread))
    }

    /// One vertex per twin class within `partners`.
    fn representatives(&self, partners: u64) -> u64 {
        bits(partners)
            .filter(|&w| self.twins_below[w] & partners == 0)
            .fold(0, |m, w| m | 1 << w)
    }

    fn first_undominated(&self, matched: u64) -> Option<Edge> {
        let unmatched = !matched & mask_of(self.n);
        bits(unmatched).find_map(|a| {
            let later = self.adj[a] & unmatched & above(a);
            (later != 0).then(|| (a, later.trailing_zeros() as usize))
        })
    }

    fn run(&mut self, matched: u64, forbidden: u64, cost: C) -> bool {
        self.nodes += 1;
        if self.nodes > self.limit {
            return false;
        }
        let Some(lb) = self.bound(matched, forbidden) else {
            return true;
        };
        if let Some((best, _)) = &self.best {
            if cost.clone() + lb >= *best || self.floor.as_ref().is_some_and(|f| best <= f) {
                return true;
            }
        }
        let Some((u, v)) = self.first_undominated(matched) else {
            self.best = Some((cost, self.stack.clone()));
            return true;
        };
        let free = !matched & !forbidden & mask_of(self.n);
        if forbidden >> u & 1 == 0 {
            let partners = self.adj[u] & free;
            for w in bits(self.representatives(partners)) {
                let c = cost.clone() + self.w(u, w).clone();
                self.stack.push((u.min(w), u.max(w)));
                let go = self.run(matched | 1 << u | 1 << w, forbidden, c);
                self.stack.pop();
                if !go {
                    return false;
                }
            }
        }
        if forbidden >> v & 1 == 0 {
            let forbidden = forbidden | 1 << u;
            let partners = self.adj[v] & free & !(1 << u);
            for w in bits(self.representatives(partners)) {
                let c = cost.clone() + self.w(v, w).clone();
                self.stack.push((v.min(w), v.max(w)));
                let go = self.run(matched | 1 << v | 1 << w, forbidden, c);
                self.stack.pop();
                if !go {
                    return false;
                }
            }
        }
        true
    }
}

/// Size of a matching inside `live`, grown by simple augmenting paths.
/// Not necessarily maximum on non-bipartite graphs, but always valid.
fn matching_size(adj: &[u64], live: u64) -> usize {
    fn augment(adj: &[u64], live: u64, v: usize, mate: &mut [usize], seen: &mut u64) -> bool {
        for w in bits(adj[v] & live & !*seen) {
            *seen |= 1 << w;
            let next = mate[w];
            if next == usize::MAX {
                mate[w] = v;
                mate[v] = w;
                return true;
            }
            if *seen >> next & 1 == 0 {
                *seen |= 1 << next;
                if augment(adj, live, next, mate, seen) {
                    mate[w] = v;
                    mate[v] = w;
                    return true;
                }
            }
        }
        false
    }
    let mut mate = vec![usize::MAX; adj.len()];
    let mut size = 0;
    for v in bits(live) {
        if mate[v] == usize::MAX {
            let mut seen = 1u64 << v;
            if augment(adj, live, v, &mut mate, &mut seen) {
                size += 1;
            }
        }
    }
    size
}

/// Bits strictly above `v`.
fn above(v: usize) -> u64 {
    u64::MAX.checked_shl(v as u32 + 1).unwrap_or(0)
}

fn mask_of(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn solve_mmm<C: Cost>(
    graph: &Graph,
    adj: &[u64],
    weight: Vec<C>,
    floor: Option<C>,
    options: &SolverOptions,
) -> (Option<(C, Vec<Edge>)>, u64, SolveStatus) {
    let n = graph.num_vertices();
    let twins_below = (0..n)
        .map(|w| {
            (0..w)
                .filter(|&t| adj[t] == adj[w] && (0..n).all(|x| weight[t * n + x] == weight[w * n + x]))
                .fold(0u64, |m, t| m | 1 << t)
        })
        .collect();
    let mut search = MmmSearch {
        n,
        adj,
        weight,
        twins_below,
        nodes: 0,
        limit: options.node_limit,
        best: None,
        floor,
        stack: Vec::new(),
    };
    // Seed the incumbent with the lexicographic greedy matching.
    let greedy = greedy_in_order(graph, &graph.edges().collect::<Vec<_>>());
    let greedy_cost = greedy
        .edges()
        .iter()
        .fold(C::zero(), |acc, &(u, v)| acc + search.w(u, v).clone());
    search.best = Some((greedy_cost, greedy.edges().to_vec()));
    let complete = search.run(0, 0, C::zero());
    let status = if complete {
        SolveStatus::Optimal
    } else {
        SolveStatus::LimitReached
    };
    (search.best, search.nodes, status)
}

/// Minimum maximal matching; `weights` (aligned with `graph.edges()`) gives
/// the weighted variant, `None` the cardinality one.
pub fn exact_mmm(graph: &Graph, weights: Option<&[Rational]>, options: &SolverOptions) -> Result<SolveResult<Matching>> {
    let adj = bitsets(graph, options.max_vertices)?;
    let n = graph.num_vertices();
    let (edges, objective, nodes, status) = match weights {
        None => {
            let mut table = vec![0u64; n * n];
            for (u, v) in graph.edges() {
                table[u * n + v] = 1;
                table[v * n + u] = 1;
            }
            // The matched vertices of a maximal matching cover every edge.
            let cover = exact_min_vertex_cover(graph, None, options)?;
            let floor = cover
                .is_optimal()
                .then(|| cover.objective.to_integer().to_u64().map(|c| c.div_ceil(2)))
                .flatten();
            let (best, nodes, status) = solve_mmm(graph, &adj, table, floor, options);
            let (cost, edges) = best.expect("greedy incumbent");
            (edges, from_usize(cost as usize), nodes + cover.nodes, status)
        }
        Some(ws) => {
            if ws.len() != graph.num_edges() {
                return Err(Error::InvalidParameter(format!(
                    "{} weights for {} edges",
                    ws.len(),
                    graph.num_edges()
                )));
            }
            if ws.iter().any(|w| *w < Rational::zero()) {
                return Err(Error::InvalidParameter("negative edge weight".into()));
            }
            let mut table = vec![Rational::zero(); n * n];
            for ((u, v), w) in graph.edges().zip(ws) {
                table[u * n + v] = w.clone();
                table[v * n + u] = w.clone();
            }
            let (best, nodes, status) = solve_mmm(graph, &adj, table, None, options);
            let (cost, edges) = best.expect("greedy incumbent");
            (edges, cost, nodes, status)
        }
    };
    let witness = Matching::new(edges);
    if let Maximality::Extendable(e) = verify_maximal_matching(graph, &witness)? {
        return Err(Error::Internal(format!("solver witness extendable by {e:?}")));
    }
    let measured: Rational = match weights {
        None => from_usize(witness.len()),
        Some(ws) => {
            let lookup: std::collections::HashMap<Edge, &Rational> = graph.edges().zip(ws).collect();
            witness.edges().iter().map(|e| lookup[e].clone()).sum()
        }
    };
    if measured != objective {
        return Err(Error::Internal("solver objective disagrees with its witness".into()));
    }
    Ok(SolveResult {
        objective,
        witness,
        nodes,
        status,
    })
}

/// Every maximal matching, each once, sorted by edge list. Decides edges in
/// lexicographic order and abandons a branch once some skipped edge has
/// both endpoints free with no incident edge left to decide.
pub fn enumerate_maximal_matchings(graph: &Graph, limit: usize) -> Result<Vec<Matching>> {
    let edges: Vec<Edge> = graph.edges().collect();
    let n = graph.num_vertices();
    let mut closes_at = vec![Vec::new(); edges.len() + 1];
    let mut last = vec![None; n];
    for (i, &(u, v)) in edges.iter().enumerate() {
        last[u] = Some(i);
        last[v] = Some(i);
    }
    for (v, l) in last.iter().enumerate() {
        if let Some(i) = l {
            closes_at[i + 1].push(v);
        }
    }
    struct Walk<'a> {
        graph: &'a Graph,
        edges: &'a [Edge],
        closes_at: &'a [Vec<usize>],
        used: Vec<bool>,
        closed: Vec<bool>,
        chosen: Vec<Edge>,
        found: Vec<Matching>,
        limit: usize,
    }
    impl Walk<'_> {
        fn go(&mut self, i: usize) -> bool {
            let mut dead = false;
            for &x in &self.closes_at[i] {
                self.closed[x] = true;
                if !self.used[x] && self.graph.neighbors(x).iter().any(|&y| !self.used[y] && self.closed[y]) {
                    dead = true;
                }
            }
            let ok = if dead {
                true
            } else if i == self.edges.len() {
                if self.found.len() == self.limit {
                    false
                } else {
                    self.found.push(Matching::new(self.chosen.iter().copied()));
                    true
                }
            } else {
                let (u, v) = self.edges[i];
                let mut ok = true;
                if !self.used[u] && !self.used[v] {
                    self.used[u] = true;
                    self.used[v] = true;
                    self.chosen.push((u, v));
                    ok = self.go(i + 1);
                    self.chosen.pop();
                    self.used[u] = false;
                    self.used[v] = false;
                }
                ok && self.go(i + 1)
            };
            for &x in &self.closes_at[i] {
                self.closed[x] = false;
            }
            ok
        }
    }
    let mut walk = Walk {
        graph,
        edges: &edges,
        closes_at: &closes_at,
        used: vec![false; n],
        closed: vec![false; n],
        chosen: Vec::new(),
        found: Vec::new(),
        limit,
    };
    if !walk.go(0) {
        return Err(Error::BudgetExhausted {
            budget: limit as u64,
            context: "maximal matching enumeration".into(),
        });
    }
    let mut found = walk.found;
    found.sort_by(|a, b| a.edges().cmp(b.edges()));
    Ok(found)
}

struct MisSearch<'a, C> {
    adj: &'a [u64],
    weight: &'a [C],
    nodes: u64,
    limit: u64,
    best: (C, u64),
}

impl<C: Cost> MisSearch<'_, C> {
    /// Greedy clique partition of `cand`; an independent set takes at most
    /// one vertex per clique.
    fn bound(&self, mut cand: u64) -> C {
        let mut total = C::zero();
        while cand != 0 {
            let v = cand.trailing_zeros() as usize;
            let mut clique = 1u64 << v;
            let mut common = self.adj[v] & cand;
            let mut heaviest = self.weight[v].clone();
            while common != 0 {
                let w = common.trailing_zeros() as usize;
                clique |= 1 << w;
                common &= self.adj[w];
                if self.weight[w] > heaviest {
                    heaviest = self.weight[w].clone();
                }
            }
            cand &= !clique;
            total = total + heaviest;
        }
        total
    }

    fn run(&mut self, chosen: u64, value: C, mut cand: u64) -> bool {
        self.nodes += 1;
        if self.nodes > self.limit {
            return false;
        }
        // Vertices with no candidate neighbour join for free.
        let mut chosen = chosen;
        let mut value = value;
        for v in bits(cand) {
            if self.adj[v] & cand == 0 {
                chosen |= 1 << v;
                value = value + self.weight[v].clone();
                cand &= !(1 << v);
            }
        }
        if cand == 0 {
            if value > self.best.0 {
                self.best = (value, chosen);
            }
            return true;
        }
        if value.clone() + self.bound(cand) <= self.best.0 {
            return true;
        }
        let v = bits(cand)
            .max_by_key(|&v| ((self.adj[v] & cand).count_ones(), std::cmp::Reverse(v)))
            .expect("nonempty");
        let with = value.clone() + self.weight[v].clone();
        self.run(chosen | 1 << v, with, cand & !self.adj[v] & !(1 << v)) && self.run(chosen, value, cand & !(1 << v))
    }
}

/// Minimum (weighted) vertex cover as the complement of a maximum-weight
/// independent set; `weights` are per vertex.
pub fn exact_min_vertex_cover(
    graph: &Graph,
    weights: Option<&[Rational]>,
    options: &SolverOptions,
) -> Result<SolveResult<Vec<usize>>> {
    let adj = bitsets(graph, options.max_vertices)?;
    let n = graph.num_vertices();
    let all = mask_of(n);
    let (independent, nodes, complete) = match weights {
        None => {
            let w = vec![1u64; n];
            let mut s = MisSearch {
                adj: &adj,
                weight: &w,
                nodes: 0,
                limit: options.node_limit,
                best: (0, 0),
            };
            let complete = s.run(0, 0, all);
            (s.best.1, s.nodes, complete)
        }
        Some(ws) => {
            if ws.len() != n || ws.iter().any(|w| *w < Rational::zero()) {
                return Err(Error::InvalidParameter(
                    "vertex weights must be nonnegative, one per vertex".into(),
                ));
            }
            let mut s = MisSearch {
                adj: &adj,
                weight: ws,
                nodes: 0,
                limit: options.node_limit,
                best: (Rational::zero(), 0),
            };
            let complete = s.run(0, Rational::zero(), all);
            (s.best.1, s.nodes, complete)
        }
    };
    let cover: Vec<usize> = bits(all & !independent).collect();
    verify_vertex_cover(graph, &cover).map_err(|(u, v)| Error::NotACover(u, v))?;
    let objective = match weights {
        None => from_usize(cover.len()),
        Some(ws) => cover.iter().map(|&v| ws[v].clone()).sum(),
    };
    Ok(SolveResult {
        objective,
        witness: cover,
        nodes,
        status: if complete {
            SolveStatus::Optimal
        } else {
            SolveStatus::LimitReached
        },
    })
}

/// Largest `K_{k,k}` with one side in `left` and the other in `right`.
pub fn exact_mbb(
    graph: &Graph,
    left: &[usize],
    right: &[usize],
    options: &SolverOptions,
) -> Result<SolveResult<(Vec<usize>, Vec<usize>)>> {
    if left.len() > MAX_MBB_SIDE || right.len() > MAX_MBB_SIDE {
        return Err(Error::CapExceeded(format!(
            "biclique sides {} and {} exceed {MAX_MBB_SIDE}",
            left.len(),
            right.len()
        )));
    }
    let nbr: Vec<u32> = left
        .iter()
        .map(|&a| {
            right
                .iter()
                .enumerate()
                .filter(|&(_, &b)| graph.has_edge(a, b))
                .fold(0u32, |m, (j, _)| m | 1 << j)
        })
        .collect();
    struct Mbb<'a> {
        nbr: &'a [u32],
        nodes: u64,
        limit: u64,
        best: (usize, u32, u32),
    }
    impl Mbb<'_> {
        fn run(&mut self, next: usize, chosen: u32, common: u32) -> bool {
            self.nodes += 1;
            if self.nodes > self.limit {
                return false;
            }
            let k = (chosen.count_ones() as usize).min(common.count_ones() as usize);
            if k > self.best.0 {
                self.best = (k, chosen, common);
            }
            for i in next..self.nbr.len() {
                let c = common & self.nbr[i];
                // Adding vertices never grows the common neighbourhood.
                if (c.count_ones() as usize) <= self.best.0 {
                    continue;
                }
                if !self.run(i + 1, chosen | 1 << i, c) {
                    return false;
                }
            }
            true
        }
    }
    let full = if right.len() == 32 { u32::MAX } else { (1u32 << right.len()) - 1 };
    let mut s = Mbb {
        nbr: &nbr,
        nodes: 0,
        limit: options.node_limit,
        best: (0, 0, 0),
    };
    let complete = s.run(0, 0, full);
    let (k, chosen, common) = s.best;
    let a: Vec<usize> = (0..left.len()).filter(|&i| chosen >> i & 1 == 1).take(k).map(|i| left[i]).collect();
    let b: Vec<usize> = (0..right.len()).filter(|&j| common >> j & 1 == 1).take(k).map(|j| right[j]).collect();
    if !a.iter().all(|&x| b.iter().all(|&y| graph.has_edge(x, y))) {
        return Err(Error::Internal("biclique witness misses an edge".into()));
    }
    Ok(SolveResult {
        objective: from_usize(k),
        witness: (a, b),
        nodes: s.nodes,
        status: if complete {
            SolveStatus::Optimal
        } else {
            SolveStatus::LimitReached
        },
    })
}

/// Smallest vertex cover in which every member has a neighbour in the set,
/// by exhaustive scan over vertex subsets.
pub fn exact_min_total_vertex_cover(graph: &Graph) -> Result<SolveResult<Vec<usize>>> {
    let n = graph.num_vertices();
    if n > MAX_TOTAL_VC_VERTICES {
        return Err(Error::CapExceeded(format!(
            "{n} vertices exceed {MAX_TOTAL_VC_VERTICES} for total vertex cover"
        )));
    }
    let adj = bitsets(graph, 64)?;
    let edges: Vec<Edge> = graph.edges().collect();
    let mut best: Option<u64> = None;
    let mut nodes = 0u64;
    for set in 0..1u64 << n {
        nodes += 1;
        if best.is_some_and(|b| set.count_ones() >= b.count_ones()) {
            continue;
        }
        let covers = edges.iter().all(|&(u, v)| set >> u & 1 == 1 || set >> v & 1 == 1);
        let total = bits(set).all(|v| adj[v] & set != 0);
        if covers && total {
            best = Some(set);
        }
    }
    let set = best.expect("all non-isolated vertices form a total cover");
    let witness: Vec<usize> = bits(set).collect();
    Ok(SolveResult {
        objective: from_usize(witness.len()),
        witness,
        nodes,
        status: SolveStatus::Optimal,
    })
}
