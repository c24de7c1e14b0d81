//! Simple undirected graphs, matchings, and the independent checkers every
//! verifier routes its witnesses through.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Undirected edge stored with `0 <= u < v`.
pub type Edge = (usize, usize);

pub fn normalize(u: usize, v: usize) -> Edge {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Simple undirected graph with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
    num_edges: usize,
}

impl Graph {
    pub fn empty(num_vertices: usize) -> Self {
        Graph {
            adj: vec![Vec::new(); num_vertices],
            num_edges: 0,
        }
    }

    /// Builds a graph from an edge list. Duplicate edges are merged; self
    /// loops and out-of-range endpoints are rejected.
    pub fn from_edges(num_vertices: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        let mut adj = vec![Vec::new(); num_vertices];
        for (u, v) in edges {
            if u >= num_vertices || v >= num_vertices {
                return Err(Error::InvalidParameter(format!(
                    "edge ({u}, {v}) out of range for {num_vertices} vertices"
                )));
            }
            if u == v {
                return Err(Error::InvalidParameter(format!("self loop at {u}")));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        Ok(Self::from_adjacency(adj))
    }

    /// Sorts and deduplicates raw adjacency lists. Callers guarantee symmetry.
    pub(crate) fn from_adjacency(mut adj: Vec<Vec<usize>>) -> Self {
        let mut degree_sum = 0;
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
            degree_sum += list.len();
        }
        Graph {
            adj,
            num_edges: degree_sum / 2,
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.adj.len()
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.adj.len() && self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges in lexicographic order, each once with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, list)| {
            let start = list.partition_point(|&w| w <= u);
            list[start..].iter().map(move |&v| (u, v))
        })
    }

    /// Subgraph induced by `keep`, with vertices renumbered in increasing order.
    pub fn induced(&self, keep: &[usize]) -> Graph {
        let mut index = vec![usize::MAX; self.num_vertices()];
        for (i, &v) in keep.iter().enumerate() {
            index[v] = i;
        }
        let adj = keep
            .iter()
            .map(|&v| {
                self.adj[v]
                    .iter()
                    .filter(|&&w| index[w] != usize::MAX)
                    .map(|&w| index[w])
                    .collect()
            })
            .collect();
        Graph::from_adjacency(adj)
    }

    /// First edge (in lexicographic order) with no endpoint in `set`.
    pub fn uncovered_edge(&self, in_set: &[bool]) -> Option<Edge> {
        self.edges().find(|&(u, v)| !in_set[u] && !in_set[v])
    }
}

/// `G(n, p)` with `p = num/den`, each pair decided in lexicographic order.
pub fn random_graph(n: usize, num: u64, den: u64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_range(0..den) < num {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges).expect("pairs are in range")
}

pub fn mask(num_vertices: usize, set: &[usize]) -> Vec<bool> {
    let mut m = vec![false; num_vertices];
    for &v in set {
        m[v] = true;
    }
    m
}

pub fn members(mask: &[bool]) -> Vec<usize> {
    mask.iter()
        .enumerate()
        .filter_map(|(v, &b)| b.then_some(v))
        .collect()
}

/// `Ok(())` if `set` touches every edge, otherwise the first uncovered edge.
pub fn verify_vertex_cover(graph: &Graph, set: &[usize]) -> std::result::Result<(), Edge> {
    // Out-of-range members cover nothing.
    let mut in_set = vec![false; graph.num_vertices()];
    for &v in set.iter().filter(|&&v| v < graph.num_vertices()) {
        in_set[v] = true;
    }
    match graph.uncovered_edge(&in_set) {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// A set of pairwise disjoint edges, normalized and sorted.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Matching {
    edges: Vec<Edge>,
}

impl Matching {
    pub fn new(edges: impl IntoIterator<Item = Edge>) -> Self {
        let mut edges: Vec<Edge> = edges.into_iter().map(|(u, v)| normalize(u, v)).collect();
        edges.sort_unstable();
        Matching { edges }
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn matched_mask(&self, num_vertices: usize) -> Vec<bool> {
        let mut m = vec![false; num_vertices];
        for &(u, v) in &self.edges {
            m[u] = true;
            m[v] = true;
        }
        m
    }

    pub fn matched_vertices(&self) -> Vec<usize> {
        let mut vs: Vec<usize> = self.edges.iter().flat_map(|&(u, v)| [u, v]).collect();
        vs.sort_unstable();
        vs
    }

    /// Checks that every edge exists in `graph` and no two edges share a vertex.
    pub fn validate(&self, graph: &Graph) -> Result<()> {
        let mut used = vec![false; graph.num_vertices()];
        for &(u, v) in &self.edges {
            if !graph.has_edge(u, v) {
                return Err(Error::NotAMatching(format!("({u}, {v}) is not an edge")));
            }
            for w in [u, v] {
                if used[w] {
                    return Err(Error::NotAMatching(format!("vertex {w} matched twice")));
                }
                used[w] = true;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Maximality {
    Maximal,
    /// An edge with both endpoints unmatched.
    Extendable(Edge),
}

impl Maximality {
    pub fn is_maximal(&self) -> bool {
        matches!(self, Maximality::Maximal)
    }
}

pub fn verify_maximal_matching(graph: &Graph, matching: &Matching) -> Result<Maximality> {
    matching.validate(graph)?;
    let matched = matching.matched_mask(graph.num_vertices());
    Ok(match graph.uncovered_edge(&matched) {
        Some(e) => Maximality::Extendable(e),
        None => Maximality::Maximal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Graph {
        Graph::from_edges(n, (0..n - 1).map(|i| (i, i + 1))).unwrap()
    }

    #[test]
    fn vertex_cover_checks() {
        let empty = Graph::empty(0);
        assert_eq!(verify_vertex_cover(&empty, &[]), Ok(()));
        let single = path(2);
        assert_eq!(verify_vertex_cover(&single, &[0]), Ok(()));
        assert_eq!(verify_vertex_cover(&single, &[]), Err((0, 1)));
    }

    #[test]
    fn maximal_matching_checks() {
        let p3 = path(3);
        let m = Matching::new([(0, 1)]);
        assert_eq!(verify_maximal_matching(&p3, &m).unwrap(), Maximality::Maximal);
        let p4 = path(4);
        assert_eq!(
            verify_maximal_matching(&p4, &m).unwrap(),
            Maximality::Extendable((2, 3))
        );
        let overlapping = Matching::new([(0, 1), (1, 2)]);
        assert!(verify_maximal_matching(&p3, &overlapping).is_err());
        let foreign = Matching::new([(0, 2)]);
        assert!(verify_maximal_matching(&p3, &foreign).is_err());
    }

    #[test]
    fn edges_are_lexicographic_and_deduplicated() {
        let g = Graph::from_edges(4, [(2, 1), (0, 3), (1, 2), (0, 1)]).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (0, 3), (1, 2)]);
        assert_eq!(g.num_edges(), 3);
        assert!(Graph::from_edges(2, [(1, 1)]).is_err());
    }

    #[test]
    fn induced_subgraph_renumbers() {
        let g = path(4);
        let h = g.induced(&[1, 2, 3]);
        assert_eq!(h.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);
    }
}
