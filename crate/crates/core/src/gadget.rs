//! Weighted reduction graphs over `(variable, color subset)` vertices.
//!
//! Vertex `(x, S)` has id `x·2^|R| + S` where `S` is the subset bit mask, so
//! ordering is variable-major with subsets in integer order.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::graph::{mask, normalize, Graph, Matching, Maximality};
use crate::rational::{from_usize, pow, rat, Rational};
use crate::ulc::{full_set, set_len, ColorSet, Planted, UlcInstance};

pub use crate::graph::{verify_maximal_matching, verify_vertex_cover};

/// Upper bound on `|X|·2^|R|`.
pub const MAX_GADGET_VERTICES: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GadgetVertex {
    pub variable: usize,
    pub subset: ColorSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    /// `G_Φ`: only cross-cloud edges of failed constraints.
    Base,
    /// `G′_Φ`: additionally joins disjoint subsets inside each cloud.
    Extended,
}

/// How edge weights derive from vertex weights. Both rules are views over
/// the same graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeWeightRule {
    /// `w₊(u, v) = w(u) + w(v)`
    Plus,
    /// `w_min(u, v) = min(w(u), w(v))`
    Min,
}

fn check_epsilon(epsilon: &Rational) -> Result<()> {
    if *epsilon <= Rational::zero() || *epsilon >= rat(1, 2) {
        return Err(Error::InvalidParameter(format!(
            "epsilon = {epsilon} outside (0, 1/2)"
        )));
    }
    Ok(())
}

/// Biased vertex weight `μ(s) = (1/|X|)·p^s·(1−p)^(|R|−s)` with `p = 1/2 − ε`.
pub fn mu(num_vars: usize, num_colors: usize, epsilon: &Rational, set_size: usize) -> Result<Rational> {
    check_epsilon(epsilon)?;
    if num_vars == 0 {
        return Err(Error::InvalidParameter("no variables".into()));
    }
    if set_size > num_colors {
        return Err(Error::InvalidParameter(format!(
            "set size {set_size} exceeds |R| = {num_colors}"
        )));
    }
    let p = rat(1, 2) - epsilon;
    let q = Rational::one() - &p;
    Ok(pow(&p, set_size) * pow(&q, num_colors - set_size) / from_usize(num_vars))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GadgetGraph {
    num_vars: usize,
    num_colors: usize,
    epsilon: Rational,
    flavor: Flavor,
    /// `μ` indexed by set size.
    mu: Vec<Rational>,
    graph: Graph,
}

impl GadgetGraph {
    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_colors(&self) -> usize {
        self.num_colors
    }

    pub fn epsilon(&self) -> &Rational {
        &self.epsilon
    }

    pub fn p(&self) -> Rational {
        rat(1, 2) - &self.epsilon
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn num_vertices(&self) -> usize {
        self.graph.num_vertices()
    }

    pub fn cloud_size(&self) -> usize {
        1 << self.num_colors
    }

    pub fn full(&self) -> ColorSet {
        full_set(self.num_colors)
    }

    pub fn vertex(&self, variable: usize, subset: ColorSet) -> usize {
        variable * self.cloud_size() + subset as usize
    }

    pub fn decode(&self, id: usize) -> GadgetVertex {
        GadgetVertex {
            variable: id / self.cloud_size(),
            subset: (id % self.cloud_size()) as ColorSet,
        }
    }

    pub fn mu(&self, set_size: usize) -> &Rational {
        &self.mu[set_size]
    }

    pub fn mu_table(&self) -> &[Rational] {
        &self.mu
    }

    pub fn weight(&self, id: usize) -> &Rational {
        &self.mu[set_len(self.decode(id).subset)]
    }

    pub fn edge_weight(&self, rule: EdgeWeightRule, u: usize, v: usize) -> Rational {
        let (a, b) = (self.weight(u), self.weight(v));
        match rule {
            EdgeWeightRule::Plus => a + b,
            EdgeWeightRule::Min => a.min(b).clone(),
        }
    }

    pub fn total_weight(&self) -> Rational {
        (0..self.num_vertices()).map(|v| self.weight(v)).sum()
    }

    pub fn weight_of(&self, vertices: &[usize]) -> Rational {
        vertices.iter().map(|&v| self.weight(v)).sum()
    }

    pub fn matching_weight(&self, rule: EdgeWeightRule, matching: &Matching) -> Rational {
        matching
            .edges()
            .iter()
            .map(|&(u, v)| self.edge_weight(rule, u, v))
            .sum()
    }

    /// Human-readable `(x,{…})` label.
    pub fn label(&self, id: usize) -> String {
        let GadgetVertex { variable, subset } = self.decode(id);
        let colors: Vec<String> = (0..self.num_colors)
            .filter(|r| subset >> r & 1 == 1)
            .map(|r| r.to_string())
            .collect();
        format!("({variable},{{{}}})", colors.join(","))
    }
}

impl GadgetGraph {
    /// Reassembles a gadget from stored parts; weights are recomputed.
    pub(crate) fn from_parts(
        num_vars: usize,
        num_colors: usize,
        epsilon: &Rational,
        flavor: Flavor,
        graph: Graph,
    ) -> Result<GadgetGraph> {
        let expected = num_vars
            .checked_mul(1usize.checked_shl(num_colors as u32).unwrap_or(0))
            .filter(|&n| n > 0 && n <= MAX_GADGET_VERTICES);
        if expected != Some(graph.num_vertices()) {
            return Err(Error::InvalidParameter(format!(
                "{} vertices do not match {num_vars} variables and {num_colors} colors",
                graph.num_vertices()
            )));
        }
        let mu_table = (0..=num_colors)
            .map(|k| mu(num_vars, num_colors, epsilon, k))
            .collect::<Result<Vec<_>>>()?;
        Ok(GadgetGraph {
            num_vars,
            num_colors,
            epsilon: epsilon.clone(),
            flavor,
            mu: mu_table,
            graph,
        })
    }
}

/// Builds `G_Φ` (base) or `G′_Φ` (extended).
pub fn build_gadget(instance: &UlcInstance, epsilon: &Rational, flavor: Flavor) -> Result<GadgetGraph> {
    check_epsilon(epsilon)?;
    let num_vars = instance.num_vars();
    let num_colors = instance.num_colors();
    let cloud = 1usize << num_colors;
    let n = num_vars
        .checked_mul(cloud)
        .filter(|&n| n <= MAX_GADGET_VERTICES)
        .ok_or_else(|| {
            Error::CapExceeded(format!(
                "{num_vars} variables x 2^{num_colors} subsets exceeds {MAX_GADGET_VERTICES} vertices"
            ))
        })?;
    let mu_table = (0..=num_colors)
        .map(|k| mu(num_vars, num_colors, epsilon, k))
        .collect::<Result<Vec<_>>>()?;

    let mut adj = vec![Vec::new(); n];
    let mut image = vec![0 as ColorSet; cloud];
    for c in instance.constraints() {
        for (s1, img) in image.iter_mut().enumerate() {
            *img = c.forward.image_set(s1 as ColorSet);
        }
        for (s1, &img) in image.iter().enumerate() {
            let a = c.u * cloud + s1;
            for s2 in 0..cloud {
                if img & s2 as ColorSet == 0 {
                    let b = c.v * cloud + s2;
                    adj[a].push(b);
                    adj[b].push(a);
                }
            }
        }
    }
    if flavor == Flavor::Extended {
        let full = full_set(num_colors);
        for x in 0..num_vars {
            for s1 in 0..cloud as ColorSet {
                let rest = full & !s1;
                // Disjoint partners `s2 > s1`, enumerated as submasks of `rest`.
                let mut s2 = rest;
                loop {
                    if s2 > s1 {
                        let (a, b) = (x * cloud + s1 as usize, x * cloud + s2 as usize);
                        adj[a].push(b);
                        adj[b].push(a);
                    }
                    if s2 == 0 {
                        break;
                    }
                    s2 = (s2 - 1) & rest;
                }
            }
        }
    }
    Ok(GadgetGraph {
        num_vars,
        num_colors,
        epsilon: epsilon.clone(),
        flavor,
        mu: mu_table,
        graph: Graph::from_adjacency(adj),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndependentSet {
    /// Sorted vertex ids.
    pub vertices: Vec<usize>,
    pub weight: Rational,
}

impl IndependentSet {
    pub fn contains(&self, v: usize) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }
}

/// `{(x, S) : x ∈ X₀, r_x ∈ S}`, verified independent by an edge scan.
pub fn independent_set(gadget: &GadgetGraph, planted: &Planted) -> Result<IndependentSet> {
    check_planted(gadget, planted)?;
    let mut vertices = Vec::new();
    for &x in &planted.x0 {
        let r = planted.labelling[x];
        for s in 0..gadget.cloud_size() as ColorSet {
            if s >> r & 1 == 1 {
                vertices.push(gadget.vertex(x, s));
            }
        }
    }
    let in_set = mask(gadget.num_vertices(), &vertices);
    for &v in &vertices {
        if let Some(&w) = gadget.graph.neighbors(v).iter().find(|&&w| in_set[w]) {
            let (a, b) = normalize(v, w);
            return Err(Error::NotIndependent(a, b));
        }
    }
    let weight = gadget.weight_of(&vertices);
    Ok(IndependentSet { vertices, weight })
}

fn check_planted(gadget: &GadgetGraph, planted: &Planted) -> Result<()> {
    if planted.labelling.len() != gadget.num_vars {
        return Err(Error::InvalidParameter(format!(
            "planted labelling covers {} variables, gadget has {}",
            planted.labelling.len(),
            gadget.num_vars
        )));
    }
    Ok(())
}

/// The integral YES matching `M₀ ∪ M₁`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct YesMatching {
    pub matching: Matching,
    /// `w₊(M)`
    pub weight: Rational,
}

/// Pairs `(x, S₁) ~ (x, S₂)` with `S₁ ⊎ S₂ = R∖{r_x}` inside `X₀` clouds and
/// `S₁ ⊎ S₂ = R` elsewhere.
///
/// The `M₁` part is taken over variables outside `X₀`, which is what the
/// surrounding argument needs even though one written form of the
/// definition states the condition as `x ∈ X₀`.
pub fn yes_matching(gadget: &GadgetGraph, planted: &Planted) -> Result<YesMatching> {
    if gadget.flavor != Flavor::Extended {
        return Err(Error::InvalidParameter(
            "yes matching needs the extended gadget".into(),
        ));
    }
    if gadget.num_colors < 2 {
        return Err(Error::InvalidParameter(
            "yes matching needs at least 2 colors".into(),
        ));
    }
    let is = independent_set(gadget, planted)?;
    let mut edges = Vec::new();
    for x in 0..gadget.num_vars {
        let ground = complement_ground(gadget, planted, x);
        for (s1, s2) in complementary_pairs(ground) {
            edges.push((gadget.vertex(x, s1), gadget.vertex(x, s2)));
        }
    }
    let matching = Matching::new(edges);
    matching.validate(&gadget.graph)?;
    let matched = matching.matched_mask(gadget.num_vertices());
    if let Some(v) = (0..gadget.num_vertices()).find(|&v| matched[v] == is.contains(v)) {
        return Err(Error::Internal(format!(
            "vertex {} matched state disagrees with the independent set",
            gadget.label(v)
        )));
    }
    if let Maximality::Extendable(e) = verify_maximal_matching(&gadget.graph, &matching)? {
        return Err(Error::Internal(format!("yes matching extendable by {e:?}")));
    }
    let weight = gadget.matching_weight(EdgeWeightRule::Plus, &matching);
    Ok(YesMatching { matching, weight })
}

/// Ground set split by the complement pairing: `R∖{r_x}` for `x ∈ X₀`, else `R`.
pub(crate) fn complement_ground(gadget: &GadgetGraph, planted: &Planted, x: usize) -> ColorSet {
    if planted.in_x0(x) {
        gadget.full() & !(1 << planted.labelling[x])
    } else {
        gadget.full()
    }
}

/// Unordered pairs `(S, ground∖S)` with `S < ground∖S`.
pub(crate) fn complementary_pairs(ground: ColorSet) -> impl Iterator<Item = (ColorSet, ColorSet)> {
    let mut subsets = Vec::new();
    let mut s = ground;
    loop {
        subsets.push(s);
        if s == 0 {
            break;
        }
        s = (s - 1) & ground;
    }
    subsets
        .into_iter()
        .rev()
        .map(move |s| (s, ground & !s))
        .filter(|(a, b)| a < b)
}

/// Vertices outside the independent set; a vertex cover of the gadget.
pub fn cover_complement(gadget: &GadgetGraph, is: &IndependentSet) -> Vec<usize> {
    (0..gadget.num_vertices()).filter(|&v| !is.contains(v)).collect()
}
