//! Fractional matchings on the extended gadget under `w_min` capacities.
//!
//! `F = F⁰ + F¹ + F²` saturates every vertex outside the planted independent
//! set and leaves the set itself untouched. `F⁰` pairs complementary sets in
//! each cloud, `F¹` spreads the per-layer deficits along Hamiltonian cycles
//! of bipartite Kneser graphs, and `F²` settles the `(x, ∅)` vertices across
//! clouds.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::flow::symmetric_b_matching;
use crate::gadget::{complement_ground, complementary_pairs, EdgeWeightRule, Flavor, GadgetGraph};
use crate::graph::{normalize, Edge};
use crate::kneser::{binomial, build_bipartite_kneser, cycle_in_subgraph, hamiltonian_cycle, k_subsets};
use crate::rational::{from_usize, rat, Rational};
use crate::ulc::{set_len, ColorSet, Planted};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum F1Strategy {
    /// `¼` of the layer deficit on every traversal of a Kneser cycle.
    #[default]
    Hamiltonian,
    /// The deficit divided evenly over all disjoint pairs in the layer.
    Uniform,
}

/// What `F²` does when a class of `(x, ∅)` vertices cannot carry a cycle
/// or single edge (a lone variable, or no cycle in the induced subgraph).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SingletonPolicy {
    #[default]
    Reject,
    /// Solve one exact b-matching over all `∅`-vertices instead.
    Flow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BuildOptions {
    pub f1: F1Strategy,
    pub singleton: SingletonPolicy,
}

/// One building block of a fractional matching, kept so that the blowup can
/// replay the construction on vertex copies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Component {
    /// Complementary pair carrying `w_min`.
    Pair(Edge),
    /// Closed walk in which every vertex is met by exactly `incidences`
    /// traversals; each traversal carries `value`. Edges may repeat.
    Walk {
        edges: Vec<Edge>,
        incidences: usize,
        value: Rational,
    },
    /// Even spread over a regular layer.
    Uniform { edges: Vec<Edge>, value: Rational },
    /// Exact b-matching over `vertices`, which must each absorb their
    /// remaining weight.
    Flow {
        vertices: Vec<usize>,
        values: Vec<(Edge, Rational)>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FractionalMatching {
    values: BTreeMap<Edge, Rational>,
    components: Vec<Component>,
}

impl FractionalMatching {
    pub fn new() -> Self {
        Self::default()
    }

    /// Plain edge values without a construction record.
    pub fn from_values(values: impl IntoIterator<Item = (Edge, Rational)>) -> Self {
        let mut fm = Self::new();
        for ((u, v), q) in values {
            fm.add(u, v, q);
        }
        fm
    }

    pub(crate) fn with_components(mut self, components: Vec<Component>) -> Self {
        self.components = components;
        self
    }

    fn add(&mut self, u: usize, v: usize, q: Rational) {
        if q.is_zero() {
            return;
        }
        let slot = self.values.entry(normalize(u, v)).or_insert_with(Rational::zero);
        *slot += q;
        if slot.is_zero() {
            self.values.remove(&normalize(u, v));
        }
    }

    fn push(&mut self, component: Component) {
        match &component {
            Component::Pair(_) => {}
            Component::Walk { edges, value, .. } | Component::Uniform { edges, value } => {
                for &(u, v) in edges {
                    self.add(u, v, value.clone());
                }
            }
            Component::Flow { values, .. } => {
                for ((u, v), q) in values {
                    self.add(*u, *v, q.clone());
                }
            }
        }
        self.components.push(component);
    }

    pub fn value(&self, u: usize, v: usize) -> Rational {
        self.values.get(&normalize(u, v)).cloned().unwrap_or_else(Rational::zero)
    }

    /// Edges with nonzero value, in lexicographic order.
    pub fn support(&self) -> impl Iterator<Item = (Edge, &Rational)> {
        self.values.iter().map(|(&e, q)| (e, q))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn total(&self) -> Rational {
        self.values.values().sum()
    }

    /// `Σ_{e ∋ v} x_e` for every vertex.
    pub fn loads(&self, num_vertices: usize) -> Vec<Rational> {
        let mut loads = vec![Rational::zero(); num_vertices];
        for (&(u, v), q) in &self.values {
            loads[u] += q;
            loads[v] += q;
        }
        loads
    }

    /// Edge-wise sum; construction records are concatenated.
    pub fn merge(mut self, other: FractionalMatching) -> Self {
        for ((u, v), q) in other.values {
            self.add(u, v, q);
        }
        self.components.extend(other.components);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SaturationReport {
    pub loads: Vec<Rational>,
    /// Vertices with `load = w(v)`.
    pub saturated: Vec<usize>,
    /// `(v, w(v) − load)` for the rest; negative when over budget.
    pub unsaturated: Vec<(usize, Rational)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CapacityViolation {
    pub edge: Edge,
    pub value: Rational,
    pub capacity: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BudgetViolation {
    pub vertex: usize,
    pub load: Rational,
    pub weight: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Validation {
    pub saturation: SaturationReport,
    pub capacity_violations: Vec<CapacityViolation>,
    pub budget_violations: Vec<BudgetViolation>,
    /// Support edges absent from the graph.
    pub missing_edges: Vec<Edge>,
    pub negative_edges: Vec<Edge>,
}

impl Validation {
    pub fn is_valid(&self) -> bool {
        self.capacity_violations.is_empty()
            && self.budget_violations.is_empty()
            && self.missing_edges.is_empty()
            && self.negative_edges.is_empty()
    }
}

pub fn validate(gadget: &GadgetGraph, fm: &FractionalMatching) -> Validation {
    let n = gadget.num_vertices();
    let mut capacity_violations = Vec::new();
    let mut missing_edges = Vec::new();
    let mut negative_edges = Vec::new();
    let mut loads = vec![Rational::zero(); n];
    for ((u, v), q) in fm.support() {
        if u >= n || v >= n || !gadget.graph().has_edge(u, v) {
            missing_edges.push((u, v));
            continue;
        }
        if *q < Rational::zero() {
            negative_edges.push((u, v));
        }
        let capacity = gadget.edge_weight(EdgeWeightRule::Min, u, v);
        if *q > capacity {
            capacity_violations.push(CapacityViolation {
                edge: (u, v),
                value: q.clone(),
                capacity,
            });
        }
        loads[u] += q;
        loads[v] += q;
    }
    let mut saturated = Vec::new();
    let mut unsaturated = Vec::new();
    let mut budget_violations = Vec::new();
    for (v, load) in loads.iter().enumerate() {
        let w = gadget.weight(v);
        if load == w {
            saturated.push(v);
        } else {
            unsaturated.push((v, w - load));
            if load > w {
                budget_violations.push(BudgetViolation {
                    vertex: v,
                    load: load.clone(),
                    weight: w.clone(),
                });
            }
        }
    }
    Validation {
        saturation: SaturationReport {
            loads,
            saturated,
            unsaturated,
        },
        capacity_violations,
        budget_violations,
        missing_edges,
        negative_edges,
    }
}

fn check_inputs(gadget: &GadgetGraph, planted: &Planted) -> Result<()> {
    if gadget.flavor() != Flavor::Extended {
        return Err(Error::InvalidParameter(
            "fractional matching needs the extended gadget".into(),
        ));
    }
    if gadget.num_colors() < 2 {
        return Err(Error::InvalidParameter(
            "fractional matching needs at least 2 colors".into(),
        ));
    }
    if planted.labelling.len() != gadget.num_vars() {
        return Err(Error::InvalidParameter(format!(
            "planted labelling covers {} variables, gadget has {}",
            planted.labelling.len(),
            gadget.num_vars()
        )));
    }
    Ok(())
}

/// `w_min` on every complementary pair of each cloud's ground set.
pub fn build_f0(gadget: &GadgetGraph, planted: &Planted) -> Result<FractionalMatching> {
    check_inputs(gadget, planted)?;
    let mut fm = FractionalMatching::new();
    for x in 0..gadget.num_vars() {
        for (s1, s2) in complementary_pairs(complement_ground(gadget, planted, x)) {
            let (u, v) = (gadget.vertex(x, s1), gadget.vertex(x, s2));
            fm.add(u, v, gadget.edge_weight(EdgeWeightRule::Min, u, v));
            fm.push(Component::Pair(normalize(u, v)));
        }
    }
    Ok(fm)
}

/// Spreads a bit pattern over the members of `ground`: bit `i` of `bits`
/// becomes the `i`-th smallest color of `ground`.
fn deposit(bits: ColorSet, ground: ColorSet) -> ColorSet {
    let mut out = 0;
    let mut rest = ground;
    let mut i = 0;
    while rest != 0 {
        let low = rest & rest.wrapping_neg();
        if bits >> i & 1 == 1 {
            out |= low;
        }
        rest &= rest - 1;
        i += 1;
    }
    out
}

pub fn build_f1(gadget: &GadgetGraph, planted: &Planted, strategy: F1Strategy) -> Result<FractionalMatching> {
    check_inputs(gadget, planted)?;
    let mut fm = FractionalMatching::new();
    for x in 0..gadget.num_vars() {
        let ground = complement_ground(gadget, planted, x);
        let m = set_len(ground);
        let mut k = 1;
        while 2 * k < m {
            let deficit = gadget.mu(k) - gadget.mu(m - k);
            match strategy {
                F1Strategy::Hamiltonian => {
                    let kneser = build_bipartite_kneser(m, k)?;
                    let cycle = hamiltonian_cycle(&kneser)?;
                    let edges = cycle
                        .edges()
                        .map(|(a, b)| {
                            let (sa, _) = kneser.set_of(a);
                            let (sb, _) = kneser.set_of(b);
                            normalize(
                                gadget.vertex(x, deposit(sa, ground)),
                                gadget.vertex(x, deposit(sb, ground)),
                            )
                        })
                        .collect();
                    fm.push(Component::Walk {
                        edges,
                        incidences: 4,
                        value: deficit * rat(1, 4),
                    });
                }
                F1Strategy::Uniform => {
                    let layer = k_subsets(m, k);
                    let mut edges = Vec::new();
                    for &a in &layer {
                        for &b in layer.iter().filter(|&&b| b > a && a & b == 0) {
                            edges.push(normalize(
                                gadget.vertex(x, deposit(a, ground)),
                                gadget.vertex(x, deposit(b, ground)),
                            ));
                        }
                    }
                    fm.push(Component::Uniform {
                        edges,
                        value: deficit / from_usize(binomial(m - k, k)),
                    });
                }
            }
            k += 1;
        }
    }
    Ok(fm)
}

/// `(x, ∅)` deficits settled along a cycle per class (`x ∉ X₀` and `x ∈ X₀`),
/// or a single edge for a class of two. Rejects classes that admit neither.
pub fn build_f2(gadget: &GadgetGraph, planted: &Planted) -> Result<FractionalMatching> {
    build_f2_with(gadget, planted, SingletonPolicy::Reject)
}

pub fn build_f2_with(gadget: &GadgetGraph, planted: &Planted, policy: SingletonPolicy) -> Result<FractionalMatching> {
    check_inputs(gadget, planted)?;
    let deficit = |x: usize| gadget.mu(0) - gadget.mu(set_len(complement_ground(gadget, planted, x)));
    let (inside, outside): (Vec<usize>, Vec<usize>) = (0..gadget.num_vars()).partition(|&x| planted.in_x0(x));
    let mut fm = FractionalMatching::new();
    for (name, class) in [("outside X0", &outside), ("X0", &inside)] {
        let vertices: Vec<usize> = class.iter().map(|&x| gadget.vertex(x, 0)).collect();
        let component = match vertices.len() {
            0 => continue,
            1 => Err(Error::SingletonClass(format!(
                "variable {} is alone in the {name} class",
                class[0]
            ))),
            2 if gadget.graph().has_edge(vertices[0], vertices[1]) => Ok(Component::Walk {
                edges: vec![normalize(vertices[0], vertices[1])],
                incidences: 1,
                value: deficit(class[0]),
            }),
            2 => Err(Error::SingletonClass(format!(
                "the two {name} variables {} and {} share no constraint",
                class[0], class[1]
            ))),
            _ => cycle_in_subgraph(&vertices, |a, b| gadget.graph().has_edge(a, b)).map(|cycle| {
                Component::Walk {
                    edges: cycle.edges().map(|(a, b)| normalize(a, b)).collect(),
                    incidences: 2,
                    value: deficit(class[0]) * rat(1, 2),
                }
            }),
        };
        match component {
            Ok(c) => fm.push(c),
            Err(Error::SingletonClass(_) | Error::NoHamiltonianCycle(_)) if policy == SingletonPolicy::Flow => {
                return flow_f2(gadget, planted);
            }
            Err(Error::NoHamiltonianCycle(why)) => {
                return Err(Error::SingletonClass(format!("{name} class has no cycle: {why}")))
            }
            Err(e) => return Err(e),
        }
    }
    Ok(fm)
}

/// One exact b-matching over every `(x, ∅)` vertex, demands `μ(0) − F⁰ load`.
fn flow_f2(gadget: &GadgetGraph, planted: &Planted) -> Result<FractionalMatching> {
    let vertices: Vec<usize> = (0..gadget.num_vars()).map(|x| gadget.vertex(x, 0)).collect();
    let half: Vec<Rational> = (0..gadget.num_vars())
        .map(|x| (gadget.mu(0) - gadget.mu(set_len(complement_ground(gadget, planted, x)))) * rat(1, 2))
        .collect();
    let mut local = Vec::new();
    for i in 0..vertices.len() {
        for j in i + 1..vertices.len() {
            if gadget.graph().has_edge(vertices[i], vertices[j]) {
                local.push((i, j));
            }
        }
    }
    let y = symmetric_b_matching(&half, &local).ok_or_else(|| {
        Error::SingletonClass(
            "the empty-set vertices cannot absorb their deficits along constraint edges".into(),
        )
    })?;
    let values = local
        .iter()
        .zip(y)
        .filter(|(_, q)| !q.is_zero())
        .map(|(&(i, j), q)| (normalize(vertices[i], vertices[j]), q))
        .collect();
    let mut fm = FractionalMatching::new();
    fm.push(Component::Flow { vertices, values });
    Ok(fm)
}

/// `F⁰ + F¹ + F²` with Kneser cycles and the flow fallback for `F²`.
pub fn build_full(gadget: &GadgetGraph, planted: &Planted) -> Result<FractionalMatching> {
    build_full_with(
        gadget,
        planted,
        BuildOptions {
            f1: F1Strategy::Hamiltonian,
            singleton: SingletonPolicy::Flow,
        },
    )
}

pub fn build_full_with(gadget: &GadgetGraph, planted: &Planted, options: BuildOptions) -> Result<FractionalMatching> {
    Ok(build_f0(gadget, planted)?
        .merge(build_f1(gadget, planted, options.f1)?)
        .merge(build_f2_with(gadget, planted, options.singleton)?))
}
