//! Unique Label Cover instances `(X, R, Ψ, E)` and planted YES-type generation.
//!
//! Variables and colors are dense indices. A constraint `Ψ_{u,v}` is stored
//! for the orientation `u < v`; the opposite orientation uses the inverse.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::{ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{normalize, Edge};
use crate::rational::{from_usize, Rational};

/// Color subsets are bit masks, which caps `|R|`.
pub const MAX_COLORS: usize = 30;

pub type ColorSet = u32;

pub fn set_len(s: ColorSet) -> usize {
    s.count_ones() as usize
}

pub fn full_set(num_colors: usize) -> ColorSet {
    if num_colors == 0 {
        0
    } else {
        u32::MAX >> (32 - num_colors)
    }
}

/// A bijection on `0..len`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(images: Vec<usize>) -> Option<Self> {
        let mut seen = vec![false; images.len()];
        for &r in &images {
            if r >= images.len() || std::mem::replace(&mut seen[r], true) {
                return None;
            }
        }
        Some(Permutation(images))
    }

    pub fn identity(len: usize) -> Self {
        Permutation((0..len).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, r: usize) -> usize {
        self.0[r]
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (r, &s) in self.0.iter().enumerate() {
            inv[s] = r;
        }
        Permutation(inv)
    }

    pub fn image_set(&self, set: ColorSet) -> ColorSet {
        let mut out = 0;
        let mut rest = set;
        while rest != 0 {
            let r = rest.trailing_zeros() as usize;
            out |= 1 << self.0[r];
            rest &= rest - 1;
        }
        out
    }
}

/// `Ψ_{u,v}`: if `u` takes color `r`, `v` must take `forward(r)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub u: usize,
    pub v: usize,
    pub forward: Permutation,
    backward: Permutation,
}

impl Constraint {
    fn new(u: usize, v: usize, forward: Permutation) -> Self {
        let (u, v, forward) = if u < v {
            (u, v, forward)
        } else {
            (v, u, forward.inverse())
        };
        let backward = forward.inverse();
        Constraint {
            u,
            v,
            forward,
            backward,
        }
    }

    pub fn backward(&self) -> &Permutation {
        &self.backward
    }
}

/// Planted YES certificate: a labelling of every variable and the set `X₀`
/// on which it satisfies all constraints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Planted {
    pub labelling: Vec<usize>,
    /// Sorted.
    pub x0: Vec<usize>,
}

impl Planted {
    pub fn in_x0(&self, x: usize) -> bool {
        self.x0.binary_search(&x).is_ok()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UlcInstance {
    num_vars: usize,
    num_colors: usize,
    constraints: Vec<Constraint>,
    index: HashMap<Edge, usize>,
    planted: Option<Planted>,
}

impl UlcInstance {
    /// Validates and builds an instance from `((u, v), Ψ_{u,v})` pairs.
    pub fn new(
        num_vars: usize,
        num_colors: usize,
        constraint_list: impl IntoIterator<Item = (Edge, Vec<usize>)>,
    ) -> Result<Self> {
        if num_colors > MAX_COLORS {
            return Err(Error::TooManyColors(num_colors));
        }
        if num_colors == 0 {
            return Err(Error::InvalidParameter("color set must be nonempty".into()));
        }
        let mut constraints = Vec::new();
        for ((u, v), images) in constraint_list {
            for x in [u, v] {
                if x >= num_vars {
                    return Err(Error::DanglingVariable { index: x, num_vars });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if images.len() != num_colors {
                return Err(Error::NotBijection(u, v));
            }
            let perm = Permutation::new(images).ok_or(Error::NotBijection(u, v))?;
            constraints.push(Constraint::new(u, v, perm));
        }
        constraints.sort_by_key(|c| (c.u, c.v));
        let mut index = HashMap::with_capacity(constraints.len());
        for (i, c) in constraints.iter().enumerate() {
            if index.insert((c.u, c.v), i).is_some() {
                return Err(Error::DuplicateEdge(c.u, c.v));
            }
        }
        Ok(UlcInstance {
            num_vars,
            num_colors,
            constraints,
            index,
            planted: None,
        })
    }

    /// Attaches a planted certificate after checking it satisfies every
    /// constraint inside `X₀`.
    pub fn with_planted(mut self, labelling: Vec<usize>, x0: Vec<usize>) -> Result<Self> {
        if labelling.len() != self.num_vars {
            return Err(Error::MissingLabel(labelling.len().min(self.num_vars)));
        }
        if let Some((x, _)) = labelling
            .iter()
            .enumerate()
            .find(|(_, &r)| r >= self.num_colors)
        {
            return Err(Error::InvalidLabelSet {
                var: x,
                reason: "color out of range".into(),
            });
        }
        let x0: Vec<usize> = x0.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        if let Some(&x) = x0.iter().find(|&&x| x >= self.num_vars) {
            return Err(Error::DanglingVariable {
                index: x,
                num_vars: self.num_vars,
            });
        }
        let map: BTreeMap<usize, usize> = x0.iter().map(|&x| (x, labelling[x])).collect();
        let report = check_labelling(&self, &map, &x0)?;
        if let Some(&(u, v)) = report.violated.first() {
            return Err(Error::InvalidParameter(format!(
                "planted labelling violates constraint ({u}, {v}) inside X0"
            )));
        }
        self.planted = Some(Planted { labelling, x0 });
        Ok(self)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_colors(&self) -> usize {
        self.num_colors
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn num_edges(&self) -> usize {
        self.constraints.len()
    }

    pub fn planted(&self) -> Option<&Planted> {
        self.planted.as_ref()
    }

    pub fn has_edge(&self, x1: usize, x2: usize) -> bool {
        self.index.contains_key(&normalize(x1, x2))
    }

    /// `Ψ_{x1,x2}` in the requested orientation.
    pub fn constraint(&self, x1: usize, x2: usize) -> Option<&Permutation> {
        let c = &self.constraints[*self.index.get(&normalize(x1, x2))?];
        Some(if x1 == c.u { &c.forward } else { &c.backward })
    }
}

/// Edges with both endpoints in the checked subset, split by verdict.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LabellingReport {
    pub satisfied: Vec<Edge>,
    pub violated: Vec<Edge>,
}

impl LabellingReport {
    pub fn all_satisfied(&self) -> bool {
        self.violated.is_empty()
    }
}

fn subset_edges<'a>(
    instance: &'a UlcInstance,
    subset: &[usize],
) -> impl Iterator<Item = &'a Constraint> {
    let inside: BTreeSet<usize> = subset.iter().copied().collect();
    instance
        .constraints
        .iter()
        .filter(move |c| inside.contains(&c.u) && inside.contains(&c.v))
}

/// Checks a 1-labelling: edge satisfied iff `Ψ_{x1,x2}(L(x1)) = L(x2)`.
pub fn check_labelling(
    instance: &UlcInstance,
    labelling: &BTreeMap<usize, usize>,
    subset: &[usize],
) -> Result<LabellingReport> {
    let sets = subset
        .iter()
        .map(|&x| {
            let r = *labelling.get(&x).ok_or(Error::MissingLabel(x))?;
            if r >= instance.num_colors {
                return Err(Error::InvalidLabelSet {
                    var: x,
                    reason: format!("color {r} out of range"),
                });
            }
            Ok((x, 1 << r))
        })
        .collect::<Result<BTreeMap<usize, ColorSet>>>()?;
    Ok(check_sets(instance, &sets, subset))
}

/// Assignment of exactly `t` colors per variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TLabelling {
    t: usize,
    sets: BTreeMap<usize, ColorSet>,
}

impl TLabelling {
    pub fn new(t: usize, num_colors: usize, sets: BTreeMap<usize, ColorSet>) -> Result<Self> {
        if t == 0 {
            return Err(Error::InvalidParameter("t must be positive".into()));
        }
        for (&var, &s) in &sets {
            if s & !full_set(num_colors) != 0 {
                return Err(Error::InvalidLabelSet {
                    var,
                    reason: "color out of range".into(),
                });
            }
            if set_len(s) != t {
                return Err(Error::InvalidLabelSet {
                    var,
                    reason: format!("has {} colors, expected {t}", set_len(s)),
                });
            }
        }
        Ok(TLabelling { t, sets })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn get(&self, x: usize) -> Option<ColorSet> {
        self.sets.get(&x).copied()
    }
}

/// Checks a t-labelling: edge satisfied iff some `r ∈ L(x1)` has `Ψ(r) ∈ L(x2)`.
pub fn check_t_labelling(
    instance: &UlcInstance,
    labelling: &TLabelling,
    subset: &[usize],
) -> Result<LabellingReport> {
    for &x in subset {
        if labelling.get(x).is_none() {
            return Err(Error::MissingLabel(x));
        }
    }
    Ok(check_sets(instance, &labelling.sets, subset))
}

/// Satisfaction rule shared with the gadget: `Ψ(S1) ∩ S2 ≠ ∅`.
pub fn sets_satisfy(perm: &Permutation, s1: ColorSet, s2: ColorSet) -> bool {
    perm.image_set(s1) & s2 != 0
}

fn check_sets(
    instance: &UlcInstance,
    sets: &BTreeMap<usize, ColorSet>,
    subset: &[usize],
) -> LabellingReport {
    let mut report = LabellingReport::default();
    for c in subset_edges(instance, subset) {
        if sets_satisfy(&c.forward, sets[&c.u], sets[&c.v]) {
            report.satisfied.push((c.u, c.v));
        } else {
            report.violated.push((c.u, c.v));
        }
    }
    report
}

/// Topology of the constraint graph beyond the mandatory cycles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Topology {
    Cycle,
    Complete,
    /// Each remaining pair is added independently with this probability.
    Random(Rational),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct YesParams {
    pub num_vars: usize,
    pub num_colors: usize,
    /// Fraction of variables allowed outside `X₀`, in `[0, 1)`.
    pub xi: Rational,
    pub topology: Topology,
    pub seed: u64,
}

/// Number of variables placed outside `X₀`: `⌊ξ·|X|⌋`.
pub fn outside_count(num_vars: usize, xi: &Rational) -> usize {
    (xi * from_usize(num_vars))
        .floor()
        .to_integer()
        .to_usize()
        .unwrap_or(usize::MAX)
}

/// Generates a YES-type instance with a planted labelling and `X₀`.
///
/// The constraint graph always contains a Hamiltonian cycle over `X`, a
/// cycle over each of `X₀` and `X∖X₀` (an edge for a class of two), and
/// every member of a singleton class is joined to the whole other class.
pub fn generate_yes(params: &YesParams) -> Result<UlcInstance> {
    let YesParams {
        num_vars: n,
        num_colors,
        ref xi,
        ref topology,
        seed,
    } = *params;
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "need at least 3 variables, got {n}"
        )));
    }
    if num_colors == 0 || num_colors > MAX_COLORS {
        return Err(Error::TooManyColors(num_colors));
    }
    if *xi < Rational::zero() || *xi >= Rational::from_integer(1.into()) {
        return Err(Error::InvalidParameter(format!("xi = {xi} outside [0, 1)")));
    }
    let outside = outside_count(n, xi);
    if outside >= n {
        return Err(Error::InvalidParameter("X0 would be empty".into()));
    }
    if let Topology::Random(p) = topology {
        if *p < Rational::zero() || *p > Rational::from_integer(1.into()) {
            return Err(Error::InvalidParameter(format!("edge probability {p}")));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut x0: Vec<usize> = order[..n - outside].to_vec();
    x0.sort_unstable();
    let mut rest: Vec<usize> = order[n - outside..].to_vec();
    rest.sort_unstable();
    let labelling: Vec<usize> = (0..n).map(|_| rng.gen_range(0..num_colors)).collect();

    let mut edges = BTreeSet::new();
    add_cycle(&mut edges, &(0..n).collect::<Vec<_>>());
    add_cycle(&mut edges, &x0);
    add_cycle(&mut edges, &rest);
    for (class, other) in [(&x0, &rest), (&rest, &x0)] {
        if class.len() == 1 {
            for &y in other.iter() {
                edges.insert(normalize(class[0], y));
            }
        }
    }
    match topology {
        Topology::Cycle => {}
        Topology::Complete => {
            for u in 0..n {
                for v in u + 1..n {
                    edges.insert((u, v));
                }
            }
        }
        Topology::Random(p) => {
            let (num, den) = p
                .numer()
                .to_u64()
                .zip(p.denom().to_u64())
                .ok_or_else(|| Error::InvalidParameter(format!("edge probability {p}")))?;
            for u in 0..n {
                for v in u + 1..n {
                    if rng.gen_range(0..den) < num {
                        edges.insert((u, v));
                    }
                }
            }
        }
    }

    let in_x0 = |x: usize| x0.binary_search(&x).is_ok();
    let mut constraint_list = Vec::with_capacity(edges.len());
    for &(u, v) in &edges {
        let mut images: Vec<usize> = (0..num_colors).collect();
        images.shuffle(&mut rng);
        if in_x0(u) && in_x0(v) {
            let want = labelling[v];
            let at = images.iter().position(|&r| r == want).expect("permutation");
            images.swap(labelling[u], at);
        }
        constraint_list.push(((u, v), images));
    }
    UlcInstance::new(n, num_colors, constraint_list)?.with_planted(labelling, x0)
}

fn add_cycle(edges: &mut BTreeSet<Edge>, vertices: &[usize]) {
    match vertices.len() {
        0 | 1 => {}
        2 => {
            edges.insert(normalize(vertices[0], vertices[1]));
        }
        k => {
            for i in 0..k {
                edges.insert(normalize(vertices[i], vertices[(i + 1) % k]));
            }
        }
    }
}
