//! Edmonds–Karp maximum flow, generic over exact capacity types.

use std::collections::VecDeque;
use std::ops::{Add, Sub};

use num_traits::Zero;

pub(crate) trait Capacity: Clone + Ord + Zero + Add<Output = Self> + Sub<Output = Self> {}

impl<T: Clone + Ord + Zero + Add<Output = T> + Sub<Output = T>> Capacity for T {}

struct Arc<T> {
    to: usize,
    cap: T,
    flow: T,
}

pub(crate) struct FlowNetwork<T> {
    arcs: Vec<Arc<T>>,
    out: Vec<Vec<usize>>,
}

impl<T: Capacity> FlowNetwork<T> {
    pub(crate) fn new(num_nodes: usize) -> Self {
        FlowNetwork {
            arcs: Vec::new(),
            out: (0..num_nodes).map(|_| Vec::new()).collect(),
        }
    }

    /// Adds `from → to` with capacity `cap`; returns the arc handle.
    pub(crate) fn add_arc(&mut self, from: usize, to: usize, cap: T) -> usize {
        let id = self.arcs.len();
        self.arcs.push(Arc { to, cap, flow: T::zero() });
        self.arcs.push(Arc {
            to: from,
            cap: T::zero(),
            flow: T::zero(),
        });
        self.out[from].push(id);
        self.out[to].push(id + 1);
        id
    }

    pub(crate) fn flow_on(&self, arc: usize) -> &T {
        &self.arcs[arc].flow
    }

    fn residual(&self, arc: usize) -> T {
        let a = &self.arcs[arc];
        a.cap.clone() - a.flow.clone()
    }

    /// Shortest augmenting paths until none remain; returns the flow value.
    pub(crate) fn max_flow(&mut self, source: usize, sink: usize) -> T {
        let mut total = T::zero();
        loop {
            let mut via = vec![usize::MAX; self.out.len()];
            let mut queue = VecDeque::from([source]);
            let mut reached = source == sink;
            while let Some(v) = queue.pop_front() {
                if reached {
                    break;
                }
                for &arc in &self.out[v] {
                    let to = self.arcs[arc].to;
                    if to != source && via[to] == usize::MAX && self.residual(arc) > T::zero() {
                        via[to] = arc;
                        if to == sink {
                            reached = true;
                            break;
                        }
                        queue.push_back(to);
                    }
                }
            }
            if !reached || source == sink {
                return total;
            }
            let mut bottleneck: Option<T> = None;
            let mut v = sink;
            while v != source {
                let arc = via[v];
                let r = self.residual(arc);
                bottleneck = Some(match bottleneck {
                    Some(b) if b <= r => b,
                    _ => r,
                });
                v = self.arcs[arc ^ 1].to;
            }
            let push = bottleneck.expect("path has an arc");
            let mut v = sink;
            while v != source {
                let arc = via[v];
                self.arcs[arc].flow = self.arcs[arc].flow.clone() + push.clone();
                self.arcs[arc ^ 1].flow = self.arcs[arc ^ 1].flow.clone() - push.clone();
                v = self.arcs[arc ^ 1].to;
            }
            total = total + push;
        }
    }
}

/// Symmetric b-matching on a simple graph: finds `y ≥ 0` on `edges` with
/// `Σ_{e ∋ v} y_e = demand[v]` for every vertex, through flow on the
/// bipartite double cover with supplies `demand/2`. The caller passes the
/// halved demands in `half`; `None` if no exact solution exists.
pub(crate) fn symmetric_b_matching<T: Capacity>(half: &[T], edges: &[(usize, usize)]) -> Option<Vec<T>> {
    let n = half.len();
    let (source, sink) = (2 * n, 2 * n + 1);
    let mut net = FlowNetwork::new(2 * n + 2);
    let mut need = T::zero();
    for (v, h) in half.iter().enumerate() {
        net.add_arc(source, v, h.clone());
        net.add_arc(n + v, sink, h.clone());
        need = need + h.clone();
    }
    let handles: Vec<(usize, usize)> = edges
        .iter()
        .map(|&(u, v)| {
            let cap = half[u].clone().min(half[v].clone());
            (net.add_arc(u, n + v, cap.clone()), net.add_arc(v, n + u, cap))
        })
        .collect();
    if net.max_flow(source, sink) != need {
        return None;
    }
    Some(
        handles
            .iter()
            .map(|&(a, b)| net.flow_on(a).clone() + net.flow_on(b).clone())
            .collect(),
    )
}
