//! Dinic max-flow over a capacitated directed graph.

use std::collections::VecDeque;

use crate::scalar::Scalar;

#[derive(Debug, Clone)]
struct Arc<T> {
    to: usize,
    residual: T,
}

/// Directed flow network. Arcs are stored in pairs: arc `2k` is the forward
/// arc, arc `2k + 1` its reverse.
#[derive(Debug, Clone)]
pub struct FlowNetwork<T> {
    adjacency: Vec<Vec<usize>>,
    arcs: Vec<Arc<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxFlow<T> {
    pub value: T,
    /// `source_side[v]` is true when `v` is reachable from the source in the
    /// final residual graph (the source side of a minimum cut).
    pub source_side: Vec<bool>,
}

impl<T: Scalar> FlowNetwork<T> {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork {
            adjacency: vec![Vec::new(); nodes],
            arcs: Vec::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    /// Adds an arc `u -> v`. Non-positive capacities are ignored.
    pub fn add_edge(&mut self, u: usize, v: usize, capacity: T) {
        if !(capacity > T::zero()) || u == v {
            return;
        }
        let k = self.arcs.len();
        self.arcs.push(Arc {
            to: v,
            residual: capacity,
        });
        self.arcs.push(Arc {
            to: u,
            residual: T::zero(),
        });
        self.adjacency[u].push(k);
        self.adjacency[v].push(k + 1);
    }

    fn levels(&self, source: usize) -> Vec<Option<usize>> {
        let mut level = vec![None; self.node_count()];
        level[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let next = level[u].map(|l| l + 1);
            for &a in &self.adjacency[u] {
                let arc = &self.arcs[a];
                if arc.residual > T::zero() && level[arc.to].is_none() {
                    level[arc.to] = next;
                    queue.push_back(arc.to);
                }
            }
        }
        level
    }

    fn augment(
        &mut self,
        u: usize,
        sink: usize,
        limit: T,
        level: &[Option<usize>],
        cursor: &mut [usize],
    ) -> T {
        if u == sink {
            return limit;
        }
        while cursor[u] < self.adjacency[u].len() {
            let a = self.adjacency[u][cursor[u]];
            let Arc { to, residual } = self.arcs[a];
            let forward = match (level[u], level[to]) {
                (Some(lu), Some(lv)) => lv == lu + 1,
                _ => false,
            };
            if forward && residual > T::zero() {
                let pushed = self.augment(to, sink, limit.min_of(residual), level, cursor);
                if pushed > T::zero() {
                    self.arcs[a].residual = self.arcs[a].residual - pushed;
                    self.arcs[a ^ 1].residual = self.arcs[a ^ 1].residual + pushed;
                    return pushed;
                }
            }
            cursor[u] += 1;
        }
        T::zero()
    }

    /// Computes a maximum `source -> sink` flow. The network keeps its
    /// residual capacities afterwards.
    pub fn max_flow(&mut self, source: usize, sink: usize) -> MaxFlow<T> {
        let mut value = T::zero();
        if source != sink {
            // an upper bound on any single augmentation
            let cap_out = self.adjacency[source]
                .iter()
                .fold(T::zero(), |acc, &a| acc + self.arcs[a].residual);
            loop {
                let level = self.levels(source);
                if level[sink].is_none() {
                    break;
                }
                let mut cursor = vec![0; self.node_count()];
                loop {
                    let pushed = self.augment(source, sink, cap_out, &level, &mut cursor);
                    if !(pushed > T::zero()) {
                        break;
                    }
                    value = value + pushed;
                }
            }
        }
        let source_side = self.levels(source).iter().map(Option::is_some).collect();
        MaxFlow { value, source_side }
    }
}

/// Convenience wrapper: builds a network from `(u, v, capacity)` arcs and
/// returns the maximum flow and minimum cut.
pub fn max_flow<T: Scalar>(
    nodes: usize,
    arcs: &[(usize, usize, T)],
    source: usize,
    sink: usize,
) -> MaxFlow<T> {
    let mut net = FlowNetwork::new(nodes);
    for &(u, v, c) in arcs {
        net.add_edge(u, v, c);
    }
    net.max_flow(source, sink)
}

/// Capacity of the cut induced by `source_side`.
pub fn cut_capacity<T: Scalar>(arcs: &[(usize, usize, T)], source_side: &[bool]) -> T {
    arcs.iter()
        .filter(|&&(u, v, c)| source_side[u] && !source_side[v] && c > T::zero())
        .fold(T::zero(), |acc, &(_, _, c)| acc + c)
}
