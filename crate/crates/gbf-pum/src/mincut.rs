//! Maximum flow / minimum s-v cut on undirected capacitated graphs.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::graph::{Graph, NodeSet};
use crate::FailureKind;

/// Residual amounts below this are treated as exhausted; capacities here are
/// small integers plus one sentinel, so rounding never gets near it.
const RESIDUAL_EPS: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum MinCutError {
    #[error("source and sink must differ, both are {0}")]
    SameEndpoints(usize),
    #[error("vertex {id} out of range for a graph on {n} vertices")]
    VertexOutOfRange { id: usize, n: usize },
    #[error("no edge ({u}, {v}) to assign a capacity to")]
    NoSuchEdge { u: usize, v: usize },
    #[error("capacity of edge ({u}, {v}) must be nonnegative, got {cap}")]
    NegativeCapacity { u: usize, v: usize, cap: f64 },
    #[error("every cut separating the endpoints crosses an infinite-capacity edge")]
    NoFiniteCut,
}

impl MinCutError {
    pub fn kind(&self) -> FailureKind {
        FailureKind::Validation
    }
}

/// Per-edge capacity: a nonnegative amount or an uncuttable sentinel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Capacity {
    Finite(f64),
    Infinite,
}

/// An undirected graph with one capacity per edge.
#[derive(Debug, Clone)]
pub struct CapacityGraph {
    graph: Graph,
    edges: Vec<(usize, usize)>,
    caps: Vec<Capacity>,
    index: HashMap<(usize, usize), usize>,
}

impl CapacityGraph {
    /// Wraps a graph with unit capacity on every edge.
    pub fn unit(graph: Graph) -> CapacityGraph {
        let edges: Vec<(usize, usize)> = graph.edges().collect();
        let index = edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let caps = vec![Capacity::Finite(1.0); edges.len()];
        CapacityGraph { graph, edges, caps, index }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    /// Overrides the capacity of edge `(u, v)`.
    pub fn set_capacity(&mut self, u: usize, v: usize, cap: Capacity) -> Result<(), MinCutError> {
        if let Capacity::Finite(c) = cap {
            if c.is_nan() || c < 0.0 {
                return Err(MinCutError::NegativeCapacity { u, v, cap: c });
            }
        }
        let key = (u.min(v), u.max(v));
        match self.index.get(&key) {
            Some(&i) => {
                self.caps[i] = cap;
                Ok(())
            }
            None => Err(MinCutError::NoSuchEdge { u, v }),
        }
    }

    pub fn capacity(&self, u: usize, v: usize) -> Option<Capacity> {
        let key = (u.min(v), u.max(v));
        self.index.get(&key).map(|&i| self.caps[i])
    }

    /// Edges in canonical `(u, v)`, `u < v` order with their capacities.
    pub fn edges(&self) -> impl Iterator<Item = ((usize, usize), Capacity)> + '_ {
        self.edges.iter().copied().zip(self.caps.iter().copied())
    }

    fn finite_total(&self) -> f64 {
        self.caps
            .iter()
            .map(|c| match c {
                Capacity::Finite(x) => *x,
                Capacity::Infinite => 0.0,
            })
            .sum()
    }
}

/// A minimum s-v cut: the two sides and the total crossing capacity.
#[derive(Debug, Clone, PartialEq)]
pub struct Cut {
    pub source_side: NodeSet,
    pub sink_side: NodeSet,
    pub value: f64,
}

struct Dinic {
    n: usize,
    to: Vec<usize>,
    cap: Vec<f64>,
    adj: Vec<Vec<usize>>,
}

impl Dinic {
    fn new(n: usize) -> Dinic {
        Dinic { n, to: Vec::new(), cap: Vec::new(), adj: vec![Vec::new(); n] }
    }

    /// Adds an undirected edge as a pair of opposed arcs, each the other's
    /// reverse (`rev(e) = e ^ 1`).
    fn add_undirected(&mut self, u: usize, v: usize, c: f64) {
        let e = self.to.len();
        self.to.push(v);
        self.cap.push(c);
        self.adj[u].push(e);
        self.to.push(u);
        self.cap.push(c);
        self.adj[v].push(e + 1);
    }

    fn bfs_levels(&self, s: usize) -> Vec<i64> {
        let mut level = vec![-1i64; self.n];
        level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.adj[u] {
                let w = self.to[e];
                if self.cap[e] > RESIDUAL_EPS && level[w] < 0 {
                    level[w] = level[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        level
    }

    fn dfs_augment(
        &mut self,
        u: usize,
        t: usize,
        pushed: f64,
        level: &[i64],
        iter: &mut [usize],
    ) -> f64 {
        if u == t {
            return pushed;
        }
        while iter[u] < self.adj[u].len() {
            let e = self.adj[u][iter[u]];
            let w = self.to[e];
            if self.cap[e] > RESIDUAL_EPS && level[w] == level[u] + 1 {
                let amount =
                    self.dfs_augment(w, t, pushed.min(self.cap[e]), level, iter);
                if amount > 0.0 {
                    self.cap[e] -= amount;
                    self.cap[e ^ 1] += amount;
                    return amount;
                }
            }
            iter[u] += 1;
        }
        0.0
    }

    fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let mut flow = 0.0;
        loop {
            let level = self.bfs_levels(s);
            if level[t] < 0 {
                return flow;
            }
            let mut iter = vec![0usize; self.n];
            loop {
                let pushed = self.dfs_augment(s, t, f64::INFINITY, &level, &mut iter);
                if pushed <= 0.0 {
                    break;
                }
                flow += pushed;
            }
        }
    }

    /// Vertices reachable from `s` along arcs with residual capacity.
    fn residual_reachable(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.adj[u] {
                let w = self.to[e];
                if self.cap[e] > RESIDUAL_EPS && !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen
    }
}

/// Minimum s-v cut by blocking-flow maximum flow.
///
/// Infinite capacities enter the flow network as (sum of finite capacities)
/// plus one, which no finite minimum cut can contain. The returned source
/// side is the set of vertices reachable from `s` in the residual network at
/// optimality, the canonical minimum cut nearest `s`. If every separating
/// cut crosses an infinite edge, [`MinCutError::NoFiniteCut`] is returned.
pub fn min_st_cut(cg: &CapacityGraph, s: usize, v: usize) -> Result<Cut, MinCutError> {
    let n = cg.graph().node_count();
    for id in [s, v] {
        if id >= n {
            return Err(MinCutError::VertexOutOfRange { id, n });
        }
    }
    if s == v {
        return Err(MinCutError::SameEndpoints(s));
    }

    let finite_total = cg.finite_total();
    let infinite_value = finite_total + 1.0;
    let mut net = Dinic::new(n);
    for ((u, w), cap) in cg.edges() {
        let c = match cap {
            Capacity::Finite(c) => c,
            Capacity::Infinite => infinite_value,
        };
        net.add_undirected(u, w, c);
    }

    let flow = net.max_flow(s, v);
    if flow > finite_total + 0.5 {
        return Err(MinCutError::NoFiniteCut);
    }

    let reachable = net.residual_reachable(s);
    debug_assert!(reachable[s] && !reachable[v]);
    let source: Vec<usize> = (0..n).filter(|&u| reachable[u]).collect();
    let sink: Vec<usize> = (0..n).filter(|&u| !reachable[u]).collect();
    Ok(Cut {
        source_side: NodeSet::from_sorted(source),
        sink_side: NodeSet::from_sorted(sink),
        value: flow,
    })
}
