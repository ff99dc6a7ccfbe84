//! Centrality and community-quality functionals.

use thiserror::Error;

use crate::graph::{Graph, NodeSet, SignalVector};
use crate::FailureKind;

/// Errors from centrality and partition-quality computations.
#[derive(Debug, Error, PartialEq)]
pub enum MeasureError {
    #[error("attenuation factor must be positive, got {0}")]
    BadAlpha(f64),
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("centrality iteration did not converge within {max_iter} steps (residual {residual:.3e})")]
    KatzNonConvergence { max_iter: usize, residual: f64 },
    #[error("modularity requires a graph with at least one edge")]
    NoEdges,
    #[error("community is empty")]
    EmptyCommunity,
    #[error("community {index} in the partition is empty")]
    EmptyCommunityAt { index: usize },
    #[error("vertex {id} appears in more than one community")]
    OverlappingCommunities { id: usize },
    #[error("vertex {id} is not covered by any community")]
    UncoveredVertex { id: usize },
    #[error("community vertex {id} out of range for a graph on {n} vertices")]
    PartitionVertexOutOfRange { id: usize, n: usize },
}

impl MeasureError {
    pub fn kind(&self) -> FailureKind {
        match self {
            MeasureError::KatzNonConvergence { .. } => FailureKind::Numerical,
            _ => FailureKind::Validation,
        }
    }
}

/// Parameters of the Katz centrality iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KatzParams {
    /// Requested attenuation factor; clamped to `0.9 / lambda_max(A)` when
    /// the request would make the walk series diverge.
    pub alpha: f64,
    pub max_iter: usize,
    /// Max-norm threshold on successive iterates.
    pub tol: f64,
}

impl Default for KatzParams {
    fn default() -> Self {
        KatzParams { alpha: 0.5, max_iter: 10_000, tol: 1e-12 }
    }
}

impl KatzParams {
    pub fn validate(&self) -> Result<(), MeasureError> {
        if self.alpha.is_nan() || self.alpha <= 0.0 {
            return Err(MeasureError::BadAlpha(self.alpha));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(MeasureError::BadTolerance(self.tol));
        }
        Ok(())
    }
}

/// Disjoint cover of a graph's vertices by nonempty communities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    communities: Vec<NodeSet>,
}

impl Partition {
    /// Validates that `communities` are nonempty, pairwise disjoint, and
    /// cover `0..n` exactly.
    pub fn new(communities: Vec<NodeSet>, n: usize) -> Result<Partition, MeasureError> {
        let mut owner = vec![usize::MAX; n];
        for (index, c) in communities.iter().enumerate() {
            if c.is_empty() {
                return Err(MeasureError::EmptyCommunityAt { index });
            }
            for id in c.iter() {
                if id >= n {
                    return Err(MeasureError::PartitionVertexOutOfRange { id, n });
                }
                if owner[id] != usize::MAX {
                    return Err(MeasureError::OverlappingCommunities { id });
                }
                owner[id] = index;
            }
        }
        if let Some(id) = owner.iter().position(|&o| o == usize::MAX) {
            return Err(MeasureError::UncoveredVertex { id });
        }
        Ok(Partition { communities })
    }

    /// The trivial partition holding all of `0..n` in one community.
    pub fn single(n: usize) -> Partition {
        Partition { communities: vec![NodeSet::from_sorted((0..n).collect())] }
    }

    pub(crate) fn from_parts_unchecked(communities: Vec<NodeSet>) -> Partition {
        Partition { communities }
    }

    pub fn communities(&self) -> &[NodeSet] {
        &self.communities
    }

    pub fn len(&self) -> usize {
        self.communities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.communities.is_empty()
    }

    /// Total vertex count across communities.
    pub fn vertex_count(&self) -> usize {
        self.communities.iter().map(NodeSet::len).sum()
    }

    /// Community index of every vertex in `0..n`.
    ///
    /// # Panics
    /// If the partition does not cover `0..n` exactly.
    pub fn membership(&self, n: usize) -> Vec<usize> {
        let mut owner = vec![usize::MAX; n];
        for (index, c) in self.communities.iter().enumerate() {
            for id in c.iter() {
                owner[id] = index;
            }
        }
        assert!(owner.iter().all(|&o| o != usize::MAX), "partition does not cover the graph");
        owner
    }
}

/// Katz centrality of every vertex: the attenuated count of walks of all
/// lengths arriving at the vertex, computed by the fixed-point iteration
/// `c <- alpha * A * (c + 1)`.
///
/// A requested `alpha` at or above the convergence radius is clamped to
/// `0.9 / lambda_max(A)` (logged at debug level).
pub fn katz_centrality(g: &Graph, params: &KatzParams) -> Result<SignalVector, MeasureError> {
    params.validate()?;
    let n = g.node_count();
    if g.edge_count() == 0 {
        return Ok(SignalVector::zeros(n));
    }

    let lambda_max = adjacency_spectral_radius(g);
    let mut alpha = params.alpha;
    if alpha * lambda_max >= 0.9 {
        alpha = 0.9 / lambda_max;
        log::debug!(
            "katz attenuation clamped from {} to {alpha} (lambda_max ~ {lambda_max:.6})",
            params.alpha
        );
    }

    let degrees: Vec<f64> = (0..n).map(|u| g.degree(u) as f64).collect();
    let mut c = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for _ in 0..params.max_iter {
        for u in 0..n {
            let walk: f64 = g.neighbors(u).iter().map(|&v| c[v]).sum();
            next[u] = alpha * (walk + degrees[u]);
        }
        residual =
            c.iter().zip(&next).fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
        std::mem::swap(&mut c, &mut next);
        if residual < params.tol {
            return Ok(SignalVector::new(c));
        }
    }
    Err(MeasureError::KatzNonConvergence { max_iter: params.max_iter, residual })
}

/// Largest adjacency eigenvalue, estimated by power iteration on `A + I`
/// (the shift keeps the iteration convergent on bipartite graphs).
fn adjacency_spectral_radius(g: &Graph) -> f64 {
    let n = g.node_count();
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut y = vec![0.0; n];
    let mut estimate = 0.0;
    for _ in 0..10_000 {
        for u in 0..n {
            y[u] = g.neighbors(u).iter().map(|&v| x[v]).sum::<f64>() + x[u];
        }
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        for u in 0..n {
            x[u] = y[u] / norm;
        }
        let next = norm - 1.0;
        if (next - estimate).abs() < 1e-12 * estimate.max(1.0) {
            return next;
        }
        estimate = next;
    }
    estimate
}

/// Modularity of a partition: sum over communities of
/// `e_c / m - (d_c / 2m)^2`, where `e_c` counts internal edges and `d_c`
/// sums member degrees.
///
/// The partition must cover the graph's vertex set exactly.
pub fn modularity(g: &Graph, p: &Partition) -> Result<f64, MeasureError> {
    let m = g.edge_count();
    if m == 0 {
        return Err(MeasureError::NoEdges);
    }
    let owner = p.membership(g.node_count());
    let mut internal = vec![0u64; p.len()];
    let mut degree_sum = vec![0u64; p.len()];
    for u in 0..g.node_count() {
        degree_sum[owner[u]] += g.degree(u) as u64;
        for &v in g.neighbors(u) {
            if v > u && owner[u] == owner[v] {
                internal[owner[u]] += 1;
            }
        }
    }
    let m = m as f64;
    let q = internal
        .iter()
        .zip(&degree_sum)
        .map(|(&e, &d)| {
            let frac = d as f64 / (2.0 * m);
            e as f64 / m - frac * frac
        })
        .sum();
    Ok(q)
}

/// Jaccard similarity of two vertices' neighborhoods, with `u` and `v`
/// themselves excluded from both sets. An empty union yields 0.
pub fn jaccard_nodes(g: &Graph, u: usize, v: usize) -> f64 {
    let mut inter = 0usize;
    let mut union = 0usize;
    let nu = g.neighbors(u);
    let nv = g.neighbors(v);
    let (mut i, mut j) = (0, 0);
    let skip = |x: usize| x == u || x == v;
    while i < nu.len() || j < nv.len() {
        if i < nu.len() && skip(nu[i]) {
            i += 1;
            continue;
        }
        if j < nv.len() && skip(nv[j]) {
            j += 1;
            continue;
        }
        let take_left = j == nv.len() || (i < nu.len() && nu[i] <= nv[j]);
        let take_right = i == nu.len() || (j < nv.len() && nv[j] <= nu[i]);
        if take_left && take_right {
            inter += 1;
            i += 1;
            j += 1;
        } else if take_left {
            i += 1;
        } else {
            j += 1;
        }
        union += 1;
    }
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Mean node-level Jaccard similarity over all ordered vertex pairs of two
/// communities.
pub fn jaccard_communities(g: &Graph, a: &NodeSet, b: &NodeSet) -> Result<f64, MeasureError> {
    if a.is_empty() || b.is_empty() {
        return Err(MeasureError::EmptyCommunity);
    }
    let mut total = 0.0;
    for u in a.iter() {
        for v in b.iter() {
            total += jaccard_nodes(g, u, v);
        }
    }
    Ok(total / (a.len() * b.len()) as f64)
}
