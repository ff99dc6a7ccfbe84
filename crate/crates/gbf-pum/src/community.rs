//! Divisive community detection bound to a sample set: modularity-guided
//! splitting, small-community merging, and BFS-ball expansion.

use thiserror::Error;

use crate::graph::{Graph, GraphError, NodeSet};
use crate::measures::{
    jaccard_communities, katz_centrality, modularity, KatzParams, MeasureError, Partition,
};
use crate::mincut::{min_st_cut, Capacity, CapacityGraph, MinCutError};
use crate::FailureKind;

/// Sentinel modularity for a community that cannot be split; strictly below
/// the -1/2 floor of any real partition, so greedy acceptance never takes it.
pub const UNSPLITTABLE_Q: f64 = -1.0;

#[derive(Debug, Error, PartialEq)]
pub enum CommunityError {
    #[error("ratio threshold must lie in [0, 1], got {0}")]
    RatioOutOfRange(f64),
    #[error("expansion radii must satisfy dmax >= dmin, got dmax={dmax} dmin={dmin}")]
    BadExpansionRadii { dmax: usize, dmin: usize },
    #[error("small-community fraction must lie in (0, 1), got {0}")]
    BadSmallFraction(f64),
    #[error("sample set is empty")]
    EmptySampleSet,
    #[error("sample vertex {id} out of range for a graph on {n} vertices")]
    SampleOutOfRange { id: usize, n: usize },
    #[error("graph must be connected")]
    DisconnectedGraph,
    #[error("community holds {have} sample vertices, need at least 2 to split")]
    TooFewSamples { have: usize },
    #[error("community induces a disconnected subgraph")]
    DisconnectedCommunity,
    #[error("community is not a member of the partition")]
    CommunityNotInPartition,
    #[error("expanded community list does not match its origin partition")]
    ExpansionMismatch,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Cut(#[from] MinCutError),
}

impl CommunityError {
    pub fn kind(&self) -> FailureKind {
        match self {
            CommunityError::Measure(e) => e.kind(),
            CommunityError::Cut(e) => e.kind(),
            _ => FailureKind::Validation,
        }
    }
}

/// Knobs of the detection pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommunityParams {
    /// Inside-neighbor ratio below which a vertex is boundary-heavy and
    /// expands with the larger radius.
    pub r: f64,
    /// BFS radius for boundary-heavy vertices.
    pub dmax: usize,
    /// BFS radius for interior vertices.
    pub dmin: usize,
    /// A community is small when its size is below this fraction of n.
    pub small_fraction: f64,
}

impl Default for CommunityParams {
    fn default() -> Self {
        CommunityParams { r: 0.75, dmax: 6, dmin: 4, small_fraction: 0.02 }
    }
}

impl CommunityParams {
    pub fn validate(&self) -> Result<(), CommunityError> {
        if !(0.0..=1.0).contains(&self.r) {
            return Err(CommunityError::RatioOutOfRange(self.r));
        }
        if self.dmax < self.dmin {
            return Err(CommunityError::BadExpansionRadii { dmax: self.dmax, dmin: self.dmin });
        }
        if !(self.small_fraction > 0.0 && self.small_fraction < 1.0) {
            return Err(CommunityError::BadSmallFraction(self.small_fraction));
        }
        Ok(())
    }
}

/// Overlapping communities produced by expansion, aligned index-by-index
/// with the disjoint partition they grew from.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpandedPartition {
    communities: Vec<NodeSet>,
    origin: Partition,
}

impl ExpandedPartition {
    /// Validates that each expanded community is a superset of its origin
    /// community.
    pub fn new(communities: Vec<NodeSet>, origin: Partition) -> Result<Self, CommunityError> {
        if communities.len() != origin.len() {
            return Err(CommunityError::ExpansionMismatch);
        }
        for (exp, orig) in communities.iter().zip(origin.communities()) {
            if !orig.iter().all(|v| exp.contains(v)) {
                return Err(CommunityError::ExpansionMismatch);
            }
        }
        Ok(ExpandedPartition { communities, origin })
    }

    /// Builds without invariant checks; for tests that need to violate them.
    #[doc(hidden)]
    pub fn from_parts_unchecked(communities: Vec<NodeSet>, origin: Partition) -> Self {
        ExpandedPartition { communities, origin }
    }

    pub fn communities(&self) -> &[NodeSet] {
        &self.communities
    }

    pub fn origin(&self) -> &Partition {
        &self.origin
    }

    pub fn len(&self) -> usize {
        self.communities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.communities.is_empty()
    }
}

/// One accepted split in the detection loop.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitRecord {
    pub parent: NodeSet,
    pub left: NodeSet,
    pub right: NodeSet,
    pub q_before: f64,
    pub q_after: f64,
}

/// Output of [`detect_communities`].
#[derive(Debug, Clone)]
pub struct DetectionResult {
    /// Disjoint communities after merging undersized ones.
    pub partition: Partition,
    /// The same communities enlarged by BFS balls.
    pub expanded: ExpandedPartition,
    /// Modularity of `partition`.
    pub modularity: f64,
    /// Accepted splits in acceptance order.
    pub splits: Vec<SplitRecord>,
    /// Number of passes the splitting loop ran.
    pub passes: usize,
}

/// Splits a community in two by a pinned minimum cut.
///
/// The two most Katz-central sample vertices of the community (centrality on
/// the induced subgraph, ties to the smaller vertex id) become the cut
/// endpoints s and v. Edges from s to neighbors it does not share with v get
/// infinite capacity, and symmetrically for v, so the cut cannot simply
/// shave off either endpoint's private neighborhood. Returns the s side
/// first.
pub fn split_net(
    g: &Graph,
    community: &NodeSet,
    w: &NodeSet,
) -> Result<(NodeSet, NodeSet), CommunityError> {
    let samples = community.intersection(w);
    if samples.len() < 2 {
        return Err(CommunityError::TooFewSamples { have: samples.len() });
    }
    let (sub, map) = g.induced_subgraph(community)?;
    if !sub.is_connected() {
        return Err(CommunityError::DisconnectedCommunity);
    }

    let centrality = katz_centrality(&sub, &KatzParams::default())?;
    let mut ranked: Vec<usize> = samples
        .iter()
        .map(|gid| map.to_local(gid).expect("sample inside community"))
        .collect();
    ranked.sort_by(|&a, &b| {
        centrality[b].partial_cmp(&centrality[a]).unwrap().then(a.cmp(&b))
    });
    let (s, v) = (ranked[0], ranked[1]);

    let ns: Vec<usize> = sub.neighbors(s).to_vec();
    let nv: Vec<usize> = sub.neighbors(v).to_vec();
    let mut cg = CapacityGraph::unit(sub);
    for &u in &ns {
        if u != v && nv.binary_search(&u).is_err() {
            cg.set_capacity(s, u, Capacity::Infinite)?;
        }
    }
    for &u in &nv {
        if u != s && ns.binary_search(&u).is_err() {
            cg.set_capacity(v, u, Capacity::Infinite)?;
        }
    }

    let cut = min_st_cut(&cg, s, v)?;
    Ok((map.set_to_global(&cut.source_side), map.set_to_global(&cut.sink_side)))
}

/// Replaces `community` in `p` by its two split halves and scores the result.
///
/// When the community cannot be split (fewer than two samples, disconnected,
/// or no finite pinned cut), the partition is returned unchanged with the
/// [`UNSPLITTABLE_Q`] sentinel.
pub fn find_partition(
    g: &Graph,
    p: &Partition,
    community: &NodeSet,
    w: &NodeSet,
) -> Result<(Partition, f64), CommunityError> {
    let index = p
        .communities()
        .iter()
        .position(|c| c == community)
        .ok_or(CommunityError::CommunityNotInPartition)?;
    match try_split(g, p, index, w)? {
        Some((candidate, q, _, _)) => Ok((candidate, q)),
        None => Ok((p.clone(), UNSPLITTABLE_Q)),
    }
}

/// Split attempt used by the detection loop. `None` means unsplittable.
fn try_split(
    g: &Graph,
    p: &Partition,
    index: usize,
    w: &NodeSet,
) -> Result<Option<(Partition, f64, NodeSet, NodeSet)>, CommunityError> {
    let community = &p.communities()[index];
    let (left, right) = match split_net(g, community, w) {
        Ok(halves) => halves,
        Err(
            CommunityError::TooFewSamples { .. } | CommunityError::DisconnectedCommunity,
        ) => return Ok(None),
        Err(CommunityError::Cut(MinCutError::NoFiniteCut)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let mut communities: Vec<NodeSet> = p.communities().to_vec();
    communities.remove(index);
    communities.push(left.clone());
    communities.push(right.clone());
    let candidate = Partition::from_parts_unchecked(communities);
    let q = modularity(g, &candidate)?;
    Ok(Some((candidate, q, left, right)))
}

/// Runs the full detection pipeline: greedy modularity-improving splits,
/// then merging of undersized communities, then expansion.
///
/// Splitting starts from the whole vertex set and repeats passes while the
/// community count does not exceed the sample count and the previous pass
/// improved modularity. Within a pass, each community present at pass start
/// is tried once and a split is kept immediately whenever it beats the
/// current modularity.
pub fn detect_communities(
    g: &Graph,
    w: &NodeSet,
    params: &CommunityParams,
) -> Result<DetectionResult, CommunityError> {
    params.validate()?;
    if w.is_empty() {
        return Err(CommunityError::EmptySampleSet);
    }
    let n = g.node_count();
    if let Some(max) = w.max_id() {
        if max >= n {
            return Err(CommunityError::SampleOutOfRange { id: max, n });
        }
    }
    if !g.is_connected() {
        return Err(CommunityError::DisconnectedGraph);
    }

    let mut partition = Partition::single(n);
    let mut q = modularity(g, &partition)?;
    let mut q_prev = -1.0;
    let mut splits = Vec::new();
    let mut passes = 0usize;

    while partition.len() <= w.len() && q_prev < q {
        q_prev = q;
        passes += 1;
        let snapshot: Vec<NodeSet> = partition.communities().to_vec();
        for community in &snapshot {
            let Some(index) = partition.communities().iter().position(|c| c == community)
            else {
                continue;
            };
            if let Some((candidate, q_candidate, left, right)) =
                try_split(g, &partition, index, w)?
            {
                if q_candidate > q {
                    splits.push(SplitRecord {
                        parent: community.clone(),
                        left,
                        right,
                        q_before: q,
                        q_after: q_candidate,
                    });
                    partition = candidate;
                    q = q_candidate;
                }
            }
        }
    }

    let partition = join_communities(g, &partition, params.small_fraction);
    let modularity = modularity(g, &partition)?;
    let expanded = expand_communities(g, &partition, params);
    Ok(DetectionResult { partition, expanded, modularity, splits, passes })
}

/// Merges every community smaller than `small_fraction * n` into the big
/// community it is most Jaccard-similar to (ties to the smallest index).
/// If every community is small, the largest one (ties to the smallest
/// index) is promoted to big first. Big communities keep their relative
/// order.
pub fn join_communities(g: &Graph, p: &Partition, small_fraction: f64) -> Partition {
    let n = g.node_count();
    let threshold = small_fraction * n as f64;
    let mut big: Vec<usize> = Vec::new();
    let mut small: Vec<usize> = Vec::new();
    for (i, c) in p.communities().iter().enumerate() {
        if (c.len() as f64) < threshold {
            small.push(i);
        } else {
            big.push(i);
        }
    }
    if small.is_empty() {
        return p.clone();
    }
    if big.is_empty() {
        let mut largest = small[0];
        for &i in &small {
            if p.communities()[i].len() > p.communities()[largest].len() {
                largest = i;
            }
        }
        small.retain(|&i| i != largest);
        big.push(largest);
        log::debug!("all communities undersized; promoted community {largest}");
    }

    let mut current: Vec<NodeSet> = p.communities().to_vec();
    for &si in &small {
        let mut best = big[0];
        let mut best_score = f64::NEG_INFINITY;
        for &bi in &big {
            let score = jaccard_communities(g, &current[si], &current[bi])
                .expect("communities are nonempty");
            if score > best_score {
                best_score = score;
                best = bi;
            }
        }
        current[best] = current[best].union(&current[si]);
        log::debug!(
            "merged community {si} ({} vertices) into {best} (similarity {best_score:.4})",
            p.communities()[si].len()
        );
    }

    let merged: Vec<NodeSet> = big.iter().map(|&i| current[i].clone()).collect();
    Partition::new(merged, n).expect("merging preserves the disjoint cover")
}

/// Enlarges every community with BFS balls grown from its members in the
/// full graph. A vertex whose inside-neighbor fraction is below `params.r`
/// contributes a ball of radius `params.dmax`, any other member a ball of
/// radius `params.dmin`.
pub fn expand_communities(g: &Graph, p: &Partition, params: &CommunityParams) -> ExpandedPartition {
    let n = g.node_count();
    let mut expanded = Vec::with_capacity(p.len());
    for community in p.communities() {
        let mask = community.to_mask(n);
        let mut grown = mask.clone();
        for v in community.iter() {
            let degree = g.degree(v);
            let inside = g.neighbors(v).iter().filter(|&&u| mask[u]).count();
            let radius = if (inside as f64) < params.r * degree as f64 {
                params.dmax
            } else {
                params.dmin
            };
            for u in g.bfs_within(v, radius).iter() {
                grown[u] = true;
            }
        }
        let ids: Vec<usize> = (0..n).filter(|&u| grown[u]).collect();
        expanded.push(NodeSet::from_sorted(ids));
    }
    ExpandedPartition::new(expanded, p.clone()).expect("expansion grows supersets")
}
