//! Graph signal reconstruction from a small set of sampled vertices.
//!
//! The pipeline has four stages:
//!
//! 1. **Community detection** ([`detect_communities`]): divisive splitting of
//!    the graph driven by modularity. Each candidate split pins the two most
//!    Katz-central sample vertices of a community to opposite sides of a
//!    minimum cut; a split is kept only if it raises global modularity.
//!    Undersized communities are merged into their most Jaccard-similar large
//!    neighbor, and every community is then enlarged by BFS balls so that
//!    neighboring communities overlap.
//! 2. **Local kernel fits** ([`fit_local`]): on each enlarged community, a
//!    regularized least-squares model over the positive-definite kernel
//!    `(eps*I + L)^-s` of the community Laplacian, fitted to the sample
//!    values it contains.
//! 3. **Blending** ([`assemble_global`]): partition-of-unity weights (1/k at
//!    a vertex covered by k communities) combine the local fits into one
//!    global signal.
//! 4. **Error metrics** ([`compute_errors`]): relative max-absolute and
//!    relative root-mean-squared reconstruction errors.
//!
//! [`synth`] generates reproducible test signals and sample sets, [`io`]
//! reads and writes the on-disk formats, and [`datasets`] bundles small
//! built-in graphs.

pub mod community;
pub mod datasets;
pub mod graph;
pub mod io;
pub mod kernel;
pub mod measures;
pub mod mincut;
pub mod pum;
pub mod synth;

pub use community::{
    detect_communities, expand_communities, find_partition, join_communities, split_net,
    CommunityError, CommunityParams, DetectionResult, ExpandedPartition, SplitRecord,
    UNSPLITTABLE_Q,
};
pub use graph::{Graph, GraphError, NodeSet, SignalVector, SparseMatrix, VertexMap};
pub use kernel::{
    build_kernel_columns, evaluate_local, fit_local, graph_fourier, inverse_graph_fourier,
    kernel_columns_solve, kernel_columns_spectral, laplacian_spectrum, KernelError, KernelModel,
    KernelParams, ModelCache, SpectralDecomposition,
};
pub use measures::{
    jaccard_communities, jaccard_nodes, katz_centrality, modularity, KatzParams, MeasureError,
    Partition,
};
pub use mincut::{min_st_cut, Capacity, CapacityGraph, Cut, MinCutError};
pub use pum::{
    assemble_global, build_pu_weights, compute_errors, ErrorReport, PUWeights, PumError,
};
pub use synth::{resolvent_smooth, sample_uniform, synth_signal, SynthError};

/// Coarse classification of failures, used by callers to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    /// Bad input: malformed files, out-of-range ids, invalid parameters.
    Validation,
    /// The computation itself broke down: non-convergence, loss of
    /// positive definiteness, residuals out of tolerance.
    Numerical,
}
