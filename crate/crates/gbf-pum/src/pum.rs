//! Partition-of-unity blending of local kernel fits into a global
//! approximant, plus reconstruction error metrics.

use rayon::prelude::*;
use thiserror::Error;

use crate::community::ExpandedPartition;
use crate::graph::{Graph, GraphError, NodeSet, SignalVector};
use crate::kernel::{fit_local, KernelError, KernelParams};
use crate::FailureKind;

#[derive(Debug, Error, PartialEq)]
pub enum PumError {
    #[error("vertex {id} is not covered by any expanded community")]
    UncoveredVertex { id: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("sample vertex {id} out of range for a graph on {n} vertices")]
    SampleOutOfRange { id: usize, n: usize },
    #[error("truth signal is identically zero; relative errors are undefined")]
    ZeroTruth,
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

impl PumError {
    pub fn kind(&self) -> FailureKind {
        match self {
            PumError::Kernel(e) => e.kind(),
            _ => FailureKind::Validation,
        }
    }
}

/// Characteristic-function partition-of-unity weights: a vertex covered by
/// k communities carries weight 1/k in each. The weight is stored as the
/// integer k, so the weights of a vertex sum to the rational k·(1/k) = 1
/// exactly, with no float accumulation.
#[derive(Debug, Clone, PartialEq)]
pub struct PUWeights {
    covering: Vec<Vec<usize>>,
}

impl PUWeights {
    /// Community indices covering vertex `v`, ascending.
    pub fn covering(&self, v: usize) -> &[usize] {
        &self.covering[v]
    }

    /// Number of communities covering vertex `v`.
    pub fn multiplicity(&self, v: usize) -> usize {
        self.covering[v].len()
    }

    /// φ^(j)(v) as a float: 1/multiplicity when community `j` covers `v`,
    /// zero otherwise.
    pub fn weight(&self, j: usize, v: usize) -> f64 {
        if self.covering[v].binary_search(&j).is_ok() {
            1.0 / self.covering[v].len() as f64
        } else {
            0.0
        }
    }

    /// The weight sum at `v` as an exact rational (numerator, denominator).
    pub fn weight_sum(&self, v: usize) -> (usize, usize) {
        let k = self.covering[v].len();
        (k, k)
    }

    pub fn vertex_count(&self) -> usize {
        self.covering.len()
    }
}

/// Builds the covering table of an expanded partition. Every vertex must be
/// covered; an uncovered vertex means a broken expansion upstream and is a
/// hard failure naming that vertex.
pub fn build_pu_weights(ep: &ExpandedPartition) -> Result<PUWeights, PumError> {
    let n = ep.origin().vertex_count();
    let mut covering = vec![Vec::new(); n];
    for (j, community) in ep.communities().iter().enumerate() {
        for v in community.iter() {
            covering[v].push(j);
        }
    }
    if let Some(id) = covering.iter().position(|c| c.is_empty()) {
        return Err(PumError::UncoveredVertex { id });
    }
    Ok(PUWeights { covering })
}

/// Fits one kernel model per expanded community and blends the local
/// evaluations with the partition-of-unity weights:
/// x_*(v) = Σ_j φ^(j)(v) · x_*^(j)(v).
///
/// A community containing no sample vertex gets the identically-zero local
/// approximant and a warning; it still participates in the blend.
pub fn assemble_global(
    g: &Graph,
    ep: &ExpandedPartition,
    w: &NodeSet,
    x_w: &[f64],
    kp: &KernelParams,
) -> Result<SignalVector, PumError> {
    kp.validate()?;
    let n = g.node_count();
    if x_w.len() != w.len() {
        return Err(PumError::LengthMismatch { expected: w.len(), got: x_w.len() });
    }
    if let Some(max) = w.max_id() {
        if max >= n {
            return Err(PumError::SampleOutOfRange { id: max, n });
        }
    }
    let weights = build_pu_weights(ep)?;

    let locals: Vec<Option<Vec<f64>>> = ep
        .communities()
        .par_iter()
        .map(|community| -> Result<Option<Vec<f64>>, PumError> {
            let w_j = community.intersection(w);
            if w_j.is_empty() {
                return Ok(None);
            }
            let x_wj: Vec<f64> = w_j
                .iter()
                .map(|id| x_w[w.ids().binary_search(&id).expect("w_j is a subset of w")])
                .collect();
            let (sub, _) = g.induced_subgraph(community)?;
            let model = fit_local(&sub, community, &x_wj, &w_j, kp)?;
            Ok(Some(model.evaluate_all()))
        })
        .collect::<Result<Vec<_>, _>>()?;

    for (j, local) in locals.iter().enumerate() {
        if local.is_none() {
            log::warn!(
                "community {j} contains no sample vertex; its local approximant is zero"
            );
        }
    }

    let mut sums = vec![0.0; n];
    for (community, local) in ep.communities().iter().zip(&locals) {
        let Some(values) = local else { continue };
        for (pos, v) in community.iter().enumerate() {
            sums[v] += values[pos];
        }
    }
    let out: Vec<f64> =
        sums.iter().enumerate().map(|(v, s)| s / weights.multiplicity(v) as f64).collect();
    Ok(SignalVector::new(out))
}

/// Reconstruction quality of an approximant against the true signal.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    /// max|e| / max|truth|.
    pub rmae: f64,
    /// ‖e‖₂ / ‖truth‖₂.
    pub rrmse: f64,
    /// |truth − approx| per vertex.
    pub per_vertex: Vec<f64>,
    /// Wall-clock seconds attributed to producing the approximant.
    pub elapsed_s: f64,
}

/// Relative error metrics over all vertices.
pub fn compute_errors(
    truth: &SignalVector,
    approx: &SignalVector,
    elapsed_s: f64,
) -> Result<ErrorReport, PumError> {
    if truth.len() != approx.len() {
        return Err(PumError::LengthMismatch { expected: truth.len(), got: approx.len() });
    }
    let max_truth = truth.max_abs();
    if max_truth == 0.0 {
        return Err(PumError::ZeroTruth);
    }
    let per_vertex: Vec<f64> = truth
        .as_slice()
        .iter()
        .zip(approx.as_slice())
        .map(|(t, a)| (t - a).abs())
        .collect();
    let max_err = per_vertex.iter().fold(0.0f64, |m, &e| m.max(e));
    let err_norm = per_vertex.iter().map(|e| e * e).sum::<f64>().sqrt();
    Ok(ErrorReport {
        rmae: max_err / max_truth,
        rrmse: err_norm / truth.norm2(),
        per_vertex,
        elapsed_s,
    })
}
