//! Laplacian-shift kernels, the graph Fourier transform, and local
//! regularized least-squares fitting.
//!
//! The kernel is K = (εI + L)^{-s}. Integer exponents are served by sparse
//! conjugate-gradient solves; anything else goes through the dense
//! eigendecomposition. Both routes stay available for cross-checking.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, GraphError, NodeSet, SignalVector, SparseMatrix};
use crate::FailureKind;

/// Relative tolerance of the conjugate-gradient kernel solves.
const CG_TOL: f64 = 1e-13;

/// Orthonormality slack accepted by [`SpectralDecomposition::new`].
const ORTHONORMALITY_TOL: f64 = 1e-8;

#[derive(Debug, Error, PartialEq)]
pub enum KernelError {
    #[error("matrix is not symmetric")]
    NonSymmetric,
    #[error("eigenvalues are not in nondecreasing order")]
    UnsortedEigenvalues,
    #[error("eigenvector matrix is not orthonormal (deviation {deviation:.3e})")]
    NotOrthonormal { deviation: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("kernel exponent must be positive, got {0}")]
    BadExponent(f64),
    #[error("regularization weight must be finite and nonnegative, got {0}")]
    BadRegularization(f64),
    #[error("kernel shift must be finite, got {0}")]
    BadShift(f64),
    #[error(
        "kernel is not positive definite: epsilon {epsilon} + smallest eigenvalue \
         {lambda_min} is not positive"
    )]
    NotPositiveDefinite { epsilon: f64, lambda_min: f64 },
    #[error("sparse solve path needs a positive integer exponent, got {0}")]
    NonIntegerExponent(f64),
    #[error("sample set is empty")]
    EmptySampleSet,
    #[error("sample vertex {id} is not in the community")]
    SampleOutsideCommunity { id: usize },
    #[error("vertex {id} is not in the model's community")]
    VertexOutsideCommunity { id: usize },
    #[error("community has {expected} vertices but the graph has {got}")]
    CommunitySizeMismatch { expected: usize, got: usize },
    #[error("Gram block is not positive definite; shift or exponent too aggressive")]
    GramNotPositiveDefinite,
    #[error("kernel solve did not converge (relative residual {residual:.3e})")]
    SolveNonConvergence { residual: f64 },
    #[error("fit residual {residual:.3e} exceeds tolerance")]
    FitResidual { residual: f64 },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

impl KernelError {
    pub fn kind(&self) -> FailureKind {
        match self {
            KernelError::GramNotPositiveDefinite
            | KernelError::SolveNonConvergence { .. }
            | KernelError::FitResidual { .. } => FailureKind::Numerical,
            _ => FailureKind::Validation,
        }
    }
}

/// Full symmetric eigendecomposition with eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    u: DMatrix<f64>,
}

impl SpectralDecomposition {
    /// Validates ordering and orthonormality of the supplied basis.
    pub fn new(eigenvalues: Vec<f64>, u: DMatrix<f64>) -> Result<Self, KernelError> {
        let n = eigenvalues.len();
        if u.nrows() != n || u.ncols() != n {
            return Err(KernelError::LengthMismatch { expected: n, got: u.nrows() });
        }
        if eigenvalues.windows(2).any(|w| w[0] > w[1]) {
            return Err(KernelError::UnsortedEigenvalues);
        }
        let gram = u.transpose() * &u;
        let deviation = (&gram - DMatrix::<f64>::identity(n, n)).abs().max();
        if deviation > ORTHONORMALITY_TOL {
            return Err(KernelError::NotOrthonormal { deviation });
        }
        Ok(SpectralDecomposition { eigenvalues, u })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// The orthonormal eigenvector matrix, one eigenvector per column.
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

/// Kernel shape and fit regularization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    /// Spectral shift; must keep every shifted eigenvalue positive.
    pub epsilon: f64,
    /// Inverse power applied to the shifted Laplacian.
    pub s: f64,
    /// Least-squares regularization weight.
    pub gamma: f64,
}

impl Default for KernelParams {
    fn default() -> Self {
        KernelParams { epsilon: 1.0, s: 1.0, gamma: 1e-10 }
    }
}

impl KernelParams {
    pub fn validate(&self) -> Result<(), KernelError> {
        if !self.epsilon.is_finite() {
            return Err(KernelError::BadShift(self.epsilon));
        }
        if !(self.s > 0.0 && self.s.is_finite()) {
            return Err(KernelError::BadExponent(self.s));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(KernelError::BadRegularization(self.gamma));
        }
        Ok(())
    }

    /// The exponent as a small positive integer, if it is one.
    fn integer_exponent(&self) -> Option<u32> {
        let rounded = self.s.round();
        if (self.s - rounded).abs() < 1e-12 && (1.0..=64.0).contains(&rounded) {
            Some(rounded as u32)
        } else {
            None
        }
    }
}

/// Eigendecomposition of a symmetric matrix, eigenvalues ascending.
pub fn laplacian_spectrum(l: &SparseMatrix) -> Result<SpectralDecomposition, KernelError> {
    if !l.is_symmetric() {
        return Err(KernelError::NonSymmetric);
    }
    let eig = SymmetricEigen::new(l.to_dense());
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut u = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        u.set_column(dst, &eig.eigenvectors.column(src));
    }
    SpectralDecomposition::new(eigenvalues, u)
}

/// Forward transform x̂ = Uᵀx.
pub fn graph_fourier(
    spec: &SpectralDecomposition,
    x: &SignalVector,
) -> Result<SignalVector, KernelError> {
    if x.len() != spec.len() {
        return Err(KernelError::LengthMismatch { expected: spec.len(), got: x.len() });
    }
    let v = spec.u.tr_mul(&DVector::from_column_slice(x.as_slice()));
    Ok(SignalVector::new(v.as_slice().to_vec()))
}

/// Inverse transform x = Ux̂.
pub fn inverse_graph_fourier(
    spec: &SpectralDecomposition,
    xhat: &SignalVector,
) -> Result<SignalVector, KernelError> {
    if xhat.len() != spec.len() {
        return Err(KernelError::LengthMismatch { expected: spec.len(), got: xhat.len() });
    }
    let v = &spec.u * DVector::from_column_slice(xhat.as_slice());
    Ok(SignalVector::new(v.as_slice().to_vec()))
}

/// Requested columns of (εI + L)^{-s}, routed to the cheaper of the two
/// construction paths: sparse solves for integer exponents, the dense
/// spectral sum otherwise.
pub fn build_kernel_columns(
    l: &SparseMatrix,
    params: &KernelParams,
    cols: &NodeSet,
) -> Result<DMatrix<f64>, KernelError> {
    params.validate()?;
    if params.integer_exponent().is_some() {
        kernel_columns_solve(l, params, cols)
    } else {
        kernel_columns_spectral(l, params, cols)
    }
}

/// Kernel columns via the spectral sum Σ_k (ε+λ_k)^{-s} u_k u_kᵀ.
/// Handles any positive exponent; costs a full eigendecomposition.
pub fn kernel_columns_spectral(
    l: &SparseMatrix,
    params: &KernelParams,
    cols: &NodeSet,
) -> Result<DMatrix<f64>, KernelError> {
    params.validate()?;
    check_cols(l.size(), cols)?;
    let spec = laplacian_spectrum(l)?;
    let lambda_min = spec.eigenvalues.first().copied().unwrap_or(0.0);
    if params.epsilon + lambda_min <= 0.0 {
        return Err(KernelError::NotPositiveDefinite { epsilon: params.epsilon, lambda_min });
    }
    let scale: Vec<f64> =
        spec.eigenvalues.iter().map(|&lk| (params.epsilon + lk).powf(-params.s)).collect();
    // col_w = U diag(scale) Uᵀ e_w; batch the w's as a matrix product.
    let n = l.size();
    let mut rows_w = DMatrix::zeros(spec.len(), cols.len());
    for (j, w) in cols.iter().enumerate() {
        for k in 0..n {
            rows_w[(k, j)] = spec.u[(w, k)] * scale[k];
        }
    }
    Ok(&spec.u * rows_w)
}

/// Kernel columns via repeated sparse SPD solves of (εI + L)z = b.
/// Only positive integer exponents; assumes L positive semidefinite, so the
/// positive-definiteness condition reduces to ε > 0.
pub fn kernel_columns_solve(
    l: &SparseMatrix,
    params: &KernelParams,
    cols: &NodeSet,
) -> Result<DMatrix<f64>, KernelError> {
    params.validate()?;
    check_cols(l.size(), cols)?;
    let Some(power) = params.integer_exponent() else {
        return Err(KernelError::NonIntegerExponent(params.s));
    };
    if params.epsilon <= 0.0 {
        return Err(KernelError::NotPositiveDefinite {
            epsilon: params.epsilon,
            lambda_min: 0.0,
        });
    }
    let n = l.size();
    let mut block = DMatrix::zeros(n, cols.len());
    let mut z = vec![0.0; n];
    for (j, w) in cols.iter().enumerate() {
        z.iter_mut().for_each(|v| *v = 0.0);
        z[w] = 1.0;
        for _ in 0..power {
            z = cg_shifted(l, params.epsilon, &z)?;
        }
        block.set_column(j, &DVector::from_column_slice(&z));
    }
    Ok(block)
}

fn check_cols(n: usize, cols: &NodeSet) -> Result<(), KernelError> {
    if cols.is_empty() {
        return Err(KernelError::EmptySampleSet);
    }
    if let Some(max) = cols.max_id() {
        if max >= n {
            return Err(KernelError::Graph(GraphError::VertexOutOfRange { id: max, n }));
        }
    }
    Ok(())
}

/// Conjugate gradients for (εI + L)z = b.
pub(crate) fn cg_shifted(l: &SparseMatrix, epsilon: f64, b: &[f64]) -> Result<Vec<f64>, KernelError> {
    let n = l.size();
    let mut rs = b.iter().map(|v| v * v).sum::<f64>();
    if rs == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let norm_b = rs.sqrt();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let target = CG_TOL * norm_b;
    let max_iter = 40 * n + 100;
    for _ in 0..max_iter {
        l.matvec_into(&p, &mut ap);
        for i in 0..n {
            ap[i] += epsilon * p[i];
        }
        let p_ap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if p_ap <= 0.0 {
            return Err(KernelError::GramNotPositiveDefinite);
        }
        let alpha = rs / p_ap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rs_next: f64 = r.iter().map(|v| v * v).sum();
        if rs_next.sqrt() <= target {
            return Ok(x);
        }
        let beta = rs_next / rs;
        rs = rs_next;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    Err(KernelError::SolveNonConvergence { residual: rs.sqrt() / norm_b })
}

/// A fitted local kernel expansion over one community.
///
/// Vertex ids are the caller's (typically global) ids; the community set
/// lists them in the order matching the rows of the kernel block.
#[derive(Debug, Clone)]
pub struct KernelModel {
    community: NodeSet,
    samples: NodeSet,
    columns: DMatrix<f64>,
    coefficients: DVector<f64>,
    params: KernelParams,
}

/// Serializable form of a [`KernelModel`]: everything except the kernel
/// block, which is rebuilt from the graph on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelCache {
    pub community: Vec<usize>,
    pub samples: Vec<usize>,
    pub coefficients: Vec<f64>,
    pub params: KernelParams,
}

impl KernelModel {
    pub fn community(&self) -> &NodeSet {
        &self.community
    }

    pub fn samples(&self) -> &NodeSet {
        &self.samples
    }

    pub fn coefficients(&self) -> &[f64] {
        self.coefficients.as_slice()
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    /// Evaluates the expansion at every community vertex, in community order.
    pub fn evaluate_all(&self) -> Vec<f64> {
        (&self.columns * &self.coefficients).as_slice().to_vec()
    }

    pub fn to_cache(&self) -> ModelCache {
        ModelCache {
            community: self.community.ids().to_vec(),
            samples: self.samples.ids().to_vec(),
            coefficients: self.coefficients.as_slice().to_vec(),
            params: self.params,
        }
    }

    /// Rebuilds a model from its cache and the community subgraph the fit
    /// originally ran on.
    pub fn from_cache(cache: &ModelCache, g_j: &Graph) -> Result<Self, KernelError> {
        let community = NodeSet::from_unsorted(cache.community.clone());
        let samples = NodeSet::from_unsorted(cache.samples.clone());
        if community.len() != g_j.node_count() {
            return Err(KernelError::CommunitySizeMismatch {
                expected: community.len(),
                got: g_j.node_count(),
            });
        }
        if cache.coefficients.len() != samples.len() {
            return Err(KernelError::LengthMismatch {
                expected: samples.len(),
                got: cache.coefficients.len(),
            });
        }
        let w_local = local_sample_ids(&community, &samples)?;
        let columns = build_kernel_columns(&g_j.laplacian(), &cache.params, &w_local)?;
        Ok(KernelModel {
            community,
            samples,
            columns,
            coefficients: DVector::from_column_slice(&cache.coefficients),
            params: cache.params,
        })
    }
}

fn local_sample_ids(community: &NodeSet, samples: &NodeSet) -> Result<NodeSet, KernelError> {
    let mut local = Vec::with_capacity(samples.len());
    for id in samples.iter() {
        match community.ids().binary_search(&id) {
            Ok(pos) => local.push(pos),
            Err(_) => return Err(KernelError::SampleOutsideCommunity { id }),
        }
    }
    Ok(NodeSet::from_sorted(local))
}

/// Fits the regularized least-squares expansion x_* = Σ_i c_i K(·, w_i) on
/// one community by solving (K_WW + γNI)c = x_W.
///
/// `g_j` is the community's induced subgraph; `community` lists the caller's
/// vertex ids in the subgraph's vertex order; `w_j` is the sampled subset of
/// those ids and `x_w` the sample values in `w_j` order.
pub fn fit_local(
    g_j: &Graph,
    community: &NodeSet,
    x_w: &[f64],
    w_j: &NodeSet,
    params: &KernelParams,
) -> Result<KernelModel, KernelError> {
    params.validate()?;
    if w_j.is_empty() {
        return Err(KernelError::EmptySampleSet);
    }
    if community.len() != g_j.node_count() {
        return Err(KernelError::CommunitySizeMismatch {
            expected: community.len(),
            got: g_j.node_count(),
        });
    }
    if x_w.len() != w_j.len() {
        return Err(KernelError::LengthMismatch { expected: w_j.len(), got: x_w.len() });
    }
    let w_local = local_sample_ids(community, w_j)?;
    let columns = build_kernel_columns(&g_j.laplacian(), params, &w_local)?;

    let n_samples = w_local.len();
    let mut gram = DMatrix::zeros(n_samples, n_samples);
    for (i, w) in w_local.iter().enumerate() {
        for j in 0..n_samples {
            gram[(i, j)] = columns[(w, j)];
        }
    }
    // The two construction routes agree only to solver tolerance; symmetrize
    // so Cholesky sees an exactly symmetric Gram block.
    let gram = (&gram + gram.transpose()) * 0.5;
    let mut system = gram;
    let shift = params.gamma * n_samples as f64;
    for i in 0..n_samples {
        system[(i, i)] += shift;
    }

    let chol = Cholesky::new(system.clone()).ok_or(KernelError::GramNotPositiveDefinite)?;
    let rhs = DVector::from_column_slice(x_w);
    let mut c = chol.solve(&rhs);
    // One step of iterative refinement tightens badly conditioned fits.
    let correction = chol.solve(&(&rhs - &system * &c));
    c += correction;

    let residual = (&system * &c - &rhs).norm();
    let scale = rhs.norm();
    let relative = if scale > 0.0 { residual / scale } else { residual };
    if relative >= 1e-10 {
        return Err(KernelError::FitResidual { residual: relative });
    }

    Ok(KernelModel {
        community: community.clone(),
        samples: w_j.clone(),
        columns,
        coefficients: c,
        params: *params,
    })
}

/// Evaluates a fitted model at one community vertex (caller's id space).
pub fn evaluate_local(model: &KernelModel, v: usize) -> Result<f64, KernelError> {
    let Ok(row) = model.community.ids().binary_search(&v) else {
        return Err(KernelError::VertexOutsideCommunity { id: v });
    };
    Ok(model.columns.row(row).transpose().dot(&model.coefficients))
}
