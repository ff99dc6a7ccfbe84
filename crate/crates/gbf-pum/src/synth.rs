//! Seeded sampling and synthetic low-pass test signals.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{Graph, NodeSet, SignalVector};
use crate::kernel::{cg_shifted, graph_fourier, inverse_graph_fourier, laplacian_spectrum, KernelError};
use crate::FailureKind;

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("graph must be connected")]
    DisconnectedGraph,
    #[error("cannot draw {requested} samples from {available} vertices")]
    BadSampleCount { requested: usize, available: usize },
    #[error("generated signal is identically zero")]
    DegenerateSignal,
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

impl SynthError {
    pub fn kind(&self) -> FailureKind {
        match self {
            SynthError::Kernel(e) => e.kind(),
            SynthError::DegenerateSignal => FailureKind::Numerical,
            _ => FailureKind::Validation,
        }
    }
}

/// Draws `count` distinct vertices uniformly at random, reproducibly.
pub fn sample_uniform(n: usize, count: usize, seed: u64) -> Result<NodeSet, SynthError> {
    if count == 0 || count > n {
        return Err(SynthError::BadSampleCount { requested: count, available: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ids: Vec<usize> = (0..n).collect();
    for i in 0..count {
        let j = rng.gen_range(i..n);
        ids.swap(i, j);
    }
    ids.truncate(count);
    Ok(NodeSet::from_unsorted(ids))
}

/// Standard normal draws via the Box-Muller transform.
fn standard_normals(len: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut out = Vec::with_capacity(len + 1);
    while out.len() < len {
        let u1: f64 = 1.0 - rng.gen::<f64>();
        let u2: f64 = rng.gen();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        out.push(radius * angle.cos());
        out.push(radius * angle.sin());
    }
    out.truncate(len);
    out
}

/// One application of the low-pass filter (I + L)^{-1}.
pub fn resolvent_smooth(g: &Graph, f: &SignalVector) -> Result<SignalVector, SynthError> {
    let z = cg_shifted(&g.laplacian(), 1.0, f.as_slice())?;
    Ok(SignalVector::new(z))
}

/// Deterministic smooth test signal: seeded unit-variance noise, optionally
/// projected onto the `cutoff` lowest Laplacian eigenmodes (0 disables the
/// projection), passed through (I + L)^{-1} and scaled to max magnitude 1.
pub fn synth_signal(g: &Graph, seed: u64, cutoff: usize) -> Result<SignalVector, SynthError> {
    if !g.is_connected() {
        return Err(SynthError::DisconnectedGraph);
    }
    let n = g.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = SignalVector::new(standard_normals(n, &mut rng));

    if cutoff > 0 && cutoff < n {
        let spec = laplacian_spectrum(&g.laplacian())?;
        let fhat = graph_fourier(&spec, &f)?;
        let mut truncated = fhat.into_vec();
        for coefficient in truncated.iter_mut().skip(cutoff) {
            *coefficient = 0.0;
        }
        f = inverse_graph_fourier(&spec, &SignalVector::new(truncated))?;
    }

    let x = resolvent_smooth(g, &f)?;
    let scale = x.max_abs();
    if scale == 0.0 {
        return Err(SynthError::DegenerateSignal);
    }
    Ok(SignalVector::new(x.iter().map(|v| v / scale).collect()))
}
