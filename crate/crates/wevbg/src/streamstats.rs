//! Streaming mean/scatter accumulation and two-class moment pooling.
//!
//! The streaming update keeps the running mean and the *un-normalized*
//! scatter `sum_k (x_k - mean)(x_k - mean)ᵀ` in exact agreement with a batch
//! pass over the same samples (up to roundoff): absorbing a new sample adds
//! the rank-one term `y yᵀ` with `y = sqrt(n/(n+1)) (x - mean)`, where `n` is
//! the count *before* absorption and `mean` the running mean at that point.
//! That scaled deviation is exposed separately ([`rank_one_increment`])
//! because the perturbation experiments need the increment itself, not just
//! the updated state.

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;

/// Running sample count, mean, and un-normalized scatter matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterState {
    pub n: usize,
    pub mean: Vec<f64>,
    pub scatter: SymMatrix,
}

impl ScatterState {
    /// Empty state for `dim`-dimensional samples.
    pub fn new(dim: usize) -> Self {
        ScatterState {
            n: 0,
            mean: vec![0.0; dim],
            scatter: SymMatrix::zeros(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

fn check_sample(dim: usize, x: &[f64]) -> Result<()> {
    if x.len() != dim {
        return Err(Error::Dimension(format!(
            "sample has length {}, state expects {dim}",
            x.len()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite sample entry".into()));
    }
    Ok(())
}

/// Scaled deviation `sqrt(n/(n+1)) (x - mean)` whose outer product advances
/// the scatter by exactly one sample. Requires at least one absorbed sample,
/// since an empty state has no mean to deviate from.
pub fn rank_one_increment(state: &ScatterState, x: &[f64]) -> Result<Vec<f64>> {
    if state.n == 0 {
        return Err(Error::InsufficientHistory(
            "scatter increment needs an existing mean; absorb a sample first".into(),
        ));
    }
    check_sample(state.dim(), x)?;
    let n = state.n as f64;
    let scale = (n / (n + 1.0)).sqrt();
    Ok(x.iter()
        .zip(&state.mean)
        .map(|(v, m)| scale * (v - m))
        .collect())
}

/// Returns a new state with `x` absorbed. The first sample initializes the
/// mean and leaves the scatter at zero; later samples add the rank-one
/// increment's outer product and move the mean by `(x - mean) / (n + 1)`.
pub fn welford_update(state: &ScatterState, x: &[f64]) -> Result<ScatterState> {
    check_sample(state.dim(), x)?;
    if state.n == 0 {
        return Ok(ScatterState {
            n: 1,
            mean: x.to_vec(),
            scatter: SymMatrix::zeros(state.dim()),
        });
    }
    let y = rank_one_increment(state, x)?;
    let n = state.n as f64;
    let mean = state
        .mean
        .iter()
        .zip(x)
        .map(|(m, v)| m + (v - m) / (n + 1.0))
        .collect();
    let mut scatter = state.scatter.clone();
    scatter.add_outer(&y);
    Ok(ScatterState {
        n: state.n + 1,
        mean,
        scatter,
    })
}

/// Mean and scatter of a whole sample set in two passes.
pub fn batch_scatter(samples: &[Vec<f64>]) -> Result<ScatterState> {
    let n = samples.len();
    if n == 0 {
        return Err(Error::InsufficientData(
            "batch scatter of an empty sample set".into(),
        ));
    }
    let dim = samples[0].len();
    for x in samples {
        check_sample(dim, x)?;
    }
    let mut mean = vec![0.0; dim];
    for x in samples {
        for (m, v) in mean.iter_mut().zip(x) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= n as f64;
    }
    let mut scatter = SymMatrix::zeros(dim);
    let mut centered = vec![0.0; dim];
    for x in samples {
        for ((c, v), m) in centered.iter_mut().zip(x).zip(&mean) {
            *c = v - m;
        }
        scatter.add_outer(&centered);
    }
    Ok(ScatterState { n, mean, scatter })
}

/// Per-coordinate count, mean, and *population* variance of one sample
/// class, the granularity at which two classes pool.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassMoments {
    pub n: usize,
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
}

impl ClassMoments {
    /// Validates coordinate counts, finiteness, and variance sign.
    pub fn new(n: usize, mean: Vec<f64>, var: Vec<f64>) -> Result<Self> {
        if mean.len() != var.len() {
            return Err(Error::Dimension(format!(
                "mean has {} coordinates, variance has {}",
                mean.len(),
                var.len()
            )));
        }
        if mean.iter().chain(var.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite moment".into()));
        }
        if var.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidInput("negative variance".into()));
        }
        Ok(ClassMoments { n, mean, var })
    }

    /// Moments measured directly from samples.
    pub fn from_samples(samples: &[Vec<f64>]) -> Result<Self> {
        let state = batch_scatter(samples)?;
        let n = state.n as f64;
        let var = (0..state.dim())
            .map(|i| state.scatter.get(i, i) / n)
            .collect();
        Ok(ClassMoments {
            n: state.n,
            mean: state.mean,
            var,
        })
    }
}

/// Pools two classes' per-coordinate moments into those of their union.
///
/// The pooled variance is the weighted variance average plus a
/// mean-separation term: `nb nf / n^2 * (mu_b - mu_f)^2` per coordinate.
/// Population variances make this identity exact, and the arithmetic is
/// arranged so swapping the classes returns bit-identical results. An empty
/// class short-circuits to a copy of the other, so no roundoff is introduced
/// when one side is missing.
#[allow(clippy::too_many_arguments)]
pub fn combined_moments(
    nb: usize,
    mu_b: &[f64],
    var_b: &[f64],
    nf: usize,
    mu_f: &[f64],
    var_f: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let a = ClassMoments::new(nb, mu_b.to_vec(), var_b.to_vec())?;
    let f = ClassMoments::new(nf, mu_f.to_vec(), var_f.to_vec())?;
    if a.mean.len() != f.mean.len() {
        return Err(Error::Dimension(format!(
            "pooling {}-dimensional moments with {}-dimensional ones",
            a.mean.len(),
            f.mean.len()
        )));
    }
    if nb + nf == 0 {
        return Err(Error::DegenerateInput("pooling two empty classes".into()));
    }
    if nb == 0 {
        return Ok((f.mean, f.var));
    }
    if nf == 0 {
        return Ok((a.mean, a.var));
    }
    let (wb, wf) = (nb as f64, nf as f64);
    let n = wb + wf;
    let mean: Vec<f64> = a
        .mean
        .iter()
        .zip(&f.mean)
        .map(|(mb, mf)| (wb * mb + wf * mf) / n)
        .collect();
    let var: Vec<f64> = (0..a.mean.len())
        .map(|i| {
            let gap = a.mean[i] - f.mean[i];
            (wb * a.var[i] + wf * f.var[i]) / n + (wb * wf) / (n * n) * (gap * gap)
        })
        .collect();
    Ok((mean, var))
}
