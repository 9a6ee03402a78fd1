//! Empirical verification of the eigenvector-perturbation story behind
//! weakest-eigenvector background modeling.
//!
//! Three experiment families live here:
//!
//! * **Drift measurement** — feed a labeled stream through the running
//!   scatter update and record how much the dominant eigenvector moves on
//!   each arrival, separated by class.
//! * **Perturbation-bound checks** — for a rank-one update `A + yyᵀ`,
//!   measure `‖v−v′‖ / ‖yyᵀ‖₂` and estimate its supremum over many draws;
//!   the ratio must stay bounded and stable as `‖y‖` shrinks.
//! * **Expectation-chain checks** — Monte-Carlo estimates of the
//!   class-conditional quantities that justify the drift asymmetry: the
//!   squared deviation about the class mean, the mean-removed arrival's
//!   squared length against the bound `Σ² + C` (with `C` the squared
//!   distance between class means), the background cross term, and the
//!   per-class eigenvector rotation angles.
//!
//! All randomness flows through a seedable, portable generator (ChaCha8);
//! identical parameters and seed give bit-identical reports.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frames::{FrameLabel, FrameSequence};
use crate::linalg::{dot, eig_sym, norm, SymMatrix};
use crate::streamstats::{batch_scatter, rank_one_increment, welford_update, ScatterState};

// ---------------------------------------------------------------------
// Two-class synthetic pixel processes
// ---------------------------------------------------------------------

/// Parameters of a two-class Gaussian pixel process: a tight background
/// cluster and a broader foreground cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoClassParams {
    pub dim: usize,
    pub mu_b: Vec<f64>,
    pub mu_f: Vec<f64>,
    /// Per-component standard deviations, strictly positive.
    pub sigma_b: Vec<f64>,
    pub sigma_f: Vec<f64>,
    pub n_b: usize,
    pub n_f: usize,
    pub seed: u64,
}

impl TwoClassParams {
    /// The reference drift configuration: two components, a 92/29
    /// background/foreground split, and a foreground spread 20× the
    /// background's.
    pub fn reference(seed: u64) -> TwoClassParams {
        TwoClassParams {
            dim: 2,
            mu_b: vec![0.3, 0.3],
            mu_f: vec![0.7, 0.7],
            sigma_b: vec![0.002, 0.002],
            sigma_f: vec![0.04, 0.04],
            n_b: 92,
            n_f: 29,
            seed,
        }
    }

    /// The reference configuration with balanced class counts, the regime
    /// the expectation-chain checks assume.
    pub fn balanced_reference(seed: u64) -> TwoClassParams {
        TwoClassParams {
            n_b: 60,
            n_f: 60,
            ..TwoClassParams::reference(seed)
        }
    }

    fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        for (name, v) in [
            ("mu_b", &self.mu_b),
            ("mu_f", &self.mu_f),
            ("sigma_b", &self.sigma_b),
            ("sigma_f", &self.sigma_f),
        ] {
            if v.len() != self.dim {
                return Err(Error::Dimension(format!(
                    "{name} has {} components, dim is {}",
                    v.len(),
                    self.dim
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "{name} has non-finite components"
                )));
            }
        }
        for (name, v) in [("sigma_b", &self.sigma_b), ("sigma_f", &self.sigma_f)] {
            if v.iter().any(|&s| s <= 0.0) {
                return Err(Error::InvalidInput(format!(
                    "{name} must be strictly positive componentwise"
                )));
            }
        }
        Ok(())
    }

    /// Σ of squared background standard deviations.
    pub fn sum_var_b(&self) -> f64 {
        self.sigma_b.iter().map(|s| s * s).sum()
    }

    /// Σ of squared foreground standard deviations.
    pub fn sum_var_f(&self) -> f64 {
        self.sigma_f.iter().map(|s| s * s).sum()
    }

    /// Squared distance between the class means.
    pub fn mean_separation_sq(&self) -> f64 {
        self.mu_b
            .iter()
            .zip(&self.mu_f)
            .map(|(b, f)| (b - f) * (b - f))
            .sum()
    }
}

/// How background and foreground samples are ordered in the emitted
/// sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArrivalOrder {
    /// All background samples first, then all foreground samples.
    Given,
    /// Foreground samples spread evenly through the stream.
    Interleaved,
    /// A seeded random permutation of the whole stream.
    Shuffled,
}

impl ArrivalOrder {
    pub fn parse(s: &str) -> Result<ArrivalOrder> {
        match s.trim() {
            "given" => Ok(ArrivalOrder::Given),
            "interleaved" => Ok(ArrivalOrder::Interleaved),
            "shuffled" => Ok(ArrivalOrder::Shuffled),
            other => Err(Error::InvalidInput(format!(
                "unknown order {other:?} (expected given, interleaved, or shuffled)"
            ))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ArrivalOrder::Given => "given",
            ArrivalOrder::Interleaved => "interleaved",
            ArrivalOrder::Shuffled => "shuffled",
        }
    }
}

/// Draws a labeled two-class Gaussian stream as 1×dim frames. Samples are
/// clamped to [0, 1], so parameters should keep the clusters several
/// standard deviations inside the unit box.
pub fn synth_two_class(params: &TwoClassParams, order: ArrivalOrder) -> Result<FrameSequence> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut frames = Vec::with_capacity(params.n_b + params.n_f);
    let mut labels = Vec::with_capacity(params.n_b + params.n_f);
    for _ in 0..params.n_b {
        frames.push(sample_class(&mut rng, &params.mu_b, &params.sigma_b));
        labels.push(FrameLabel::Background);
    }
    for _ in 0..params.n_f {
        frames.push(sample_class(&mut rng, &params.mu_f, &params.sigma_f));
        labels.push(FrameLabel::Foreground);
    }

    let n = frames.len();
    let positions: Vec<usize> = match order {
        ArrivalOrder::Given => (0..n).collect(),
        ArrivalOrder::Interleaved => {
            // stratified placement of the foreground samples
            let fg_slots: Vec<usize> = (0..params.n_f)
                .map(|j| ((j as f64 + 0.5) * n as f64 / params.n_f.max(1) as f64) as usize)
                .collect();
            let mut order: Vec<usize> = Vec::with_capacity(n);
            let mut next_bg = 0usize;
            let mut next_fg = 0usize;
            for slot in 0..n {
                if next_fg < fg_slots.len() && fg_slots[next_fg] == slot {
                    order.push(params.n_b + next_fg);
                    next_fg += 1;
                } else {
                    order.push(next_bg);
                    next_bg += 1;
                }
            }
            // any foreground samples whose slots collided go at the end
            order.extend(params.n_b + next_fg..params.n_b + params.n_f);
            order
        }
        ArrivalOrder::Shuffled => {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            order
        }
    };
    let frames: Vec<Vec<f64>> = positions.iter().map(|&i| frames[i].clone()).collect();
    let labels: Vec<FrameLabel> = positions.iter().map(|&i| labels[i]).collect();
    FrameSequence::new(
        1,
        params.dim,
        frames,
        Some(labels),
        format!("synthetic:{}", params.seed),
    )
}

fn sample_class(rng: &mut ChaCha8Rng, mu: &[f64], sigma: &[f64]) -> Vec<f64> {
    mu.iter()
        .zip(sigma)
        .map(|(m, s)| {
            let z: f64 = rng.sample(StandardNormal);
            (m + s * z).clamp(0.0, 1.0)
        })
        .collect()
}

// ---------------------------------------------------------------------
// Drift measurement
// ---------------------------------------------------------------------

/// One arrival's effect on the dominant eigenvector of the running
/// scatter.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftRecord {
    /// Frame index of the arrival (warm-up frames 0..3 produce no record).
    pub step: usize,
    pub label: FrameLabel,
    /// ‖v − v′‖ after sign alignment.
    pub delta_norm: f64,
    /// arccos of the clamped |v·v′|, in [0, π/2].
    pub angle: f64,
    /// Spectral norm of the step's rank-one scatter increment, ‖y‖².
    pub e_norm: f64,
}

/// Sign-aligned distance and angle between two unit vectors: `w` is
/// negated when it points away from `v`, making both metrics invariant to
/// the eigensolver's sign choices.
pub fn aligned_delta(v: &[f64], w: &[f64]) -> (f64, f64) {
    let d = dot(v, w);
    let sign = if d < 0.0 { -1.0 } else { 1.0 };
    let delta_sq: f64 = v
        .iter()
        .zip(w)
        .map(|(a, b)| (a - sign * b) * (a - sign * b))
        .sum();
    let angle = d.abs().min(1.0).acos();
    (delta_sq.sqrt(), angle)
}

/// Streams a labeled sequence through the running scatter model: the
/// first three frames warm the state up, and every later arrival yields a
/// [`DriftRecord`] describing how far it rotated the dominant
/// eigenvector.
pub fn drift_experiment(seq: &FrameSequence) -> Result<Vec<DriftRecord>> {
    let labels = seq
        .labels
        .as_ref()
        .ok_or_else(|| Error::Label("drift experiment needs per-frame labels".into()))?;
    if seq.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} frame(s); at least 3 are needed to warm up the scatter",
            seq.len()
        )));
    }
    let mut state = ScatterState::new(seq.pixels());
    for i in 0..3 {
        state = welford_update(&state, seq.frame(i))?;
    }
    let mut v = dominant_vector(&state.scatter)?;
    let mut records = Vec::with_capacity(seq.len() - 3);
    for (i, &label) in labels.iter().enumerate().skip(3) {
        let y = rank_one_increment(&state, seq.frame(i))?;
        let e_norm = dot(&y, &y);
        state = welford_update(&state, seq.frame(i))?;
        let mut v_new = dominant_vector(&state.scatter)?;
        if dot(&v, &v_new) < 0.0 {
            for c in &mut v_new {
                *c = -*c;
            }
        }
        let (delta_norm, angle) = aligned_delta(&v, &v_new);
        records.push(DriftRecord {
            step: i,
            label,
            delta_norm,
            angle,
            e_norm,
        });
        v = v_new;
    }
    Ok(records)
}

fn dominant_vector(scatter: &SymMatrix) -> Result<Vec<f64>> {
    Ok(eig_sym(scatter)?
        .into_iter()
        .next()
        .expect("positive dimension")
        .vector)
}

/// Mean `delta_norm` over records with the given label, if any matched.
pub fn mean_delta(records: &[DriftRecord], label: FrameLabel) -> Option<f64> {
    let matching: Vec<f64> = records
        .iter()
        .filter(|r| r.label == label)
        .map(|r| r.delta_norm)
        .collect();
    if matching.is_empty() {
        None
    } else {
        Some(matching.iter().sum::<f64>() / matching.len() as f64)
    }
}

/// Writes drift records as CSV with the schema
/// `step,label,delta_norm,angle,e_norm`.
pub fn write_drift_csv(path: &Path, records: &[DriftRecord]) -> Result<()> {
    let mut out = String::from("step,label,delta_norm,angle,e_norm\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.step,
            r.label.as_str(),
            r.delta_norm,
            r.angle,
            r.e_norm
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

// ---------------------------------------------------------------------
// Rank-one perturbation bound
// ---------------------------------------------------------------------

/// Outcome of one rank-one perturbation measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    /// ‖v − v′‖ after sign alignment.
    pub delta_norm: f64,
    /// ‖yyᵀ‖₂ = ‖y‖².
    pub e_norm: f64,
    /// `delta_norm / e_norm`, or 0 when `y` is zero.
    pub ratio: f64,
}

/// Measures how far the rank-one update `a + yyᵀ` rotates the dominant
/// eigenvector of `a`. Requires the dominant eigenvalue to be simple
/// (relative gap above 1e-8); at a crossing, eigenvector continuity
/// genuinely fails and the measurement is refused.
pub fn check_perturbation_bound(a: &SymMatrix, y: &[f64]) -> Result<BoundCheck> {
    if y.len() != a.dim() {
        return Err(Error::Dimension(format!(
            "y has {} components, matrix has dimension {}",
            y.len(),
            a.dim()
        )));
    }
    let pairs = eig_sym(a)?;
    if pairs.len() > 1 {
        let gap = pairs[0].value - pairs[1].value;
        if gap <= 1e-8 * pairs[0].value.abs() {
            return Err(Error::SkippedDegenerate(format!(
                "dominant eigenvalue gap {gap} is below resolution"
            )));
        }
    }
    let e_norm = dot(y, y);
    if e_norm == 0.0 {
        return Ok(BoundCheck {
            delta_norm: 0.0,
            e_norm: 0.0,
            ratio: 0.0,
        });
    }
    let mut perturbed = a.clone();
    perturbed.add_outer(y);
    let v_new = dominant_vector(&perturbed)?;
    let (delta_norm, _) = aligned_delta(&pairs[0].vector, &v_new);
    Ok(BoundCheck {
        delta_norm,
        e_norm,
        ratio: delta_norm / e_norm,
    })
}

/// Empirical estimate of the perturbation-sensitivity constant of `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaEstimate {
    /// Largest observed `‖v−v′‖ / ‖y‖²` over the trial ensemble.
    pub max_ratio: f64,
    pub trials: usize,
}

/// Estimates the sensitivity constant by sampling `trials` random `y`
/// with `‖y‖² ≤ norm_sq_cap` and taking the worst observed rotation-to-
/// perturbation ratio. Deterministic in `seed`; trials run in parallel
/// with per-trial seeds derived up front.
pub fn estimate_beta(
    a: &SymMatrix,
    trials: usize,
    norm_sq_cap: f64,
    seed: u64,
) -> Result<BetaEstimate> {
    if trials == 0 {
        return Err(Error::InvalidInput("at least one trial is required".into()));
    }
    if !(norm_sq_cap > 0.0 && norm_sq_cap.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "perturbation cap {norm_sq_cap} must be positive and finite"
        )));
    }
    // fail fast on a degenerate dominant eigenvalue
    check_perturbation_bound(a, &vec![0.0; a.dim()])?;

    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let trial_seeds: Vec<u64> = (0..trials).map(|_| master.random()).collect();
    let d = a.dim();
    let ratios = trial_seeds
        .par_iter()
        .map(|&s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let mut y: Vec<f64> = (0..d)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect();
            let len = norm(&y);
            if len == 0.0 {
                return Ok(0.0);
            }
            // uniform magnitude in (0, cap]
            let target = (norm_sq_cap * rng.random::<f64>().max(f64::MIN_POSITIVE)).sqrt();
            for c in &mut y {
                *c *= target / len;
            }
            check_perturbation_bound(a, &y).map(|check| check.ratio)
        })
        .collect::<Result<Vec<f64>>>()?;
    let max_ratio = ratios.into_iter().fold(0.0f64, f64::max);
    Ok(BetaEstimate { max_ratio, trials })
}

/// A symmetric matrix with exactly the given spectrum, rotated by the
/// eigenbasis of a seeded random symmetric matrix so no axis is special.
/// Handy for sensitivity experiments on matrices whose eigenvalues — and
/// therefore whose spectral gap — are chosen up front.
pub fn rotated_spectrum(spectrum: &[f64], seed: u64) -> Result<SymMatrix> {
    if spectrum.is_empty() {
        return Err(Error::InvalidInput("empty spectrum".into()));
    }
    if spectrum.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("spectrum values must be finite".into()));
    }
    let d = spectrum.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw = SymMatrix::from_fn(d, |_, _| rng.random::<f64>() - 0.5)?;
    let basis = eig_sym(&raw)?;
    SymMatrix::from_fn(d, |i, j| {
        (0..d)
            .map(|k| spectrum[k] * basis[k].vector[i] * basis[k].vector[j])
            .sum()
    })
}

// ---------------------------------------------------------------------
// Expectation-chain checks
// ---------------------------------------------------------------------

/// One Monte-Carlo metric row: an estimate with its standard error, an
/// optional analytic bound, and whether the row's own criterion passed.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainMetric {
    pub metric: String,
    pub estimate: f64,
    pub std_error: f64,
    pub bound: Option<f64>,
    pub pass: bool,
}

/// Full output of [`check_expectation_chain`].
#[derive(Debug, Clone, PartialEq)]
pub struct ChainReport {
    /// Whether the class counts were balanced, the regime the chain's
    /// derivation assumes. Unbalanced runs are computed anyway and
    /// flagged here and in the `balanced_regime` row.
    pub balanced: bool,
    /// Trials that contributed (degenerate draws are skipped and counted
    /// separately).
    pub trials: usize,
    pub skipped: usize,
    pub metrics: Vec<ChainMetric>,
}

impl ChainReport {
    pub fn metric(&self, name: &str) -> Option<&ChainMetric> {
        self.metrics.iter().find(|m| m.metric == name)
    }
}

struct TrialOutcome {
    sq_dev_bg: f64,
    sq_dev_fg: f64,
    cross_term_bg: f64,
    e_norm_bg: f64,
    e_norm_fg: f64,
    angle_bg: f64,
    angle_fg: f64,
}

/// Monte-Carlo verification of the class-conditional quantities behind
/// the drift asymmetry. Each trial draws a fresh history of `n_b + n_f`
/// samples, then measures one background and one foreground arrival
/// against it:
///
/// * squared deviation about the own-class mean, versus Σσ² exactly;
/// * the background arrival's cross term `2(x−μ_b)·(x−μ_f)`, versus 0;
/// * the simplified perturbation magnitude — the arrival's squared
///   distance from the mixture's population mean `(n_b·μ_b + n_f·μ_f)/n`
///   — versus the bound `Σσ² + C` where `C = ‖μ_b−μ_f‖²`. The population
///   mean (not the sampled history mean) isolates the claim about the
///   arrival: a sampled mean would fold its own sampling noise,
///   `(n_b·Σ_b² + n_f·Σ_f²)/n²`, into every estimate, which the bound
///   does not and should not cover;
/// * the dominant-eigenvector rotation angle per class, via the exact
///   running update on the sampled history, with a separation test
///   between the classes.
///
/// Estimates are means over trials with standard errors; bounds come from
/// the parameters, not from samples. `trials` must be positive.
pub fn check_expectation_chain(params: &TwoClassParams, trials: usize) -> Result<ChainReport> {
    params.validate()?;
    if trials == 0 {
        return Err(Error::InvalidInput("at least one trial is required".into()));
    }
    if params.n_b + params.n_f < 2 {
        return Err(Error::InsufficientData(
            "history needs at least two samples".into(),
        ));
    }
    let balanced = params.n_b == params.n_f;

    let mut master = ChaCha8Rng::seed_from_u64(params.seed);
    let trial_seeds: Vec<u64> = (0..trials).map(|_| master.random()).collect();
    let outcomes: Vec<Option<TrialOutcome>> = trial_seeds
        .par_iter()
        .map(|&s| run_chain_trial(params, s))
        .collect::<Result<_>>()?;
    let done: Vec<TrialOutcome> = outcomes.into_iter().flatten().collect();
    let skipped = trials - done.len();
    if done.is_empty() {
        return Err(Error::DegenerateInput(
            "every trial had a degenerate dominant eigenvalue".into(),
        ));
    }

    let sum_var_b = params.sum_var_b();
    let sum_var_f = params.sum_var_f();
    let c = params.mean_separation_sq();

    let within_3se = |est: f64, bound: f64, se: f64| (est - bound).abs() <= 3.0 * se;
    let below_3se = |est: f64, bound: f64, se: f64| est <= bound + 3.0 * se;

    let mut metrics = Vec::new();
    let (est, se) = mean_and_se(done.iter().map(|t| t.sq_dev_bg));
    metrics.push(ChainMetric {
        metric: "class_sq_dev_bg".into(),
        estimate: est,
        std_error: se,
        bound: Some(sum_var_b),
        pass: within_3se(est, sum_var_b, se),
    });
    let (est, se) = mean_and_se(done.iter().map(|t| t.sq_dev_fg));
    metrics.push(ChainMetric {
        metric: "class_sq_dev_fg".into(),
        estimate: est,
        std_error: se,
        bound: Some(sum_var_f),
        pass: within_3se(est, sum_var_f, se),
    });
    let (est, se) = mean_and_se(done.iter().map(|t| t.cross_term_bg));
    metrics.push(ChainMetric {
        metric: "cross_term_bg".into(),
        estimate: est,
        std_error: se,
        bound: Some(0.0),
        pass: within_3se(est, 0.0, se),
    });
    let (est, se) = mean_and_se(done.iter().map(|t| t.e_norm_bg));
    metrics.push(ChainMetric {
        metric: "perturbation_norm_bg".into(),
        estimate: est,
        std_error: se,
        bound: Some(sum_var_b + c),
        pass: below_3se(est, sum_var_b + c, se),
    });
    let (est, se) = mean_and_se(done.iter().map(|t| t.e_norm_fg));
    metrics.push(ChainMetric {
        metric: "perturbation_norm_fg".into(),
        estimate: est,
        std_error: se,
        bound: Some(sum_var_f + c),
        pass: below_3se(est, sum_var_f + c, se),
    });
    let (bg_est, bg_se) = mean_and_se(done.iter().map(|t| t.angle_bg));
    metrics.push(ChainMetric {
        metric: "angle_bg".into(),
        estimate: bg_est,
        std_error: bg_se,
        bound: None,
        pass: true,
    });
    let (fg_est, fg_se) = mean_and_se(done.iter().map(|t| t.angle_fg));
    metrics.push(ChainMetric {
        metric: "angle_fg".into(),
        estimate: fg_est,
        std_error: fg_se,
        bound: None,
        pass: true,
    });
    // separation: the classes' 99% confidence intervals must not overlap
    let z99 = 2.576;
    metrics.push(ChainMetric {
        metric: "angle_separation".into(),
        estimate: fg_est - bg_est,
        std_error: (bg_se * bg_se + fg_se * fg_se).sqrt(),
        bound: None,
        pass: fg_est - z99 * fg_se > bg_est + z99 * bg_se,
    });
    metrics.push(ChainMetric {
        metric: "balanced_regime".into(),
        estimate: if balanced { 1.0 } else { 0.0 },
        std_error: 0.0,
        bound: None,
        pass: balanced,
    });

    Ok(ChainReport {
        balanced,
        trials: done.len(),
        skipped,
        metrics,
    })
}

/// One chain trial; `None` when the history's dominant eigenvalue is too
/// degenerate for the rotation angle to be meaningful.
fn run_chain_trial(params: &TwoClassParams, seed: u64) -> Result<Option<TrialOutcome>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut history = Vec::with_capacity(params.n_b + params.n_f);
    for _ in 0..params.n_b {
        history.push(sample_class(&mut rng, &params.mu_b, &params.sigma_b));
    }
    for _ in 0..params.n_f {
        history.push(sample_class(&mut rng, &params.mu_f, &params.sigma_f));
    }
    let state = batch_scatter(&history)?;
    let pairs = eig_sym(&state.scatter)?;
    if pairs.len() > 1 {
        let gap = pairs[0].value - pairs[1].value;
        if gap <= 1e-8 * pairs[0].value.abs() {
            return Ok(None);
        }
    }
    let v = &pairs[0].vector;

    let x_bg = sample_class(&mut rng, &params.mu_b, &params.sigma_b);
    let x_fg = sample_class(&mut rng, &params.mu_f, &params.sigma_f);

    let sq_dev =
        |x: &[f64], mu: &[f64]| -> f64 { x.iter().zip(mu).map(|(a, b)| (a - b) * (a - b)).sum() };
    let n = (params.n_b + params.n_f) as f64;
    let mu_mix: Vec<f64> = params
        .mu_b
        .iter()
        .zip(&params.mu_f)
        .map(|(b, f)| (params.n_b as f64 * b + params.n_f as f64 * f) / n)
        .collect();
    let e_norm = |x: &[f64]| sq_dev(x, &mu_mix);
    let angle_of = |x: &[f64]| -> Result<f64> {
        let next = welford_update(&state, x)?;
        let v_new = dominant_vector(&next.scatter)?;
        Ok(aligned_delta(v, &v_new).1)
    };
    let cross_term_bg = 2.0
        * x_bg
            .iter()
            .zip(&params.mu_b)
            .map(|(x, m)| x - m)
            .zip(x_bg.iter().zip(&params.mu_f).map(|(x, m)| x - m))
            .map(|(a, b)| a * b)
            .sum::<f64>();

    Ok(Some(TrialOutcome {
        sq_dev_bg: sq_dev(&x_bg, &params.mu_b),
        sq_dev_fg: sq_dev(&x_fg, &params.mu_f),
        cross_term_bg,
        e_norm_bg: e_norm(&x_bg),
        e_norm_fg: e_norm(&x_fg),
        angle_bg: angle_of(&x_bg)?,
        angle_fg: angle_of(&x_fg)?,
    }))
}

fn mean_and_se(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    if n < 2.0 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Writes chain metrics as CSV with the schema
/// `metric,estimate,std_error,bound,pass`; rows without an analytic bound
/// leave the field empty.
pub fn write_chain_csv(path: &Path, report: &ChainReport) -> Result<()> {
    let mut out = String::from("metric,estimate,std_error,bound,pass\n");
    for m in &report.metrics {
        let bound = m.bound.map(|b| b.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            m.metric, m.estimate, m.std_error, bound, m.pass
        ));
    }
    fs::write(path, out)?;
    Ok(())
}
