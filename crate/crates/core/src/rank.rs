//! Sequential minimax rank selection and the fixed-false-alarm baseline.

use crate::error::{Error, Result};
use crate::rmt::{null_standardization, NoiseModel};
use crate::threshold::{solve_minimax_threshold, ThresholdProblem};
use crate::tracy_widom::tw_upper_quantile;

/// Inclusion cost c_I and per-index exclusion costs c_E(1..n).
#[derive(Debug, Clone, PartialEq)]
pub struct CostSchedule {
    c_i: f64,
    c_e: Vec<f64>,
}

impl CostSchedule {
    pub fn new(c_i: f64, c_e: Vec<f64>) -> Result<Self> {
        if !(c_i > 0.0 && c_i.is_finite()) {
            return Err(Error::InvalidParameter(format!("inclusion cost c_I must be positive, got {c_i}")));
        }
        if c_e.iter().any(|&c| !(c >= 0.0 && c.is_finite())) {
            return Err(Error::InvalidParameter("exclusion costs must be finite and nonnegative".into()));
        }
        if !c_e.iter().any(|&c| c > 0.0) {
            return Err(Error::InvalidParameter("at least one exclusion cost must be positive".into()));
        }
        Ok(CostSchedule { c_i, c_e })
    }

    /// c_I = c_E(i) = `cost` for every index.
    pub fn equal(n: usize, cost: f64) -> Result<Self> {
        Self::new(cost, vec![cost; n])
    }

    /// Exclusion cost `c_e` up to index `r_max`, zero beyond it, which caps
    /// the estimated rank at `r_max`.
    pub fn with_rmax(n: usize, c_i: f64, c_e: f64, r_max: usize) -> Result<Self> {
        if r_max == 0 || r_max > n {
            return Err(Error::InvalidParameter(format!("r_max must be in 1..={n}, got {r_max}")));
        }
        Self::new(c_i, (0..n).map(|i| if i < r_max { c_e } else { 0.0 }).collect())
    }

    pub fn c_i(&self) -> f64 {
        self.c_i
    }

    pub fn c_e(&self) -> &[f64] {
        &self.c_e
    }

    pub fn len(&self) -> usize {
        self.c_e.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c_e.is_empty()
    }
}

/// C_E(j) = Σ_{i ≥ j} c_E(i).
pub fn cumulative_exclusion_costs(schedule: &CostSchedule) -> Vec<f64> {
    let mut out = vec![0.0; schedule.len()];
    let mut acc = 0.0;
    for (j, c) in schedule.c_e().iter().enumerate().rev() {
        acc += c;
        out[j] = acc;
    }
    out
}

/// λ0 = √γ + N^{-1/3} on the unit-noise scale.
pub fn default_lambda0_unit(noise: &NoiseModel) -> f64 {
    noise.gamma().sqrt() + (noise.window() as f64).powf(-1.0 / 3.0)
}

/// Per-index thresholds T(i); indices with C_E(i) = 0 carry +∞.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSequence {
    thresholds: Vec<f64>,
    noise: NoiseModel,
    lambda0: f64,
    schedule: CostSchedule,
}

impl ThresholdSequence {
    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn schedule(&self) -> &CostSchedule {
        &self.schedule
    }

    /// A sequence from explicit values, e.g. a single fixed threshold.
    pub fn from_values(thresholds: Vec<f64>, noise: NoiseModel, lambda0: f64, schedule: CostSchedule) -> Self {
        ThresholdSequence { thresholds, noise, lambda0, schedule }
    }
}

/// T(i) solves the minimax equation with costs (c_I, C_E(i)).
pub fn build_threshold_sequence(noise: &NoiseModel, lambda0: f64, schedule: &CostSchedule) -> Result<ThresholdSequence> {
    let cumulative = cumulative_exclusion_costs(schedule);
    let mut thresholds = Vec::with_capacity(cumulative.len());
    for &c_e in &cumulative {
        if c_e == 0.0 {
            thresholds.push(f64::INFINITY);
            continue;
        }
        let problem = ThresholdProblem::new(*noise, lambda0, schedule.c_i(), c_e)?;
        thresholds.push(solve_minimax_threshold(&problem)?.threshold);
    }
    Ok(ThresholdSequence { thresholds, noise: *noise, lambda0, schedule: schedule.clone() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankEstimate {
    pub r_hat: usize,
    /// ℓ_i > T(i) for every index, including those past the stopping point.
    pub exceeds: Vec<bool>,
    pub eigenvalues: Vec<f64>,
}

/// Count leading eigenvalues above their thresholds, stopping at the first
/// one that is not.
pub fn estimate_rank(eigenvalues: &[f64], thresholds: &ThresholdSequence) -> RankEstimate {
    sequential_test(eigenvalues, |i| thresholds.thresholds().get(i).copied().unwrap_or(f64::INFINITY))
}

fn sequential_test(eigenvalues: &[f64], threshold: impl Fn(usize) -> f64) -> RankEstimate {
    let exceeds: Vec<bool> = eigenvalues.iter().enumerate().map(|(i, &l)| l > threshold(i)).collect();
    let r_hat = exceeds.iter().take_while(|&&e| e).count();
    RankEstimate { r_hat, exceeds, eigenvalues: eigenvalues.to_vec() }
}

/// Mean of the n − r_prev smallest eigenvalues.
pub fn estimate_noise_variance(eigenvalues: &[f64], r_prev: usize) -> Result<f64> {
    let n = eigenvalues.len();
    if r_prev >= n {
        return Err(Error::InvalidParameter(format!("previous rank {r_prev} must be below n = {n}")));
    }
    let tail = &eigenvalues[r_prev..];
    Ok(tail.iter().sum::<f64>() / tail.len() as f64)
}

/// μ + σ·F_β^{-1}(1 − false_alarm).
pub fn kn_threshold(noise: &NoiseModel, false_alarm: f64) -> Result<f64> {
    if !(false_alarm > 0.0 && false_alarm < 1.0) {
        return Err(Error::InvalidParameter(format!("false alarm rate must be in (0, 1), got {false_alarm}")));
    }
    let s = null_standardization(noise);
    Ok(s.unstandardize(tw_upper_quantile(noise.beta(), false_alarm)?))
}

/// Sequential test with one Tracy–Widom threshold at every index.
pub fn kn_estimate_rank(eigenvalues: &[f64], noise: &NoiseModel, false_alarm: f64) -> Result<RankEstimate> {
    let t = kn_threshold(noise, false_alarm)?;
    Ok(sequential_test(eigenvalues, |_| t))
}

/// Rank selected from a single batch of snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchSelection {
    pub estimate: RankEstimate,
    pub sequence: ThresholdSequence,
    /// Noise level the thresholds were built for.
    pub sigma2: f64,
    pub sigma2_estimated: bool,
}

/// Minimax rank selection for one sample covariance.
///
/// With `sigma2 = None` the noise level is the mean of the eigenvalues left
/// after removing the current rank estimate, iterated from r = 0 until the
/// rank stops changing. `lambda0_unit` is λ0/σ².
pub fn select_rank(
    eigenvalues: &[f64],
    base: &NoiseModel,
    lambda0_unit: f64,
    schedule: &CostSchedule,
    sigma2: Option<f64>,
) -> Result<BatchSelection> {
    let n = eigenvalues.len();
    if n != base.n() {
        return Err(Error::DimensionMismatch { expected: base.n(), got: n });
    }
    let run = |s2: f64| -> Result<(RankEstimate, ThresholdSequence)> {
        let noise = base.with_sigma2(s2)?;
        let seq = build_threshold_sequence(&noise, lambda0_unit * s2, schedule)?;
        Ok((estimate_rank(eigenvalues, &seq), seq))
    };
    if let Some(s2) = sigma2 {
        let (estimate, sequence) = run(s2)?;
        return Ok(BatchSelection { estimate, sequence, sigma2: s2, sigma2_estimated: false });
    }
    let mut r = 0;
    let mut seen = vec![false; n];
    loop {
        let s2 = estimate_noise_variance(eigenvalues, r.min(n - 1))?;
        let (estimate, sequence) = run(s2)?;
        seen[r.min(n - 1)] = true;
        let next = estimate.r_hat.min(n - 1);
        if next == r || seen[next] {
            return Ok(BatchSelection { estimate, sequence, sigma2: s2, sigma2_estimated: true });
        }
        r = next;
    }
}

/// Threshold sequences for a tracking run, recomputed only when the noise
/// estimate moves by more than `tolerance` relative to the one they were
/// built for.
#[derive(Debug, Clone)]
pub struct ThresholdCache {
    base: NoiseModel,
    lambda0_unit: f64,
    schedule: CostSchedule,
    false_alarm: f64,
    kn_quantile: f64,
    tolerance: f64,
    current: Option<(f64, ThresholdSequence)>,
    rebuilds: usize,
}

impl ThresholdCache {
    pub const DEFAULT_TOLERANCE: f64 = 1e-3;

    /// `lambda0_unit` is λ0 on the unit-noise scale; it is multiplied by
    /// the current noise estimate.
    pub fn new(base: NoiseModel, lambda0_unit: f64, schedule: CostSchedule, false_alarm: f64) -> Result<Self> {
        if schedule.len() != base.n() {
            return Err(Error::DimensionMismatch { expected: base.n(), got: schedule.len() });
        }
        if !(false_alarm > 0.0 && false_alarm < 1.0) {
            return Err(Error::InvalidParameter(format!("false alarm rate must be in (0, 1), got {false_alarm}")));
        }
        Ok(ThresholdCache {
            base,
            lambda0_unit,
            schedule,
            false_alarm,
            kn_quantile: tw_upper_quantile(base.beta(), false_alarm)?,
            tolerance: Self::DEFAULT_TOLERANCE,
            current: None,
            rebuilds: 0,
        })
    }

    /// Minimax thresholds for noise level `sigma2`.
    pub fn sequence(&mut self, sigma2: f64) -> Result<&ThresholdSequence> {
        let stale = match &self.current {
            Some((s, _)) => (sigma2 - s).abs() > self.tolerance * s.abs(),
            None => true,
        };
        if stale {
            let noise = self.base.with_sigma2(sigma2)?;
            let seq = build_threshold_sequence(&noise, self.lambda0_unit * sigma2, &self.schedule)?;
            self.current = Some((sigma2, seq));
            self.rebuilds += 1;
        }
        Ok(&self.current.as_ref().expect("just filled").1)
    }

    /// Fixed-false-alarm threshold for noise level `sigma2`.
    pub fn kn_threshold(&self, sigma2: f64) -> Result<f64> {
        let noise = self.base.with_sigma2(sigma2)?;
        Ok(null_standardization(&noise).unstandardize(self.kn_quantile))
    }

    pub fn false_alarm(&self) -> f64 {
        self.false_alarm
    }

    pub fn rebuilds(&self) -> usize {
        self.rebuilds
    }
}
