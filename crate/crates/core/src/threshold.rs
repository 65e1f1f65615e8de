//! Minimax eigenvalue thresholds.
//!
//! The exact threshold T equalises the two limiting risks,
//! c_I·(1 − F_β((T − μ)/σ)) = c_E·Φ((T − μ(λ0))/σ(λ0)),
//! and is found by bisection. The closed-form approximations describe the
//! standardized threshold t = (T − μ)/σ when λ0 = √γ + h sits just above
//! the detection limit, on the σ² = 1 scale.

use crate::error::{Error, Result};
use crate::rmt::{asymptotic_risk, null_standardization, spiked_standardization, Hypothesis, NoiseModel, Standardization};
use crate::specfun::{std_normal_cdf, std_normal_quantile};
use crate::tracy_widom::{tw_cdf, tw_pdf, tw_quantile, tw_sf};

const MAX_ITERATIONS: usize = 200;
const MAX_EXPANSIONS: usize = 64;

/// Inputs of one minimax threshold solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdProblem {
    noise: NoiseModel,
    lambda0: f64,
    c_i: f64,
    c_e: f64,
}

impl ThresholdProblem {
    pub fn new(noise: NoiseModel, lambda0: f64, c_i: f64, c_e: f64) -> Result<Self> {
        if !(c_i > 0.0 && c_i.is_finite()) {
            return Err(Error::InvalidParameter(format!("inclusion cost c_I must be positive, got {c_i}")));
        }
        if !(c_e > 0.0 && c_e.is_finite()) {
            return Err(Error::InvalidParameter(format!("exclusion cost c_E must be positive, got {c_e}")));
        }
        let limit = noise.critical_strength();
        if !(lambda0 > limit) || !lambda0.is_finite() {
            return Err(Error::Subcritical { lambda: lambda0, limit });
        }
        Ok(ThresholdProblem { noise, lambda0, c_i, c_e })
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn c_i(&self) -> f64 {
        self.c_i
    }

    pub fn c_e(&self) -> f64 {
        self.c_e
    }

    /// Risk when no signal is present: c_I·P(ℓ_1 > T).
    pub fn null_risk(&self, threshold: f64) -> f64 {
        asymptotic_risk(&self.noise, Hypothesis::Null, threshold, self.c_i, self.c_e).expect("validated problem")
    }

    /// Risk under the weakest admissible signal: c_E·P(ℓ_1 ≤ T).
    pub fn alternate_risk(&self, threshold: f64) -> f64 {
        asymptotic_risk(&self.noise, Hypothesis::Signal(self.lambda0), threshold, self.c_i, self.c_e)
            .expect("validated problem")
    }

    pub fn max_risk(&self, threshold: f64) -> f64 {
        self.null_risk(threshold).max(self.alternate_risk(threshold))
    }

    /// null risk − alternate risk; strictly decreasing in T.
    pub fn imbalance(&self, threshold: f64) -> f64 {
        self.null_risk(threshold) - self.alternate_risk(threshold)
    }

    /// The initial bisection bracket [μ − 10σ, μ(λ0) + 10σ(λ0)].
    pub fn default_bracket(&self) -> (f64, f64) {
        let null = null_standardization(&self.noise);
        let alt = self.alternate_standardization();
        (null.mu - 10.0 * null.sd, alt.mu + 10.0 * alt.sd)
    }

    pub fn alternate_standardization(&self) -> Standardization {
        spiked_standardization(&self.noise, self.lambda0).expect("validated problem")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdSolution {
    /// Threshold on the eigenvalue scale.
    pub threshold: f64,
    /// (T − μ)/σ with the null standardization.
    pub t: f64,
    /// |null risk − alternate risk| at T.
    pub residual: f64,
    pub null_risk: f64,
    pub alternate_risk: f64,
    /// The equalised (minimax) risk.
    pub max_risk: f64,
}

/// Solve for the threshold that equalises the null and worst-case
/// alternate risks.
pub fn solve_minimax_threshold(problem: &ThresholdProblem) -> Result<ThresholdSolution> {
    let (mut lo, mut hi) = problem.default_bracket();
    let mut g_lo = problem.imbalance(lo);
    let mut g_hi = problem.imbalance(hi);
    let mut expansions = 0;
    while !(g_lo > 0.0 && g_hi < 0.0) {
        if expansions == MAX_EXPANSIONS || !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::Bracket { lo, hi });
        }
        let width = hi - lo;
        if g_lo <= 0.0 {
            lo -= width;
            g_lo = problem.imbalance(lo);
        }
        if g_hi >= 0.0 {
            hi += width;
            g_hi = problem.imbalance(hi);
        }
        expansions += 1;
    }

    for _ in 0..MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g = problem.imbalance(mid);
        if g == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if g > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Take whichever end is closer to balance.
    let threshold = if problem.imbalance(lo).abs() <= problem.imbalance(hi).abs() { lo } else { hi };
    let null_risk = problem.null_risk(threshold);
    let alternate_risk = problem.alternate_risk(threshold);
    Ok(ThresholdSolution {
        threshold,
        t: null_standardization(problem.noise()).standardize(threshold),
        residual: (null_risk - alternate_risk).abs(),
        null_risk,
        alternate_risk,
        max_risk: null_risk.max(alternate_risk),
    })
}

/// Small-gap expansions of the alternate standardization at λ0 = √γ + h
/// (σ² = 1 scale), and the resulting linear form of the alternate
/// argument (T − μ(λ0))/σ(λ0) ≈ ρ·t − m in the standardized threshold t.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallGapExpansion {
    pub h: f64,
    /// μ(√γ + h) − μ ≈ h²/√γ
    pub mu_shift: f64,
    /// σ(√γ + h) ≈ 2β^{-1/2}(γ^{1/4} + γ^{-1/4})√(h/N)
    pub sd_small_h: f64,
    /// σ_{N,n} / sd_small_h, with the exact finite-(n, N) null scale.
    pub rho: f64,
    /// mu_shift / sd_small_h
    pub m: f64,
    gamma: f64,
    window: f64,
    beta: f64,
    kappa: f64,
}

impl SmallGapExpansion {
    pub fn new(h: f64, noise: &NoiseModel) -> Result<Self> {
        if !(h >= 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter(format!("gap h must be nonnegative, got {h}")));
        }
        let unit = noise.with_sigma2(1.0)?;
        let gamma = unit.gamma();
        let window = unit.window() as f64;
        let beta = unit.beta().value();
        let kappa = gamma.powf(0.25) + gamma.powf(-0.25);
        let mu_shift = h * h / gamma.sqrt();
        let sd_small_h = 2.0 / beta.sqrt() * kappa * (h / window).sqrt();
        let null_sd = null_standardization(&unit).sd;
        let (rho, m) = if h > 0.0 { (null_sd / sd_small_h, mu_shift / sd_small_h) } else { (f64::INFINITY, 0.0) };
        Ok(SmallGapExpansion { h, mu_shift, sd_small_h, rho, m, gamma, window, beta, kappa })
    }

    /// ρ·t − m
    pub fn standardized_argument(&self, t: f64) -> f64 {
        self.rho * t - self.m
    }

    /// The expanded argument in its closed form,
    /// √β·(t/2)·(κ/(h³N))^{1/6} − √(β/(2γ))·√(h³N)/κ,
    /// which presumes the asymptotic null scale (κ/N)^{2/3}.
    pub fn printed_argument(&self, t: f64) -> f64 {
        let h3n = self.h.powi(3) * self.window;
        self.beta.sqrt() * 0.5 * t * (self.kappa / h3n).powf(1.0 / 6.0)
            - (self.beta / (2.0 * self.gamma)).sqrt() * h3n.sqrt() / self.kappa
    }
}

/// Which regime of the small-gap approximation applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapCase {
    /// c_E > (1 − F_β(0))·c_I
    Dominant,
    /// c_E < (1 − F_β(0))·c_I
    Recessive,
    /// c_E = (1 − F_β(0))·c_I
    Balanced,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallGapThreshold {
    pub case: GapCase,
    pub t: f64,
}

/// Leading-order standardized threshold for h = o(N^{-1/3}).
///
/// The cost ratio picks the regime; the balanced case solves
/// t² = K·exp(−ρ²t²/2) with K = c_E/(c_I f_β(0) √(2π) ρ) by damped
/// fixed-point iteration.
pub fn lemma1_threshold(h: f64, noise: &NoiseModel, c_i: f64, c_e: f64) -> Result<SmallGapThreshold> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("gap h must be positive, got {h}")));
    }
    check_costs(c_i, c_e)?;
    let beta = noise.beta();
    let exp = SmallGapExpansion::new(h, noise)?;
    let rho = exp.rho;
    let ratio = c_e / c_i;
    let tail0 = tw_sf(beta, 0.0);
    let root_two_pi = (2.0 * std::f64::consts::PI).sqrt();

    if (ratio - tail0).abs() <= 1e-12 * tail0 {
        let k = ratio / (tw_pdf(beta, 0.0) * root_two_pi * rho);
        let c = 0.5 * rho * rho;
        let mut u = k;
        for _ in 0..10_000 {
            let w = 1.0 / (1.0 + c * u);
            let next = (1.0 - w) * u + w * k * (-c * u).exp();
            let done = (next - u).abs() <= 1e-10 * next.abs().max(f64::MIN_POSITIVE);
            u = next;
            if done {
                return Ok(SmallGapThreshold { case: GapCase::Balanced, t: u.sqrt() });
            }
        }
        return Err(Error::NoConvergence(10_000));
    }

    if ratio > tail0 {
        let z = std_normal_quantile(tail0 / ratio)?;
        Ok(SmallGapThreshold { case: GapCase::Dominant, t: z / rho })
    } else {
        let t0 = tw_quantile(beta, 1.0 - ratio)?;
        let correction = ratio / (tw_pdf(beta, t0) * root_two_pi * rho * t0) * (-0.5 * rho * rho * t0 * t0).exp();
        Ok(SmallGapThreshold { case: GapCase::Recessive, t: t0 + correction })
    }
}

/// Standardized threshold for h = h0·N^{-1/3}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediumGapThreshold {
    /// Root of c_I(1 − F_β(t)) = c_E·Φ(ρt − m).
    pub t: f64,
    /// −√(2 log(c_E/c_I))/ρ, the c_E ≫ c_I limit; `None` unless c_E > c_I.
    pub large_exclusion_limit: Option<f64>,
    /// ((3/(2β)) log(c_I/c_E))^{2/3}, the c_E ≪ c_I limit; `None` unless c_E < c_I.
    pub small_exclusion_limit: Option<f64>,
}

pub fn lemma2_threshold(h0: f64, noise: &NoiseModel, c_i: f64, c_e: f64) -> Result<MediumGapThreshold> {
    if !(h0 > 0.0 && h0.is_finite()) {
        return Err(Error::InvalidParameter(format!("h0 must be positive, got {h0}")));
    }
    check_costs(c_i, c_e)?;
    let beta = noise.beta();
    let h = h0 * (noise.window() as f64).powf(-1.0 / 3.0);
    let exp = SmallGapExpansion::new(h, noise)?;
    let g = |t: f64| c_i * tw_sf(beta, t) - c_e * std_normal_cdf(exp.standardized_argument(t));

    let (mut lo, mut hi) = (-10.0, 10.0);
    let mut expansions = 0;
    while !(g(lo) > 0.0 && g(hi) < 0.0) {
        if expansions == MAX_EXPANSIONS {
            return Err(Error::Bracket { lo, hi });
        }
        lo *= 2.0;
        hi *= 2.0;
        expansions += 1;
    }
    for _ in 0..MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let ratio = c_e / c_i;
    Ok(MediumGapThreshold {
        t: 0.5 * (lo + hi),
        large_exclusion_limit: (ratio > 1.0).then(|| -(2.0 * ratio.ln()).sqrt() / exp.rho),
        small_exclusion_limit: (ratio < 1.0).then(|| (1.5 / beta.value() * (1.0 / ratio).ln()).powf(2.0 / 3.0)),
    })
}

fn check_costs(c_i: f64, c_e: f64) -> Result<()> {
    if !(c_i > 0.0 && c_e > 0.0 && c_i.is_finite() && c_e.is_finite()) {
        return Err(Error::InvalidParameter(format!("costs must be positive (c_I={c_i}, c_E={c_e})")));
    }
    Ok(())
}

/// Cost ratio c_E/c_I at which the small-gap regime switches: 1 − F_β(0).
pub fn gap_case_boundary(beta: crate::Beta) -> f64 {
    1.0 - tw_cdf(beta, 0.0)
}
