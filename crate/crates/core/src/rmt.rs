//! Null and spiked largest-eigenvalue asymptotics for sample covariances.

use crate::beta::Beta;
use crate::error::{Error, Result};
use crate::specfun::std_normal_cdf;
use crate::tracy_widom::tw_sf;

/// Pure-noise observation model: `n` sensors, windows of `window` snapshots,
/// white noise of variance `sigma2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    n: usize,
    window: usize,
    sigma2: f64,
    beta: Beta,
}

impl NoiseModel {
    pub fn new(n: usize, window: usize, sigma2: f64, beta: Beta) -> Result<Self> {
        if n == 0 || window == 0 {
            return Err(Error::InvalidParameter(format!("n and N must be at least 1 (got n={n}, N={window})")));
        }
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::InvalidParameter(format!("sigma2 must be positive and finite, got {sigma2}")));
        }
        Ok(NoiseModel { n, window, sigma2, beta })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Window length N.
    pub fn window(&self) -> usize {
        self.window
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn beta(&self) -> Beta {
        self.beta
    }

    /// n / N
    pub fn gamma(&self) -> f64 {
        self.n as f64 / self.window as f64
    }

    pub fn with_sigma2(&self, sigma2: f64) -> Result<Self> {
        NoiseModel::new(self.n, self.window, sigma2, self.beta)
    }

    /// √γ·σ², the smallest spike strength whose sample eigenvalue separates
    /// from the bulk.
    pub fn critical_strength(&self) -> f64 {
        self.gamma().sqrt() * self.sigma2
    }
}

/// Noise model plus strictly descending positive spike strengths.
#[derive(Debug, Clone, PartialEq)]
pub struct SpikedModel {
    noise: NoiseModel,
    lambdas: Vec<f64>,
}

impl SpikedModel {
    pub fn new(noise: NoiseModel, lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.len() >= noise.n() {
            return Err(Error::InvalidParameter(format!(
                "rank {} must be below the dimension {}",
                lambdas.len(),
                noise.n()
            )));
        }
        if lambdas.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::InvalidParameter("spike strengths must be positive and finite".into()));
        }
        if lambdas.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::InvalidParameter("spike strengths must be strictly descending".into()));
        }
        Ok(SpikedModel { noise, lambdas })
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn rank(&self) -> usize {
        self.lambdas.len()
    }

    /// Population eigenvalues, descending: λ_i + σ² followed by σ².
    pub fn population_eigenvalues(&self) -> Vec<f64> {
        let s = self.noise.sigma2();
        let mut v: Vec<f64> = self.lambdas.iter().map(|l| l + s).collect();
        v.resize(self.noise.n(), s);
        v
    }

    pub fn detectable_rank(&self) -> usize {
        self.lambdas.iter().filter(|&&l| is_detectable(&self.noise, l)).count()
    }

    /// Asymptotic location and scale of ℓ_i for each spike; `None` for
    /// subcritical spikes, which stick to the bulk edge.
    pub fn eigenvalue_limits(&self) -> Vec<Option<Standardization>> {
        self.lambdas.iter().map(|&l| spiked_standardization(&self.noise, l).ok()).collect()
    }
}

/// Location and scale used to standardize a sample eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Standardization {
    pub mu: f64,
    pub sd: f64,
}

impl Standardization {
    pub fn standardize(&self, x: f64) -> f64 {
        (x - self.mu) / self.sd
    }

    pub fn unstandardize(&self, z: f64) -> f64 {
        self.mu + z * self.sd
    }
}

/// Which branch of the risk to evaluate: pure noise, or one signal of
/// strength λ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Hypothesis {
    Null,
    Signal(f64),
}

/// Centering and scaling of the largest pure-noise eigenvalue:
/// μ = (σ²/N)(√n + √N)², sd = (σ²/N)(√n + √N)(1/√n + 1/√N)^{1/3}.
pub fn null_standardization(noise: &NoiseModel) -> Standardization {
    let n = noise.n() as f64;
    let big_n = noise.window() as f64;
    let s = noise.sigma2() / big_n;
    let root_sum = n.sqrt() + big_n.sqrt();
    Standardization {
        mu: s * root_sum * root_sum,
        sd: s * root_sum * (1.0 / n.sqrt() + 1.0 / big_n.sqrt()).cbrt(),
    }
}

/// Gaussian limit of a supercritical spiked eigenvalue.
pub fn spiked_standardization(noise: &NoiseModel, lambda: f64) -> Result<Standardization> {
    spiked_standardization_with(noise.gamma(), noise.window() as f64, noise.sigma2(), noise.beta(), lambda)
}

/// As [`spiked_standardization`] with γ supplied directly, so that the
/// N ≫ n limit γ = 0 can be evaluated.
pub fn spiked_standardization_with(gamma: f64, window: f64, sigma2: f64, beta: Beta, lambda: f64) -> Result<Standardization> {
    let limit = gamma.sqrt() * sigma2;
    if !(lambda > limit) || !lambda.is_finite() {
        return Err(Error::Subcritical { lambda, limit });
    }
    let mu = (lambda + sigma2) * (1.0 + gamma * sigma2 / lambda);
    let ratio = gamma * sigma2 * sigma2 / (lambda * lambda);
    let sd = (lambda + sigma2) * (2.0 / (beta.value() * window) * (1.0 - ratio)).sqrt();
    Ok(Standardization { mu, sd })
}

/// True iff λ > √γσ² strictly.
pub fn is_detectable(noise: &NoiseModel, lambda: f64) -> bool {
    lambda > noise.critical_strength()
}

/// σ²(1 + √γ)², the almost-sure limit of noise eigenvalues.
pub fn bulk_edge(noise: &NoiseModel) -> f64 {
    let g = noise.gamma().sqrt();
    noise.sigma2() * (1.0 + g) * (1.0 + g)
}

/// Limiting |⟨w, ŵ⟩| between a population spike eigenvector and its sample
/// counterpart; zero at or below the critical strength.
///
/// The limit is established for real data. For complex data it is returned
/// as the same expression, which has not been validated there.
pub fn eigenvector_overlap(noise: &NoiseModel, lambda: f64) -> f64 {
    if !is_detectable(noise, lambda) {
        return 0.0;
    }
    if lambda.is_infinite() {
        return 1.0;
    }
    let g = noise.gamma();
    let s = noise.sigma2();
    ((lambda - g * s * s / lambda) / (lambda + g * s)).sqrt()
}

/// Limiting risk of the rule "declare a signal iff ℓ_1 > T".
///
/// Under `Null` this is c_I·(1 − F_β((T − μ)/σ)); under `Signal(λ)` it is
/// c_E·Φ((T − μ(λ))/σ(λ)).
pub fn asymptotic_risk(noise: &NoiseModel, hypothesis: Hypothesis, threshold: f64, c_i: f64, c_e: f64) -> Result<f64> {
    if !(c_i >= 0.0 && c_e >= 0.0) {
        return Err(Error::InvalidParameter(format!("costs must be nonnegative (c_I={c_i}, c_E={c_e})")));
    }
    if threshold.is_nan() {
        return Err(Error::InvalidParameter("threshold is NaN".into()));
    }
    match hypothesis {
        Hypothesis::Null => {
            let z = null_standardization(noise).standardize(threshold);
            Ok(c_i * tw_sf(noise.beta(), z))
        }
        Hypothesis::Signal(lambda) => {
            let z = spiked_standardization(noise, lambda)?.standardize(threshold);
            Ok(c_e * std_normal_cdf(z))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tracy_widom::tw_cdf;

    fn model(n: usize, window: usize) -> NoiseModel {
        NoiseModel::new(n, window, 1.0, Beta::Complex).unwrap()
    }

    #[test]
    fn square_case() {
        for &n in &[4usize, 50, 1000] {
            let s = null_standardization(&model(n, n));
            assert!((s.mu - 4.0).abs() < 1e-12);
            let want = 2f64.powf(4.0 / 3.0) * (n as f64).powf(-2.0 / 3.0);
            assert!((s.sd - want).abs() < 1e-12 * want);
        }
    }

    #[test]
    fn nine_by_forty_five() {
        let s = null_standardization(&model(9, 45));
        let mu = (3.0 + 45f64.sqrt()).powi(2) / 45.0;
        let sd = (3.0 + 45f64.sqrt()) * (1.0 / 3.0 + 1.0 / 45f64.sqrt()).cbrt() / 45.0;
        assert!((s.mu - mu).abs() < 1e-14);
        assert!((s.sd - sd).abs() < 1e-14);
        // The exact value is 2.094427; at n/N = 0.2 it coincides with the bulk edge.
        assert!((s.mu - 2.09441).abs() < 1e-4);
        assert!((s.sd - 0.16920).abs() < 1e-5);
    }

    #[test]
    fn null_scales_with_sigma2() {
        let a = null_standardization(&model(9, 45));
        let b = null_standardization(&NoiseModel::new(9, 45, 2.0, Beta::Complex).unwrap());
        assert!((b.mu - 2.0 * a.mu).abs() < 1e-14);
        assert!((b.sd - 2.0 * a.sd).abs() < 1e-14);
    }

    #[test]
    fn spiked_hand_value() {
        let s = spiked_standardization(&model(9, 45), 1.0).unwrap();
        assert!((s.mu - 2.4).abs() < 1e-14);
        let sd = 2.0 * (0.8f64 / 45.0).sqrt();
        assert!((s.sd - sd).abs() < 1e-14);
        assert!((s.sd - 0.26667).abs() < 1e-5);
    }

    #[test]
    fn spiked_approaches_edge_at_boundary() {
        let m = model(9, 45);
        let edge = bulk_edge(&m);
        let lc = m.critical_strength();
        let s = spiked_standardization(&m, lc * (1.0 + 1e-9)).unwrap();
        assert!((s.mu - edge).abs() < 1e-8);
        assert!(s.sd < 1e-4);
        assert!(matches!(spiked_standardization(&m, lc), Err(Error::Subcritical { .. })));
        assert!(spiked_standardization(&m, 0.1).is_err());
    }

    #[test]
    fn gamma_zero_collapse() {
        let s = spiked_standardization_with(0.0, 1e6, 1.0, Beta::Real, 0.7).unwrap();
        assert_eq!(s.mu, 1.7);
    }

    #[test]
    fn spiked_location_increases() {
        let m = model(9, 45);
        let lc = m.critical_strength();
        let mut prev = f64::NEG_INFINITY;
        for k in 1..200 {
            let mu = spiked_standardization(&m, lc + 0.01 * k as f64).unwrap().mu;
            assert!(mu > prev);
            prev = mu;
        }
    }

    #[test]
    fn detectability_is_strict() {
        let m = model(9, 45);
        assert!(!is_detectable(&m, m.critical_strength()));
        assert!(!is_detectable(&m, 0.0));
        assert!(is_detectable(&m, 0.5));
    }

    #[test]
    fn bulk_edge_values() {
        assert_eq!(bulk_edge(&model(10, 10)), 4.0);
        assert!((bulk_edge(&model(9, 45)) - 2.09443).abs() < 1e-5);
        for &k in &[10usize, 100, 10_000] {
            let m = model(k, 5 * k);
            let gap = (bulk_edge(&m) - null_standardization(&m).mu).abs();
            assert!(gap < 1e-12);
        }
    }

    #[test]
    fn overlap_values() {
        let m = model(9, 45);
        assert_eq!(eigenvector_overlap(&m, m.critical_strength()), 0.0);
        assert!((eigenvector_overlap(&m, 1.0) - (0.8f64 / 1.2).sqrt()).abs() < 1e-14);
        assert!((eigenvector_overlap(&m, 1.0) - 0.81650).abs() < 1e-5);
        assert!(eigenvector_overlap(&m, 1e12) > 1.0 - 1e-9);
        assert_eq!(eigenvector_overlap(&m, f64::INFINITY), 1.0);
    }

    #[test]
    fn risk_limits() {
        let m = model(9, 45);
        let sig = Hypothesis::Signal(1.0);
        assert!(asymptotic_risk(&m, Hypothesis::Null, 1e3, 1.0, 1.0).unwrap() < 1e-12);
        assert!((asymptotic_risk(&m, sig, 1e3, 1.0, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((asymptotic_risk(&m, Hypothesis::Null, -1e3, 1.0, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(asymptotic_risk(&m, sig, -1e3, 1.0, 1.0).unwrap() < 1e-12);
    }

    #[test]
    fn risk_composition() {
        let m = model(9, 45);
        let null = asymptotic_risk(&m, Hypothesis::Null, 2.4, 1.0, 1.0).unwrap();
        let s = null_standardization(&m);
        let want = 1.0 - tw_cdf(Beta::Complex, (2.4 - s.mu) / s.sd);
        assert!((null - want).abs() < 1e-12);
        let alt = asymptotic_risk(&m, Hypothesis::Signal(1.0), 2.4, 1.0, 1.0).unwrap();
        assert!((alt - 0.5).abs() < 1e-15);
        assert!(asymptotic_risk(&m, Hypothesis::Signal(0.3), 2.4, 1.0, 1.0).is_err());
        assert!(asymptotic_risk(&m, Hypothesis::Null, 2.4, -1.0, 1.0).is_err());
    }

    #[test]
    fn risks_are_monotone_in_threshold() {
        let m = model(9, 45);
        let mut prev_null = f64::INFINITY;
        let mut prev_alt = f64::NEG_INFINITY;
        for k in 0..400 {
            let t = 1.5 + 0.005 * k as f64;
            let null = asymptotic_risk(&m, Hypothesis::Null, t, 1.0, 1.0).unwrap();
            let alt = asymptotic_risk(&m, Hypothesis::Signal(1.0), t, 1.0, 1.0).unwrap();
            assert!(null < prev_null && alt > prev_alt, "at T={t}");
            prev_null = null;
            prev_alt = alt;
        }
    }

    #[test]
    fn spiked_model_validation() {
        let m = model(4, 20);
        assert!(SpikedModel::new(m, vec![2.0, 1.0]).is_ok());
        assert!(SpikedModel::new(m, vec![1.0, 2.0]).is_err());
        assert!(SpikedModel::new(m, vec![1.0, 1.0]).is_err());
        assert!(SpikedModel::new(m, vec![4.0, 3.0, 2.0, 1.0]).is_err());
        let s = SpikedModel::new(m, vec![2.0, 0.1]).unwrap();
        assert_eq!(s.population_eigenvalues(), vec![3.0, 1.1, 1.0, 1.0]);
        assert_eq!(s.detectable_rank(), 1);
        assert!(s.eigenvalue_limits()[1].is_none());
    }

    #[test]
    fn noise_model_validation() {
        assert!(NoiseModel::new(0, 5, 1.0, Beta::Real).is_err());
        assert!(NoiseModel::new(5, 0, 1.0, Beta::Real).is_err());
        assert!(NoiseModel::new(5, 5, 0.0, Beta::Real).is_err());
        assert_eq!(model(9, 45).gamma(), 0.2);
    }
}
