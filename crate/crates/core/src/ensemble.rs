//! Random draws of Gaussian snapshots and of the leading eigenvalues of
//! white or single-spike sample covariances.
//!
//! [`SpikeSampler`] avoids forming the n×n sample covariance. Householder
//! bidiagonalisation of an n×N Gaussian matrix G (N ≥ n) gives G = U L V*
//! with L lower bidiagonal, independent entries
//! L_ii ~ χ_{β(N−i+1)}/√β and L_{i+1,i} ~ χ_{β(n−i)}/√β, and a left factor
//! U that fixes the first coordinate. With population covariance
//! σ²·diag(1+λ, 1, …, 1) = σ² D², the sample covariance (σ²/N) D G G* D is
//! therefore unitarily similar to the tridiagonal (σ²/N) D L Lᵀ D, and the
//! first coordinate of its eigenvectors carries the overlap with the spike
//! direction.

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::beta::Beta;
use crate::error::{Error, Result};
use crate::linalg::tridiagonal::SymTridiagonal;
use crate::linalg::C64;

/// One white Gaussian snapshot with per-entry variance `sigma2`
/// (circular complex when β = 2).
pub fn gaussian_snapshot<R: Rng + ?Sized>(n: usize, beta: Beta, sigma2: f64, rng: &mut R) -> Vec<C64> {
    match beta {
        Beta::Real => {
            let s = sigma2.sqrt();
            (0..n).map(|_| C64::new(s * rng.sample::<f64, _>(StandardNormal), 0.0)).collect()
        }
        Beta::Complex => complex_gaussian(n, sigma2, rng),
    }
}

/// `n` i.i.d. circular complex Gaussians with E|z|² = `variance`.
pub fn complex_gaussian<R: Rng + ?Sized>(n: usize, variance: f64, rng: &mut R) -> Vec<C64> {
    let s = (0.5 * variance).sqrt();
    (0..n)
        .map(|_| C64::new(s * rng.sample::<f64, _>(StandardNormal), s * rng.sample::<f64, _>(StandardNormal)))
        .collect()
}

/// Sampler for the spectrum of (1/N) Σ x x* with x ~ N(0, σ²(I + λ e₁e₁*)).
#[derive(Debug, Clone)]
pub struct SpikeSampler {
    n: usize,
    window: usize,
    sigma2: f64,
    beta: Beta,
    lambda: f64,
    diag_laws: Vec<ChiSquared<f64>>,
    off_laws: Vec<ChiSquared<f64>>,
}

impl SpikeSampler {
    /// `lambda = 0` gives pure noise.
    pub fn new(n: usize, window: usize, sigma2: f64, beta: Beta, lambda: f64) -> Result<Self> {
        if n == 0 || window < n {
            return Err(Error::InvalidParameter(format!("need 1 <= n <= N (got n={n}, N={window})")));
        }
        if !(sigma2 > 0.0) || !(lambda >= 0.0) {
            return Err(Error::InvalidParameter("need sigma2 > 0 and lambda >= 0".into()));
        }
        let b = beta.value();
        let chi = |k: f64| ChiSquared::new(k).map_err(|e| Error::InvalidParameter(e.to_string()));
        let diag_laws = (0..n).map(|i| chi(b * (window - i) as f64)).collect::<Result<_>>()?;
        let off_laws = (1..n).map(|i| chi(b * (n - i) as f64)).collect::<Result<_>>()?;
        Ok(SpikeSampler { n, window, sigma2, beta, lambda, diag_laws, off_laws })
    }

    pub fn null(n: usize, window: usize, sigma2: f64, beta: Beta) -> Result<Self> {
        Self::new(n, window, sigma2, beta, 0.0)
    }

    /// A random tridiagonal matrix with the sample covariance's spectrum.
    pub fn sample_tridiagonal<R: Rng + ?Sized>(&self, rng: &mut R) -> SymTridiagonal {
        let b = self.beta.value();
        let d2: Vec<f64> = self.diag_laws.iter().map(|law| law.sample(rng) / b).collect();
        let e2: Vec<f64> = self.off_laws.iter().map(|law| law.sample(rng) / b).collect();
        let scale = self.sigma2 / self.window as f64;
        let mut diag = Vec::with_capacity(self.n);
        let mut off = Vec::with_capacity(self.n.saturating_sub(1));
        for i in 0..self.n {
            let mut a = d2[i];
            if i > 0 {
                a += e2[i - 1];
            }
            diag.push(scale * a);
            if i + 1 < self.n {
                off.push(scale * (d2[i] * e2[i]).sqrt());
            }
        }
        let boost = 1.0 + self.lambda;
        diag[0] *= boost;
        if self.n > 1 {
            off[0] *= boost.sqrt();
        }
        SymTridiagonal::new(diag, off)
    }

    /// The `k` largest sample eigenvalues, descending.
    pub fn top_eigenvalues<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Vec<f64> {
        self.sample_tridiagonal(rng).largest_eigenvalues(k)
    }

    /// ℓ_1 together with |⟨e₁, ŵ_1⟩|, the overlap of the top sample
    /// eigenvector with the spike direction.
    pub fn top_with_overlap<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let t = self.sample_tridiagonal(rng);
        let l1 = t.largest_eigenvalues(1)[0];
        let v = t.eigenvector(l1);
        (l1, v[0].abs())
    }
}
