use rand::Rng;

use super::scenario::Scenario;
use crate::beta::Beta;
use crate::ensemble::complex_gaussian;
use crate::error::Result;
use crate::linalg::{hermitian_eig, HermitianMatrix, Snapshot, C64};

/// (1, e^{jω}, …, e^{j(n−1)ω}), unnormalised.
pub fn steering_vector(omega: f64, n: usize) -> Vec<C64> {
    (0..n).map(|k| C64::from_polar(1.0, k as f64 * omega)).collect()
}

/// A C_S A* = Σ_active |C_0,i|² a_i a_i* at time `t`.
pub fn signal_covariance(scenario: &Scenario, t: f64) -> HermitianMatrix {
    let mut c = HermitianMatrix::zeros(scenario.n);
    for e in scenario.active_events(t) {
        c.add_outer(&steering_vector(e.omega(t), scenario.n), e.power(scenario.sigma2));
    }
    c
}

/// A C_S A* + σ² I.
pub fn population_covariance(scenario: &Scenario, t: f64) -> HermitianMatrix {
    let mut c = signal_covariance(scenario, t);
    for i in 0..scenario.n {
        c[(i, i)] += C64::new(scenario.sigma2, 0.0);
    }
    c
}

/// x(t) = Σ s_i(t) a(ω_i(t)) + noise, with circular complex Gaussian
/// sources of power |C_0,i|² and noise of power σ² per sensor.
pub fn generate_snapshot<R: Rng + ?Sized>(scenario: &Scenario, t: f64, time_index: i64, rng: &mut R) -> Result<Snapshot> {
    let mut x = complex_gaussian(scenario.n, scenario.sigma2, rng);
    for e in scenario.active_events(t) {
        let s = complex_gaussian(1, e.power(scenario.sigma2), rng)[0];
        for (xk, ak) in x.iter_mut().zip(steering_vector(e.omega(t), scenario.n)) {
            *xk += s * ak;
        }
    }
    Snapshot::complex(time_index, x)
}

/// Signal subspace at time `t`.
#[derive(Debug, Clone)]
pub struct TrueSubspace {
    /// Number of active sources.
    pub rank: usize,
    /// Orthonormal basis W, one vector per active source.
    pub basis: Vec<Vec<C64>>,
    /// Population spike strengths λ_i (eigenvalues of A C_S A*), descending.
    pub strengths: Vec<f64>,
}

pub fn true_subspace(scenario: &Scenario, t: f64) -> Result<TrueSubspace> {
    let rank = scenario.active_events(t).count();
    if rank == 0 {
        return Ok(TrueSubspace { rank, basis: Vec::new(), strengths: Vec::new() });
    }
    let eig = hermitian_eig(&signal_covariance(scenario, t))?;
    Ok(TrueSubspace {
        rank,
        basis: (0..rank).map(|i| eig.vector(i).to_vec()).collect(),
        strengths: eig.values()[..rank].to_vec(),
    })
}

/// ‖WW* − VV*‖_F² = r + k − 2‖W*V‖_F² for orthonormal W (r columns) and
/// V (k columns); clamped at zero against rounding.
pub fn subspace_error<W: AsRef<[C64]>, V: AsRef<[C64]>>(w: &[W], v: &[V]) -> f64 {
    let mut cross = 0.0;
    for a in w {
        for b in v {
            let dot: C64 = a.as_ref().iter().zip(b.as_ref()).map(|(x, y)| x.conj() * y).sum();
            cross += dot.norm_sqr();
        }
    }
    (w.len() as f64 + v.len() as f64 - 2.0 * cross).max(0.0)
}

/// The field of simulated array data.
pub const ARRAY_BETA: Beta = Beta::Complex;
