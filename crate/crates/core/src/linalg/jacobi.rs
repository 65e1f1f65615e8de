//! Cyclic Jacobi eigendecomposition for complex Hermitian matrices.

use super::matrix::{HermitianMatrix, C64};
use crate::error::{Error, Result};

pub const MAX_SWEEPS: usize = 100;
const OFF_DIAGONAL_TOL: f64 = 1e-12;
const HERMITIAN_TOL: f64 = 1e-10;

/// Eigenvalues in descending order with orthonormal eigenvectors.
///
/// Eigenvectors are stored column-major: `vector(i)` is the unit vector for
/// `values()[i]`.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    n: usize,
    values: Vec<f64>,
    vectors: Vec<C64>,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vector(&self, i: usize) -> &[C64] {
        &self.vectors[i * self.n..(i + 1) * self.n]
    }

    /// The leading `k` eigenvectors.
    pub fn leading_vectors(&self, k: usize) -> Vec<&[C64]> {
        (0..k.min(self.n)).map(|i| self.vector(i)).collect()
    }

    /// Ŵ L Ŵ*
    pub fn reconstruct(&self) -> HermitianMatrix {
        let mut m = HermitianMatrix::zeros(self.n);
        for i in 0..self.n {
            m.add_outer(self.vector(i), self.values[i]);
        }
        m
    }

    /// ‖Ŵ*Ŵ - I‖_F
    pub fn orthonormality_defect(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                let dot: C64 = self.vector(i).iter().zip(self.vector(j)).map(|(a, b)| a.conj() * b).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                acc += (dot - target).norm_sqr();
            }
        }
        acc.sqrt()
    }
}

fn off_diagonal_norm(a: &HermitianMatrix) -> f64 {
    let n = a.dim();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Full eigensystem of a Hermitian matrix by cyclic complex Jacobi rotations.
pub fn hermitian_eig(input: &HermitianMatrix) -> Result<EigenSystem> {
    let n = input.dim();
    let norm = input.frobenius_norm();
    let asym = input.max_asymmetry();
    if asym > HERMITIAN_TOL * norm.max(f64::MIN_POSITIVE) && asym > 0.0 {
        return Err(Error::NotHermitian(asym));
    }
    if input.as_slice().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidParameter("matrix has non-finite entries".into()));
    }

    // Work on the exactly Hermitian part.
    let mut a = HermitianMatrix::from_fn(n, |i, j| 0.5 * (input[(i, j)] + input[(j, i)].conj()));
    let mut v = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        v[i * n + i] = C64::new(1.0, 0.0);
    }

    let target = OFF_DIAGONAL_TOL * norm;
    let mut converged = off_diagonal_norm(&a) <= target;
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence(MAX_SWEEPS));
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
        converged = off_diagonal_norm(&a) <= target;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    // v holds eigenvectors as columns in row-major layout; transpose into
    // column-major storage in sorted order.
    let mut vectors = Vec::with_capacity(n * n);
    for &col in &order {
        for row in 0..n {
            vectors.push(v[row * n + col]);
        }
    }
    Ok(EigenSystem { n, values, vectors })
}

/// Annihilate a_pq with the unitary U = P J, where P rotates the phase of
/// column q so a_pq becomes real and J is a real Jacobi rotation.
fn rotate(a: &mut HermitianMatrix, v: &mut [C64], p: usize, q: usize) {
    let n = a.dim();
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // Negligible against both diagonal entries: just drop it.
    if r < 1e-300 || (app.abs() + r * 1e18 == app.abs() && aqq.abs() + r * 1e18 == aqq.abs()) {
        a[(p, q)] = C64::new(0.0, 0.0);
        a[(q, p)] = C64::new(0.0, 0.0);
        return;
    }
    let phase = apq.conj() / r; // e^{-iφ}
    let theta = (aqq - app) / (2.0 * r);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // Columns: col_p <- c col_p - s e^{-iφ} col_q ; col_q <- s col_p + c e^{-iφ} col_q
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)] * phase;
        a[(k, p)] = akp * c - akq * s;
        a[(k, q)] = akp * s + akq * c;
    }
    // Rows: row_p <- c row_p - s e^{iφ} row_q ; row_q <- s row_p + c e^{iφ} row_q
    let phase_c = phase.conj();
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)] * phase_c;
        a[(p, k)] = apk * c - aqk * s;
        a[(q, k)] = apk * s + aqk * c;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[k * n + p];
        let vkq = v[k * n + q] * phase;
        v[k * n + p] = vkp * c - vkq * s;
        v[k * n + q] = vkp * s + vkq * c;
    }
}
