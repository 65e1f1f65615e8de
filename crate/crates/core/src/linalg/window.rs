use std::collections::VecDeque;

use super::matrix::{HermitianMatrix, C64};
use crate::beta::Beta;
use crate::error::{Error, Result};

/// One array observation x(t).
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    time_index: i64,
    beta: Beta,
    values: Vec<C64>,
}

impl Snapshot {
    pub fn real(time_index: i64, values: &[f64]) -> Result<Self> {
        Self::checked(time_index, Beta::Real, values.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn complex(time_index: i64, values: Vec<C64>) -> Result<Self> {
        Self::checked(time_index, Beta::Complex, values)
    }

    fn checked(time_index: i64, beta: Beta, values: Vec<C64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("snapshot must have at least one entry".into()));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter(format!("snapshot at t={time_index} has non-finite entries")));
        }
        Ok(Snapshot { time_index, beta, values })
    }

    pub fn time_index(&self) -> i64 {
        self.time_index
    }

    pub fn beta(&self) -> Beta {
        self.beta
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }
}

/// Ring buffer holding the most recent `capacity` snapshots.
#[derive(Debug, Clone)]
pub struct SnapshotWindow {
    capacity: usize,
    dim: usize,
    beta: Beta,
    snapshots: VecDeque<Snapshot>,
}

impl SnapshotWindow {
    pub fn new(capacity: usize, dim: usize, beta: Beta) -> Result<Self> {
        if capacity == 0 || dim == 0 {
            return Err(Error::InvalidParameter("window capacity and dimension must be positive".into()));
        }
        Ok(SnapshotWindow { capacity, dim, beta, snapshots: VecDeque::with_capacity(capacity) })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn beta(&self) -> Beta {
        self.beta
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.snapshots.len() == self.capacity
    }

    pub fn iter(&self) -> impl Iterator<Item = &Snapshot> {
        self.snapshots.iter()
    }

    /// Store `snapshot`, evicting the oldest entry when full.
    pub fn push(&mut self, snapshot: Snapshot) -> Result<()> {
        if snapshot.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: snapshot.dim() });
        }
        if snapshot.beta() != self.beta {
            return Err(Error::InvalidParameter(format!(
                "window holds beta={} data but snapshot has beta={}",
                self.beta,
                snapshot.beta()
            )));
        }
        if self.is_full() {
            self.snapshots.pop_front();
        }
        self.snapshots.push_back(snapshot);
        Ok(())
    }

    pub fn clear(&mut self) {
        self.snapshots.clear();
    }
}

/// (1/N) Σ x x* over the stored snapshots, N being the number stored.
///
/// Only the upper triangle is accumulated; the lower one is its exact
/// conjugate, so the result is Hermitian bit-for-bit.
pub fn sample_covariance(window: &SnapshotWindow) -> Result<HermitianMatrix> {
    if window.is_empty() {
        return Err(Error::EmptyWindow);
    }
    covariance_of(window.iter().map(|s| s.values()), window.dim())
}

pub(crate) fn covariance_of<'a>(rows: impl Iterator<Item = &'a [C64]>, n: usize) -> Result<HermitianMatrix> {
    let mut m = HermitianMatrix::zeros(n);
    let mut count = 0usize;
    for x in rows {
        count += 1;
        for i in 0..n {
            let xi = x[i];
            for j in i..n {
                m[(i, j)] += xi * x[j].conj();
            }
        }
    }
    if count == 0 {
        return Err(Error::EmptyWindow);
    }
    let inv = 1.0 / count as f64;
    for i in 0..n {
        m[(i, i)] = C64::new(m[(i, i)].re * inv, 0.0);
        for j in i + 1..n {
            let z = m[(i, j)] * inv;
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    Ok(m)
}
