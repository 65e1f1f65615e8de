//! Real symmetric tridiagonal matrices: Sturm-sequence bisection for the
//! leading eigenvalues and inverse iteration for their eigenvectors.

/// Symmetric tridiagonal matrix with diagonal `diag` and off-diagonal `off`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl SymTridiagonal {
    /// # Panics
    /// If `off.len() + 1 != diag.len()` (or `off` is nonempty for an empty diagonal).
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert!(!diag.is_empty() && off.len() + 1 == diag.len(), "off-diagonal length must be n - 1");
        SymTridiagonal { diag, off }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let tiny = f64::MIN_POSITIVE.sqrt() * (1.0 + x.abs());
        let mut count = 0;
        let mut q = self.diag[0] - x;
        for i in 0.. {
            if q == 0.0 {
                q = -tiny;
            }
            if q < 0.0 {
                count += 1;
            }
            if i + 1 == self.diag.len() {
                break;
            }
            let b = self.off[i];
            q = self.diag[i + 1] - x - b * b / q;
        }
        count
    }

    /// Gershgorin interval containing the spectrum.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 } + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// The `k` largest eigenvalues in descending order.
    pub fn largest_eigenvalues(&self, k: usize) -> Vec<f64> {
        let n = self.dim();
        let (lo, hi) = self.spectral_bounds();
        let pad = 1e-12 * (hi - lo).max(hi.abs()).max(f64::MIN_POSITIVE);
        (0..k.min(n)).map(|j| self.kth_smallest(n - 1 - j, lo - pad, hi + pad)).collect()
    }

    /// Eigenvalue number `k` (0-based, ascending) by bisection on the Sturm count.
    fn kth_smallest(&self, k: usize, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Unit eigenvector for an accurately computed eigenvalue `lambda`,
    /// normalised so its largest-magnitude entry is positive.
    pub fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.dim();
        if n == 1 {
            return vec![1.0];
        }
        let (lo, hi) = self.spectral_bounds();
        let shift = lambda + 4.0 * f64::EPSILON * (hi - lo).max(lambda.abs());
        let mut y: Vec<f64> = (0..n).map(|i| 1.0 + 0.01 * ((i * 7919) % 101) as f64).collect();
        for _ in 0..4 {
            y = self.shifted_solve(shift, &y);
            let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            for v in &mut y {
                *v /= norm;
            }
        }
        let big = y.iter().copied().fold(0.0f64, |a, v| if v.abs() > a.abs() { v } else { a });
        if big < 0.0 {
            for v in &mut y {
                *v = -*v;
            }
        }
        y
    }

    /// Solve (T − shift·I) y = rhs by Gaussian elimination with partial pivoting.
    fn shifted_solve(&self, shift: f64, rhs: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let tiny = f64::EPSILON * self.spectral_bounds().1.abs().max(1.0);
        // Row i of the upper factor has entries at columns i, i+1, i+2.
        let mut u0 = vec![0.0; n];
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        let mut b = rhs.to_vec();

        let mut cur = [self.diag[0] - shift, self.off[0], 0.0];
        for i in 0..n - 1 {
            let below = [self.off[i], self.diag[i + 1] - shift, if i + 2 < n { self.off[i + 1] } else { 0.0 }];
            let (top, bot, swap) = if below[0].abs() > cur[0].abs() {
                (below, cur, true)
            } else {
                (cur, below, false)
            };
            if swap {
                b.swap(i, i + 1);
            }
            let pivot = if top[0] == 0.0 { tiny } else { top[0] };
            let m = bot[0] / pivot;
            u0[i] = pivot;
            u1[i] = top[1];
            u2[i] = top[2];
            b[i + 1] -= m * b[i];
            cur = [bot[1] - m * top[1], bot[2] - m * top[2], 0.0];
        }
        u0[n - 1] = if cur[0] == 0.0 { tiny } else { cur[0] };

        let mut y = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = b[i];
            if i + 1 < n {
                s -= u1[i] * y[i + 1];
            }
            if i + 2 < n {
                s -= u2[i] * y[i + 2];
            }
            y[i] = s / u0[i];
        }
        y
    }
}
