//! Tracy–Widom distributions F_1 and F_2 built from the Hastings–McLeod
//! solution of Painlevé II.
//!
//! The solution q of `q'' = x q + 2 q^3` with `q ~ Ai` at +∞ is integrated
//! backwards from `x_max` with an embedded Runge–Kutta pair. The integrals
//! `∫_s^∞ q`, `∫_s^∞ q²` and `∫_s^∞ (x - s) q²` ride along as extra state, so
//! one sweep yields
//!
//! ```text
//! F_2(s) = exp(-∫_s^∞ (x - s) q²)
//! F_1(s) = exp(-½ ∫_s^∞ q + (x - s) q²)
//! ```
//!
//! on a uniform grid. Between nodes the distribution is evaluated by cubic
//! Hermite interpolation using the exact density; outside the grid the
//! closed-form tail approximations take over.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::beta::Beta;
use crate::error::{Error, Result};
use crate::ode::{Integrator, Tolerance};
use crate::specfun::{airy_ai, airy_ai_with_derivative};

pub const DEFAULT_X_MIN: f64 = -10.0;
pub const DEFAULT_X_MAX: f64 = 8.0;
pub const DEFAULT_STEP: f64 = 0.005;
pub const DEFAULT_TOLERANCE: f64 = 1e-13;

/// Hastings–McLeod solution sampled on a uniform grid, with the running
/// tail integrals needed for the distribution functions.
#[derive(Debug, Clone)]
pub struct HastingsMcLeod {
    pub grid: Vec<f64>,
    pub q: Vec<f64>,
    pub q_prime: Vec<f64>,
    /// ∫_x^∞ q(y) dy
    pub int_q: Vec<f64>,
    /// ∫_x^∞ q(y)² dy
    pub int_q2: Vec<f64>,
    /// ∫_x^∞ (y - x) q(y)² dy
    pub int_lin_q2: Vec<f64>,
}

/// Integrals of Ai beyond `x0`: (∫ Ai, ∫ Ai², ∫ (x - x0) Ai²).
fn airy_tail_integrals(x0: f64) -> (f64, f64, f64) {
    // Ai is below 1e-40 by x0 + 12 for any x0 we use.
    let len = 12.0;
    let m = 4000;
    let h = len / m as f64;
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    for i in 0..=m {
        let x = x0 + i as f64 * h;
        let w = if i == 0 || i == m {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let ai = airy_ai(x);
        a += w * ai;
        b += w * ai * ai;
        c += w * (x - x0) * ai * ai;
    }
    (a * h / 3.0, b * h / 3.0, c * h / 3.0)
}

/// Integrate the Hastings–McLeod solution backwards from `x_max` to `x_min`,
/// sampling every `step`.
pub fn solve_hastings_mcleod(x_min: f64, x_max: f64, step: f64, tolerance: f64) -> Result<HastingsMcLeod> {
    if !(x_max >= 6.0 && x_min <= -8.0) {
        return Err(Error::Domain(format!(
            "Hastings-McLeod grid must cover [-8, 6], got [{x_min}, {x_max}]"
        )));
    }
    if !(step > 0.0 && tolerance > 0.0) {
        return Err(Error::Domain("step and tolerance must be positive".into()));
    }
    let intervals = ((x_max - x_min) / step).round() as usize;
    let (ai, aip) = airy_ai_with_derivative(x_max);
    let (iq, iq2, ilin) = airy_tail_integrals(x_max);

    // State: q, q', ∫q, ∫q², ∫(y - x)q².
    let rhs = |x: f64, y: &[f64; 5]| {
        let q = y[0];
        [y[1], x * q + 2.0 * q * q * q, -q, -q * q, -y[3]]
    };
    let tol = Tolerance { rtol: tolerance, atol: tolerance * 1e-12 };
    let mut ode = Integrator::new(rhs, x_max, [ai, aip, iq, iq2, ilin], step, tol);

    let n = intervals + 1;
    let mut out = HastingsMcLeod {
        grid: vec![0.0; n],
        q: vec![0.0; n],
        q_prime: vec![0.0; n],
        int_q: vec![0.0; n],
        int_q2: vec![0.0; n],
        int_lin_q2: vec![0.0; n],
    };
    for k in (0..n).rev() {
        let x = x_min + k as f64 * step;
        if k < intervals {
            ode.advance_to(x)?;
        }
        let y = ode.y;
        // q stays positive and below its -∞ asymptote √(|x|/2) by a wide margin.
        let ceiling = 2.0 * (x.abs() / 2.0).sqrt() + 1.0;
        if !(y[0] > 0.0) || y[0] > ceiling {
            return Err(Error::Integration {
                x,
                reason: format!("q = {} left the Hastings-McLeod range", y[0]),
            });
        }
        out.grid[k] = x;
        out.q[k] = y[0];
        out.q_prime[k] = y[1];
        out.int_q[k] = y[2];
        out.int_q2[k] = y[3];
        out.int_lin_q2[k] = y[4];
    }
    Ok(out)
}

/// Closed-form upper-tail approximation of `1 - F_β(s)`, valid as s → ∞.
pub fn tw_tail_upper(s: f64, beta: Beta) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::Domain(format!("upper tail needs s > 0, got {s}")));
    }
    let b = beta.value();
    Ok((1.0 / (16.0 * PI)).powf(b / 2.0) * s.powf(-0.75 * b) * (-(2.0 * b / 3.0) * s.powf(1.5)).exp())
}

/// Closed-form lower-tail approximation of `F_β(s)`, valid as s → -∞.
pub fn tw_tail_lower(s: f64, beta: Beta) -> Result<f64> {
    if !(s < 0.0) {
        return Err(Error::Domain(format!("lower tail needs s < 0, got {s}")));
    }
    Ok((-(beta.value() / 24.0) * s.abs().powi(3)).exp())
}

/// Tabulated Tracy–Widom distribution for one β.
#[derive(Debug, Clone)]
pub struct TracyWidomTable {
    beta: Beta,
    x_min: f64,
    step: f64,
    grid: Vec<f64>,
    q_values: Vec<f64>,
    cdf_values: Vec<f64>,
    /// 1 - F, kept separately so the upper tail keeps relative precision.
    sf_values: Vec<f64>,
    pdf_values: Vec<f64>,
    pdf_slopes: Vec<f64>,
}

impl TracyWidomTable {
    /// Assemble F_β, f_β and f_β' from a solved Hastings–McLeod table.
    pub fn from_solution(sol: &HastingsMcLeod, beta: Beta) -> TracyWidomTable {
        let n = sol.grid.len();
        let mut cdf = Vec::with_capacity(n);
        let mut sf = Vec::with_capacity(n);
        let mut pdf = Vec::with_capacity(n);
        let mut slope = Vec::with_capacity(n);
        for k in 0..n {
            let (q, qp, iq, iq2, ilin) =
                (sol.q[k], sol.q_prime[k], sol.int_q[k], sol.int_q2[k], sol.int_lin_q2[k]);
            // log F and its first two derivatives.
            let (log_f, d1, d2) = match beta {
                Beta::Complex => (-ilin, iq2, -q * q),
                Beta::Real => (-0.5 * (iq + ilin), 0.5 * (q + iq2), 0.5 * (qp - q * q)),
            };
            let f = log_f.exp();
            cdf.push(f);
            sf.push(-log_f.exp_m1());
            pdf.push(f * d1);
            slope.push(f * (d1 * d1 + d2));
        }
        let step = if n > 1 { sol.grid[1] - sol.grid[0] } else { DEFAULT_STEP };
        TracyWidomTable {
            beta,
            x_min: sol.grid[0],
            step,
            grid: sol.grid.clone(),
            q_values: sol.q.clone(),
            cdf_values: cdf,
            sf_values: sf,
            pdf_values: pdf,
            pdf_slopes: slope,
        }
    }

    /// Solve and tabulate on the default grid.
    pub fn build(beta: Beta) -> Result<TracyWidomTable> {
        let sol = solve_hastings_mcleod(DEFAULT_X_MIN, DEFAULT_X_MAX, DEFAULT_STEP, DEFAULT_TOLERANCE)?;
        Ok(TracyWidomTable::from_solution(&sol, beta))
    }

    pub fn beta(&self) -> Beta {
        self.beta
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn q_values(&self) -> &[f64] {
        &self.q_values
    }

    pub fn cdf_values(&self) -> &[f64] {
        &self.cdf_values
    }

    pub fn pdf_values(&self) -> &[f64] {
        &self.pdf_values
    }

    fn x_max(&self) -> f64 {
        self.grid[self.grid.len() - 1]
    }

    /// Locate `s` in the grid: interval index and local coordinate in [0, 1].
    fn locate(&self, s: f64) -> (usize, f64) {
        let last = self.grid.len() - 2;
        let pos = (s - self.x_min) / self.step;
        let k = (pos.floor() as usize).min(last);
        (k, pos - k as f64)
    }

    fn hermite(values: &[f64], slopes: &[f64], k: usize, u: f64, h: f64) -> f64 {
        let (u2, u3) = (u * u, u * u * u);
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        h00 * values[k] + h10 * h * slopes[k] + h01 * values[k + 1] + h11 * h * slopes[k + 1]
    }

    /// F_β(s).
    pub fn cdf(&self, s: f64) -> f64 {
        if s.is_nan() {
            return f64::NAN;
        }
        if s < self.x_min {
            return tw_tail_lower(s, self.beta).unwrap_or(0.0);
        }
        if s > self.x_max() {
            return 1.0 - tw_tail_upper(s, self.beta).unwrap_or(0.0);
        }
        let (k, u) = self.locate(s);
        Self::hermite(&self.cdf_values, &self.pdf_values, k, u, self.step).clamp(0.0, 1.0)
    }

    /// 1 - F_β(s), accurate in the upper tail.
    pub fn sf(&self, s: f64) -> f64 {
        if s.is_nan() {
            return f64::NAN;
        }
        if s < self.x_min {
            return 1.0 - tw_tail_lower(s, self.beta).unwrap_or(0.0);
        }
        if s > self.x_max() {
            return tw_tail_upper(s, self.beta).unwrap_or(0.0);
        }
        let (k, u) = self.locate(s);
        let h = self.step;
        let (u2, u3) = (u * u, u * u * u);
        let v = (2.0 * u3 - 3.0 * u2 + 1.0) * self.sf_values[k] - (u3 - 2.0 * u2 + u) * h * self.pdf_values[k]
            + (-2.0 * u3 + 3.0 * u2) * self.sf_values[k + 1]
            - (u3 - u2) * h * self.pdf_values[k + 1];
        v.clamp(0.0, 1.0)
    }

    /// f_β(s) = F_β'(s).
    pub fn pdf(&self, s: f64) -> f64 {
        if s.is_nan() {
            return f64::NAN;
        }
        let b = self.beta.value();
        if s < self.x_min {
            let f = tw_tail_lower(s, self.beta).unwrap_or(0.0);
            return f * b / 8.0 * s * s;
        }
        if s > self.x_max() {
            let t = tw_tail_upper(s, self.beta).unwrap_or(0.0);
            return t * (0.75 * b / s + b * s.sqrt());
        }
        let (k, u) = self.locate(s);
        Self::hermite(&self.pdf_values, &self.pdf_slopes, k, u, self.step).max(0.0)
    }

    /// F_β^{-1}(p) by bisection on the interpolated distribution.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("Tracy-Widom quantile needs 0 < p < 1, got {p}")));
        }
        let upper = p > 0.5;
        let target = if upper { 1.0 - p } else { p };
        // Monotone increasing in s in both cases.
        let g = |s: f64| if upper { target - self.sf(s) } else { self.cdf(s) - target };
        let (mut lo, mut hi) = (-12.0, 10.0);
        while g(lo) > 0.0 {
            lo *= 2.0;
            if lo < -1e6 {
                break;
            }
        }
        while g(hi) < 0.0 {
            hi *= 2.0;
            if hi > 1e6 {
                break;
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-12 {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// The s with 1 − F_β(s) = `alpha`, without forming 1 − alpha.
    pub fn upper_quantile(&self, alpha: f64) -> Result<f64> {
        if alpha >= 0.5 {
            return self.quantile(1.0 - alpha);
        }
        if !(alpha > 0.0) {
            return Err(Error::Domain(format!("upper-tail probability must be in (0, 1), got {alpha}")));
        }
        let (mut lo, mut hi) = (-2.0, 10.0);
        while self.sf(hi) > alpha {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.sf(mid) > alpha {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-12 * hi.abs().max(1.0) {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

static TABLES: OnceLock<(TracyWidomTable, TracyWidomTable)> = OnceLock::new();

/// Shared, lazily built table for `beta`.
pub fn table(beta: Beta) -> &'static TracyWidomTable {
    let (real, complex) = TABLES.get_or_init(|| {
        let sol = solve_hastings_mcleod(DEFAULT_X_MIN, DEFAULT_X_MAX, DEFAULT_STEP, DEFAULT_TOLERANCE)
            .expect("default Hastings-McLeod integration");
        (
            TracyWidomTable::from_solution(&sol, Beta::Real),
            TracyWidomTable::from_solution(&sol, Beta::Complex),
        )
    });
    match beta {
        Beta::Real => real,
        Beta::Complex => complex,
    }
}

pub fn tw_cdf(beta: Beta, s: f64) -> f64 {
    table(beta).cdf(s)
}

pub fn tw_sf(beta: Beta, s: f64) -> f64 {
    table(beta).sf(s)
}

pub fn tw_pdf(beta: Beta, s: f64) -> f64 {
    table(beta).pdf(s)
}

pub fn tw_quantile(beta: Beta, p: f64) -> Result<f64> {
    table(beta).quantile(p)
}

pub fn tw_upper_quantile(beta: Beta, alpha: f64) -> Result<f64> {
    table(beta).upper_quantile(alpha)
}
