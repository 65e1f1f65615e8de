//! Embedded Dormand–Prince 5(4) Runge–Kutta integration.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

/// One trial step; returns the 5th-order solution and the scaled error norm.
fn trial_step<const D: usize, F>(f: &F, x: f64, y: &[f64; D], h: f64, tol: Tolerance) -> ([f64; D], f64)
where
    F: Fn(f64, &[f64; D]) -> [f64; D],
{
    let mut k = [[0.0; D]; 7];
    k[0] = f(x, y);
    for s in 1..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = A[s][j];
            if a != 0.0 {
                for d in 0..D {
                    ys[d] += h * a * kj[d];
                }
            }
        }
        k[s] = f(x + C[s] * h, &ys);
    }
    let mut y5 = *y;
    let mut err = 0.0f64;
    for d in 0..D {
        let mut hi = 0.0;
        let mut diff = 0.0;
        for s in 0..7 {
            hi += B5[s] * k[s][d];
            diff += (B5[s] - B4[s]) * k[s][d];
        }
        y5[d] += h * hi;
        let scale = tol.atol + tol.rtol * y[d].abs().max(y5[d].abs());
        err = err.max((h * diff).abs() / scale);
    }
    (y5, err)
}

/// Adaptive integrator that can be advanced to successive target abscissae.
///
/// Each call to [`Integrator::advance_to`] lands exactly on the target, so a
/// caller stepping through a grid gets the solution at every node.
pub struct Integrator<const D: usize, F> {
    f: F,
    tol: Tolerance,
    pub x: f64,
    pub y: [f64; D],
    h: f64,
    max_steps: usize,
    steps: usize,
}

impl<const D: usize, F> Integrator<D, F>
where
    F: Fn(f64, &[f64; D]) -> [f64; D],
{
    pub fn new(f: F, x0: f64, y0: [f64; D], h0: f64, tol: Tolerance) -> Self {
        Integrator { f, tol, x: x0, y: y0, h: h0.abs(), max_steps: 10_000_000, steps: 0 }
    }

    pub fn advance_to(&mut self, target: f64) -> Result<()> {
        let dir = if target >= self.x { 1.0 } else { -1.0 };
        while (target - self.x) * dir > 0.0 {
            let remaining = (target - self.x).abs();
            let last = self.h >= remaining;
            let h = if last { remaining } else { self.h };
            let (y_new, err) = trial_step(&self.f, self.x, &self.y, dir * h, self.tol);
            self.steps += 1;
            if self.steps > self.max_steps {
                return Err(Error::Integration { x: self.x, reason: "step budget exhausted".into() });
            }
            if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
                self.h *= 0.25;
                if self.h < 1e-14 {
                    return Err(Error::Integration { x: self.x, reason: "non-finite state".into() });
                }
                continue;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                self.x = if last { target } else { self.x + dir * h };
                self.y = y_new;
                // A short landing step says nothing about the usable step size.
                if !last || factor < 1.0 {
                    self.h = h * factor;
                }
            } else {
                self.h = h * factor;
                if self.h < 1e-14 {
                    return Err(Error::Integration { x: self.x, reason: "step size underflow".into() });
                }
            }
        }
        Ok(())
    }
}
