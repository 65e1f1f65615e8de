//! Scalar special functions: the Airy function Ai and the standard normal
//! distribution.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};

use crate::error::{Error, Result};

/// Ai(0) = 3^{-2/3} / Γ(2/3).
const AI0: f64 = 0.355_028_053_887_817_24;
/// -Ai'(0) = 3^{-1/3} / Γ(1/3).
const AIP0: f64 = 0.258_819_403_792_806_8;

/// Below this the oscillatory expansion is used.
const NEG_SWITCH: f64 = -7.0;
/// Above this the exponentially decaying expansion is used.
const POS_SWITCH: f64 = 5.5;

const SERIES_TOL: f64 = 1e-17;

/// Maclaurin series pieces `(f, g, f', g')` with Ai = c1 f - c2 g.
fn maclaurin(x: f64) -> (f64, f64, f64, f64) {
    let x3 = x * x * x;
    let (mut f, mut g, mut df, mut dg) = (1.0, x, 0.0, 1.0);
    let (mut tf, mut tg) = (1.0, x);
    let (mut tdf, mut tdg) = (0.5 * x * x, 1.0);
    df += tdf;
    for k in 1..200 {
        let kf = k as f64;
        tf *= x3 / ((3.0 * kf - 1.0) * (3.0 * kf));
        tg *= x3 / ((3.0 * kf) * (3.0 * kf + 1.0));
        tdg *= x3 / ((3.0 * kf) * (3.0 * kf - 2.0));
        f += tf;
        g += tg;
        dg += tdg;
        if k >= 2 {
            tdf *= x3 / ((3.0 * kf - 3.0) * (3.0 * kf - 1.0));
            df += tdf;
        }
        let scale = f.abs() + g.abs() + df.abs() + dg.abs();
        if tf.abs() + tg.abs() + tdf.abs() + tdg.abs() <= SERIES_TOL * scale {
            break;
        }
    }
    (f, g, df, dg)
}

/// Coefficients u_k, v_k of the large-argument expansions, truncated before
/// the terms start growing for the given ζ.
fn asymptotic_coefficients(zeta: f64) -> (Vec<f64>, Vec<f64>) {
    let mut u = vec![1.0];
    let mut v = vec![1.0];
    let mut last = 1.0;
    for k in 1..60 {
        let kf = k as f64;
        let uk = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / ((2.0 * kf - 1.0) * 216.0 * kf);
        let term = uk / zeta.powi(k as i32);
        if term > last {
            break;
        }
        last = term;
        u.push(uk);
        v.push(-(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * uk);
    }
    (u, v)
}

/// Ai(x) and Ai'(x) for large positive x.
fn airy_positive_asymptotic(x: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let (u, v) = asymptotic_coefficients(zeta);
    let (mut su, mut sv) = (0.0, 0.0);
    let mut p = 1.0;
    for k in 0..u.len() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        su += sign * u[k] * p;
        sv += sign * v[k] * p;
        p /= zeta;
    }
    let e = (-zeta).exp() / (2.0 * PI.sqrt());
    let q = x.powf(0.25);
    (e / q * su, -e * q * sv)
}

/// Ai(x) and Ai'(x) for large negative x.
fn airy_negative_asymptotic(x: f64) -> (f64, f64) {
    let z = -x;
    let zeta = 2.0 / 3.0 * z.powf(1.5);
    let (u, v) = asymptotic_coefficients(zeta);
    let (mut ue, mut uo, mut ve, mut vo) = (0.0, 0.0, 0.0, 0.0);
    let mut p = 1.0;
    for k in 0..u.len() {
        let j = k / 2;
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            ue += sign * u[k] * p;
            ve += sign * v[k] * p;
        } else {
            uo += sign * u[k] * p;
            vo += sign * v[k] * p;
        }
        p /= zeta;
    }
    let (s, c) = (zeta - FRAC_PI_4).sin_cos();
    let q = z.powf(0.25);
    let ai = (c * ue + s * uo) / (PI.sqrt() * q);
    let aip = q / PI.sqrt() * (s * ve - c * vo);
    (ai, aip)
}

/// Airy function Ai(x) together with its derivative.
pub fn airy_ai_with_derivative(x: f64) -> (f64, f64) {
    if x > POS_SWITCH {
        airy_positive_asymptotic(x)
    } else if x < NEG_SWITCH {
        airy_negative_asymptotic(x)
    } else {
        let (f, g, df, dg) = maclaurin(x);
        (AI0 * f - AIP0 * g, AI0 * df - AIP0 * dg)
    }
}

/// Airy function of the first kind.
pub fn airy_ai(x: f64) -> f64 {
    airy_ai_with_derivative(x).0
}

/// Derivative of the Airy function of the first kind.
pub fn airy_ai_prime(x: f64) -> f64 {
    airy_ai_with_derivative(x).1
}

/// Standard normal distribution function Φ.
pub fn std_normal_cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal density φ.
pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard normal quantile Φ^{-1}(p) for p in (0, 1).
///
/// Starts from a rational tail approximation and polishes with Halley steps
/// against [`std_normal_cdf`].
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!(
            "normal quantile needs 0 < p < 1, got {p}"
        )));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    // Work in the lower half and reflect.
    let (q, sign) = if p < 0.5 { (p, -1.0) } else { (1.0 - p, 1.0) };
    let t = (-2.0 * q.ln()).sqrt();
    let mut x = t
        - (2.515_517 + 0.802_853 * t + 0.010_328 * t * t)
            / (1.0 + 1.432_788 * t + 0.189_269 * t * t + 0.001_308 * t * t * t);
    x = -x;
    for _ in 0..50 {
        let e = std_normal_cdf(x) - q;
        let u = e / std_normal_pdf(x);
        let step = u / (1.0 + 0.5 * x * u);
        x -= step;
        if step.abs() <= 1e-15 * (1.0 + x.abs()) {
            break;
        }
    }
    Ok(if sign < 0.0 { x } else { -x })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent Maclaurin route through the Gamma function.
    fn airy_gamma_series(x: f64) -> f64 {
        let c = 3f64.powf(1.0 / 3.0) * x;
        let mut sum = 0.0;
        let mut pow = 1.0;
        let mut fact = 1.0;
        for k in 0..60 {
            if k > 0 {
                pow *= c;
                fact *= k as f64;
            }
            let kk = (k + 1) as f64;
            let s = (2.0 * kk * PI / 3.0).sin();
            if s.abs() > 1e-12 {
                sum += libm::tgamma(kk / 3.0) / fact * pow * s;
            }
        }
        sum / (3f64.powf(2.0 / 3.0) * PI)
    }

    #[test]
    fn airy_at_zero_is_closed_form() {
        assert!((airy_ai(0.0) - 0.355_028_053_9).abs() < 1e-10);
        let closed = 3f64.powf(-2.0 / 3.0) / libm::tgamma(2.0 / 3.0);
        assert!((airy_ai(0.0) - closed).abs() < 1e-15);
    }

    #[test]
    fn airy_at_one_matches_gamma_series() {
        let oracle = airy_gamma_series(1.0);
        assert!((oracle - 0.135_292_416_3).abs() < 1e-10);
        assert!((airy_ai(1.0) - oracle).abs() < 1e-12);
    }

    #[test]
    fn airy_matches_gamma_series_on_moderate_range() {
        for i in 0..=40 {
            let x = -4.0 + 0.2 * i as f64;
            let d = (airy_ai(x) - airy_gamma_series(x)).abs();
            assert!(d < 1e-10, "x = {x}: diff {d}");
        }
    }

    #[test]
    fn airy_large_positive_tracks_leading_asymptote() {
        let x: f64 = 6.0;
        let lead = x.powf(-0.25) * (-2.0 / 3.0 * x.powf(1.5)).exp() / (2.0 * PI.sqrt());
        assert!(((airy_ai(x) - lead) / lead).abs() < 1e-2);
    }

    #[test]
    fn airy_branches_agree_at_switch_points() {
        for &x in &[NEG_SWITCH, POS_SWITCH] {
            let (f, g, df, dg) = maclaurin(x);
            let series = (AI0 * f - AIP0 * g, AI0 * df - AIP0 * dg);
            let asym = if x > 0.0 {
                airy_positive_asymptotic(x)
            } else {
                airy_negative_asymptotic(x)
            };
            assert!((series.0 - asym.0).abs() < 1e-10, "Ai at {x}");
            assert!((series.1 - asym.1).abs() < 1e-9, "Ai' at {x}");
        }
    }

    #[test]
    fn airy_satisfies_its_differential_equation() {
        let h = 1e-3;
        for i in 0..=120 {
            let x = -8.0 + 0.1 * i as f64;
            let second = (airy_ai(x + h) - 2.0 * airy_ai(x) + airy_ai(x - h)) / (h * h);
            let rhs = x * airy_ai(x);
            assert!(
                (second - rhs).abs() <= 1e-4 * rhs.abs() + 1e-6,
                "x = {x}: {second} vs {rhs}"
            );
        }
    }

    #[test]
    fn airy_derivative_matches_finite_differences() {
        let h = 1e-5;
        for i in 0..=36 {
            let x = -9.0 + 0.5 * i as f64;
            let fd = (airy_ai(x + h) - airy_ai(x - h)) / (2.0 * h);
            assert!((fd - airy_ai_prime(x)).abs() < 1e-7, "x = {x}");
        }
    }

    #[test]
    fn normal_cdf_reference_values() {
        assert_eq!(std_normal_cdf(0.0), 0.5);
        assert!((std_normal_cdf(1.0) - 0.841_344_746_1).abs() < 1e-10);
        assert_eq!(std_normal_cdf(f64::INFINITY), 1.0);
        assert_eq!(std_normal_cdf(f64::NEG_INFINITY), 0.0);
        for &x in &[0.3, 1.7, 4.2, 9.0] {
            assert!((std_normal_cdf(x) + std_normal_cdf(-x) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn normal_cdf_matches_series_oracle() {
        // erf(z) = 2/sqrt(pi) * sum (-1)^k z^{2k+1} / (k! (2k+1))
        for &x in &[-2.5, -1.0, 0.25, 1.0, 2.0] {
            let z: f64 = x / 2f64.sqrt();
            let mut term = z;
            let mut sum = z;
            for k in 1..80 {
                term *= -z * z / k as f64;
                sum += term / (2 * k + 1) as f64;
            }
            let oracle = 0.5 * (1.0 + 2.0 / PI.sqrt() * sum);
            assert!((std_normal_cdf(x) - oracle).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn normal_quantile_reference_values() {
        assert_eq!(std_normal_quantile(0.5).unwrap(), 0.0);
        assert!((std_normal_quantile(0.975).unwrap() - 1.959_964).abs() < 1e-6);
        for &p in &[1e-6, 0.01, 0.3] {
            let a = std_normal_quantile(p).unwrap();
            let b = std_normal_quantile(1.0 - p).unwrap();
            assert!((a + b).abs() < 1e-9);
        }
    }

    #[test]
    fn normal_quantile_rejects_out_of_range() {
        for &p in &[0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(std_normal_quantile(p), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn normal_quantile_inverts_cdf_on_log_grid() {
        for i in 0..=160 {
            let e = -8.0 + 0.05 * i as f64;
            let p = 10f64.powf(e).min(0.5);
            for &pp in &[p, 1.0 - p] {
                if pp <= 1e-8 || pp >= 1.0 - 1e-8 {
                    continue;
                }
                let x = std_normal_quantile(pp).unwrap();
                assert!((std_normal_cdf(x) - pp).abs() < 1e-9 * pp.max(1e-3), "p = {pp}");
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn normal_cdf_is_monotone(a in -40.0f64..40.0, b in -40.0f64..40.0) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            proptest::prop_assert!(std_normal_cdf(lo) <= std_normal_cdf(hi));
        }

        #[test]
        fn normal_quantile_roundtrip(p in 1e-8f64..(1.0 - 1e-8)) {
            let x = std_normal_quantile(p).unwrap();
            proptest::prop_assert!((std_normal_cdf(x) - p).abs() <= 1e-9);
        }
    }
}
