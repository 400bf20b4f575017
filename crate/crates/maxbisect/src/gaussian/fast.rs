//! Fast, non-rigorous `f64` evaluation of the normal-distribution
//! quantities. These back the numerical optimizer and the Monte Carlo
//! oracle; certified numbers come only from the enclosure API.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

const FRAC_1_SQRT_2PI: f64 = 0.3989422804014327;
const INV_2PI: f64 = 1.0 / (2.0 * PI);

/// Standard normal density.
#[inline]
pub fn pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal CDF via the complementary error function.
#[inline]
pub fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Inverse standard normal CDF: Acklam's rational approximation polished
/// with one Halley step against `cdf`, accurate to full double precision
/// away from p ∈ {0, 1}.
pub fn inv_cdf(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };

    // One Halley step: u = (Φ(x) - p)/φ(x), x ← x - u/(1 + x·u/2).
    let e = cdf(x) - p;
    let u = e / pdf(x);
    x - u / (1.0 + 0.5 * x * u)
}

/// Integrand of the correlation-form bivariate CDF integral after the
/// substitution r = sin θ: exp(-(t1² + t2² - 2 t1 t2 sinθ) / (2cos²θ)) / 2π.
#[inline]
fn plackett_integrand(theta: f64, t1: f64, t2: f64) -> f64 {
    let s = theta.sin();
    let c2 = (1.0 - s) * (1.0 + s);
    let a = t1 - t2 * s;
    let n = a * a + t2 * t2 * c2;
    if c2 <= 0.0 {
        return 0.0;
    }
    INV_2PI * (-n / (2.0 * c2)).exp()
}

fn adaptive_simpson(t1: f64, t2: f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = plackett_integrand(lm, t1, t2);
    let frm = plackett_integrand(rm, t1, t2);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        adaptive_simpson(t1, t2, a, m, fa, flm, fm, 0.5 * tol, depth - 1)
            + adaptive_simpson(t1, t2, m, b, fm, frm, fb, 0.5 * tol, depth - 1)
    }
}

/// Bivariate standard normal CDF Pr[X ≤ Φ⁻¹(q1) ∧ Y ≤ Φ⁻¹(q2)] at
/// correlation `rho`, via the single integral over the correlation
/// parameter (dΓ/dρ equals the bivariate density at the thresholds).
pub fn gamma(rho: f64, q1: f64, q2: f64) -> f64 {
    if q1 <= 0.0 || q2 <= 0.0 {
        return 0.0;
    }
    if q1 >= 1.0 {
        return q2;
    }
    if q2 >= 1.0 {
        return q1;
    }
    if rho >= 1.0 {
        return q1.min(q2);
    }
    if rho <= -1.0 {
        return (q1 + q2 - 1.0).max(0.0);
    }
    let t1 = inv_cdf(q1);
    let t2 = inv_cdf(q2);
    let theta = rho.asin();
    let (a, b, sign) = if theta >= 0.0 {
        (0.0, theta, 1.0)
    } else {
        (theta, 0.0, -1.0)
    };
    let fa = plackett_integrand(a, t1, t2);
    let fb = plackett_integrand(b, t1, t2);
    let fm = plackett_integrand(0.5 * (a + b), t1, t2);
    let integral = adaptive_simpson(t1, t2, a, b, fa, fm, fb, 1e-14, 48);
    (q1 * q2 + sign * integral).clamp((q1 + q2 - 1.0).max(0.0), q1.min(q2))
}

/// Same-side probability Λ_ρ̃(r1, r2) = 2Γ_ρ̃((1-r1)/2, (1-r2)/2) + (r1+r2)/2.
pub fn lambda(rho: f64, r1: f64, r2: f64) -> f64 {
    let v = 2.0 * gamma(rho, 0.5 * (1.0 - r1), 0.5 * (1.0 - r2)) + 0.5 * (r1 + r2);
    v.clamp(0.0, 1.0)
}

/// The interior-stationary-bias map g(x) = 1 - 2Φ(Φ⁻¹((1-x)/2) / ρ̃),
/// defined for ρ̃ ∈ (0, 1].
pub fn g_threshold(rho: f64, x: f64) -> f64 {
    debug_assert!(rho > 0.0);
    if rho >= 1.0 {
        return x;
    }
    let t = inv_cdf(0.5 * (1.0 - x));
    (1.0 - 2.0 * cdf(t / rho)).clamp(-1.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_basics() {
        assert!((cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((cdf(1.96) - 0.975_002_104_851_780_1).abs() < 1e-12);
        assert!((pdf(0.0) - FRAC_1_SQRT_2PI).abs() < 1e-16);
    }

    #[test]
    fn inv_cdf_round_trip() {
        for &p in &[1e-12, 1e-6, 0.01, 0.3, 0.5, 0.7, 0.99, 1.0 - 1e-9] {
            let x = inv_cdf(p);
            assert!((cdf(x) - p).abs() < 1e-14 * p.max(1e-3), "p = {p}");
        }
        assert_eq!(inv_cdf(0.0), f64::NEG_INFINITY);
        assert_eq!(inv_cdf(1.0), f64::INFINITY);
    }

    #[test]
    fn gamma_independence_and_degenerate() {
        assert!((gamma(0.0, 0.5, 0.5) - 0.25).abs() < 1e-14);
        assert!((gamma(0.0, 0.3, 0.8) - 0.24).abs() < 1e-13);
        assert!((gamma(1.0, 0.3, 0.3) - 0.3).abs() < 1e-15);
        assert!((gamma(-1.0, 0.5, 0.5) - 0.0).abs() < 1e-15);
        assert!((gamma(-1.0, 0.7, 0.8) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn gamma_quadrant_closed_form() {
        // At q1 = q2 = 1/2 the thresholds vanish and
        // Γ = 1/4 + arcsin(ρ)/(2π) exactly.
        for &rho in &[-0.99f64, -0.5, -0.1, 0.0, 0.3, 0.5, 0.9, 0.999] {
            let expect = 0.25 + rho.asin() / (2.0 * PI);
            assert!(
                (gamma(rho, 0.5, 0.5) - expect).abs() < 1e-13,
                "rho = {rho}"
            );
        }
        assert!((gamma(0.5, 0.5, 0.5) - 1.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn lambda_closed_forms_at_degenerate_correlation() {
        let l = lambda(1.0, 0.4, -0.2);
        assert!((l - 0.7).abs() < 1e-14);
        let l = lambda(-1.0, 0.4, -0.2);
        assert!((l - 0.1).abs() < 1e-14);
        assert!((lambda(0.0, 0.0, 0.0) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn g_identity_at_full_correlation() {
        assert_eq!(g_threshold(1.0, 0.37), 0.37);
        assert!(g_threshold(0.7, 0.0).abs() < 1e-15);
        // Defining relation: Φ⁻¹((1-g)/2) = Φ⁻¹((1-x)/2)/ρ.
        let (rho, x) = (0.5, 0.6);
        let v = g_threshold(rho, x);
        let lhs = inv_cdf(0.5 * (1.0 - v));
        let rhs = inv_cdf(0.5 * (1.0 - x)) / rho;
        assert!((lhs - rhs).abs() < 1e-10);
    }
}
