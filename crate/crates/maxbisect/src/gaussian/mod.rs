//! Certified evaluation of standard-normal quantities: the density φ, the
//! CDF Φ and its inverse, the bivariate CDF Γ_ρ̃, its reparametrization
//! Λ_ρ̃, and the worst-bias helper g.
//!
//! All certified results are [`Enclosure`]s: intervals guaranteed to
//! contain the exact real value. Elementary functions come from `libm`
//! (musl's correctly-rounded-to-≈1ulp implementations) and are inflated by
//! a generous multiple of their documented error bounds before entering
//! any interval computation. Non-rigorous `f64` twins live in [`fast`].

pub mod fast;
mod gamma;
mod taylor;

use crate::interval::{Interval, Monotonicity};
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GaussianError {
    /// Argument outside the mathematical domain of the function.
    #[error("domain error: {0}")]
    DomainError(&'static str),
}

/// Default width target for enclosures of point inputs. Near-tail
/// arguments of Φ⁻¹ and near-singular ρ̃ give wider results; see the
/// individual functions.
pub const DEFAULT_TOL: f64 = 1e-12;

/// A certified enclosure of an exact real quantity.
///
/// Invariant: the exact value lies in `value`. For point inputs the width
/// is at most the configured tolerance except where the quantity's
/// conditioning forbids it (Φ⁻¹ in the far tails, Γ with ρ̃ within ~1e-9
/// of ±1), where the width degrades gracefully but containment holds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Enclosure(pub Interval);

impl Enclosure {
    #[inline]
    pub fn value(&self) -> Interval {
        self.0
    }

    #[inline]
    pub fn lo(&self) -> f64 {
        self.0.lo()
    }

    #[inline]
    pub fn hi(&self) -> f64 {
        self.0.hi()
    }

    #[inline]
    pub fn mid(&self) -> f64 {
        self.0.mid()
    }

    #[inline]
    pub fn width(&self) -> f64 {
        self.0.width()
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        self.0.contains(x)
    }
}

impl From<Enclosure> for Interval {
    fn from(e: Enclosure) -> Interval {
        e.0
    }
}

// Inflation factors applied to libm results. musl documents ≈1 ulp
// (2.2e-16 relative) for exp/sin/cos/asin and a few ulp for erfc; the
// factors below leave two orders of magnitude of margin.
const EXP_REL: f64 = 1e-14;
const ERFC_REL: f64 = 1e-14;
const TRIG_REL: f64 = 1e-14;
const ASIN_REL: f64 = 1e-14;
const TINY: f64 = 1e-300;

/// Certified enclosure of 1/(2π).
#[inline]
pub(crate) fn inv_2pi() -> Interval {
    Interval::ONE
        .div(&Interval::with_ulp_slack(std::f64::consts::TAU))
        .expect("2π != 0")
}

#[inline]
pub(crate) fn exp_point(v: f64) -> Interval {
    if v == f64::NEG_INFINITY {
        return Interval::ZERO;
    }
    let e = libm::exp(v);
    if e == 0.0 {
        return Interval::new(0.0, TINY);
    }
    if e.is_infinite() {
        return Interval::new(f64::MAX, f64::INFINITY);
    }
    Interval::point(e).inflate(EXP_REL, 0.0).max(&Interval::ZERO)
}

/// Monotone interval extension of exp.
#[inline]
pub(crate) fn exp_iv(x: &Interval) -> Interval {
    Interval::new(exp_point(x.lo()).lo(), exp_point(x.hi()).hi())
}

#[inline]
fn erfc_point(v: f64) -> Interval {
    let e = libm::erfc(v);
    Interval::point(e)
        .inflate(ERFC_REL, TINY)
        .clamp_to(&Interval::new(0.0, 2.0))
}

#[inline]
pub(crate) fn sin_point(x: f64) -> Interval {
    Interval::point(libm::sin(x))
        .inflate(TRIG_REL, 1e-18)
        .clamp_to(&Interval::SYM_UNIT)
}

#[inline]
pub(crate) fn cos_point(x: f64) -> Interval {
    Interval::point(libm::cos(x))
        .inflate(TRIG_REL, 1e-18)
        .clamp_to(&Interval::SYM_UNIT)
}

/// Interval sine for arguments within [-π - ε, π + ε]: the only interior
/// extrema are at ±π/2, so the range is the endpoint hull widened to ±1
/// when the interval covers an extremum.
pub(crate) fn sin_iv(x: &Interval) -> Interval {
    debug_assert!(x.lo() >= -3.2 && x.hi() <= 3.2);
    let at_lo = sin_point(x.lo());
    let at_hi = sin_point(x.hi());
    let mut lo = at_lo.lo().min(at_hi.lo());
    let mut hi = at_lo.hi().max(at_hi.hi());
    if x.contains(FRAC_PI_2) || x.hi() >= FRAC_PI_2 && x.lo() <= FRAC_PI_2 {
        hi = 1.0;
    }
    if x.contains(-FRAC_PI_2) {
        lo = -1.0;
    }
    // One-ulp guards for an endpoint sitting exactly at the extremum's
    // rounded representation.
    if x.hi() >= FRAC_PI_2 && x.hi() <= FRAC_PI_2 + 1e-15 {
        hi = 1.0;
    }
    if x.lo() <= -FRAC_PI_2 && x.lo() >= -FRAC_PI_2 - 1e-15 {
        lo = -1.0;
    }
    Interval::new(lo.min(hi), hi.max(lo)).clamp_to(&Interval::SYM_UNIT)
}

/// Interval cosine for arguments within [-π - ε, π + ε]: even, with a
/// maximum at 0 and minima at ±π.
pub(crate) fn cos_iv(x: &Interval) -> Interval {
    debug_assert!(x.lo() >= -3.2 && x.hi() <= 3.2);
    let at_lo = cos_point(x.lo());
    let at_hi = cos_point(x.hi());
    let mut lo = at_lo.lo().min(at_hi.lo());
    let mut hi = at_lo.hi().max(at_hi.hi());
    if x.contains(0.0) {
        hi = 1.0;
    }
    if x.hi() >= std::f64::consts::PI || x.lo() <= -std::f64::consts::PI {
        lo = -1.0;
    }
    Interval::new(lo.min(hi), hi.max(lo)).clamp_to(&Interval::SYM_UNIT)
}

#[inline]
pub(crate) fn asin_point(v: f64) -> Interval {
    Interval::point(libm::asin(v)).inflate(ASIN_REL, 1e-18)
}

/// φ(x), monotone decreasing in |x|.
pub fn std_normal_pdf(x: impl Into<Interval>) -> Enclosure {
    let x = x.into();
    let half_sq = x.square().scale(0.5).neg();
    let e = exp_iv(&half_sq);
    let inv_sqrt_2pi = Interval::ONE
        .div(&Interval::with_ulp_slack(std::f64::consts::TAU))
        .expect("2π != 0")
        .sqrt()
        .expect("positive");
    Enclosure(e.mul(&inv_sqrt_2pi).max(&Interval::ZERO))
}

/// Φ(x) via the complementary error function: Φ(x) = erfc(-x/√2)/2.
pub fn std_normal_cdf(x: impl Into<Interval>) -> Enclosure {
    let x = x.into();
    Enclosure(cdf_iv(&x))
}

pub(crate) fn cdf_iv(x: &Interval) -> Interval {
    Interval::new(cdf_point(x.lo()).lo(), cdf_point(x.hi()).hi())
        .clamp_to(&Interval::UNIT)
}

pub(crate) fn cdf_point(x: f64) -> Interval {
    if x == f64::NEG_INFINITY {
        return Interval::ZERO;
    }
    if x == f64::INFINITY {
        return Interval::ONE;
    }
    // -x/√2 as an interval, then the decreasing erfc on its endpoints.
    let arg = Interval::point(x)
        .neg()
        .mul(&Interval::with_ulp_slack(FRAC_1_SQRT_2));
    let e = arg.lift_monotone(erfc_point, Monotonicity::Decreasing);
    e.scale(0.5).clamp_to(&Interval::UNIT)
}

/// Φ⁻¹(p). Returns the ∓∞ half-line markers at p ∈ {0, 1}.
pub fn std_normal_cdf_inv(p: impl Into<Interval>) -> Result<Enclosure, GaussianError> {
    let p = p.into();
    if p.lo() < 0.0 || p.hi() > 1.0 {
        return Err(GaussianError::DomainError("cdf_inv requires p in [0,1]"));
    }
    if p.is_point() {
        return Ok(Enclosure(cdf_inv_point(p.lo())));
    }
    let lo = cdf_inv_point(p.lo()).lo();
    let hi = cdf_inv_point(p.hi()).hi();
    Ok(Enclosure(Interval::new(lo, hi)))
}

/// Certified Φ⁻¹ at a point: seed with the fast rational approximation,
/// then expand a bracket until both sides certify through the interval Φ.
pub(crate) fn cdf_inv_point(p: f64) -> Interval {
    debug_assert!((0.0..=1.0).contains(&p));
    if p == 0.0 {
        return Interval::point(f64::NEG_INFINITY);
    }
    if p == 1.0 {
        return Interval::point(f64::INFINITY);
    }
    let x0 = fast::inv_cdf(p);
    let mut k = (x0.abs() * 1e-15).max(1e-15);
    for _ in 0..60 {
        let lo = x0 - k;
        let hi = x0 + k;
        let ok_lo = cdf_point(lo).hi() <= p;
        let ok_hi = cdf_point(hi).lo() >= p;
        if ok_lo && ok_hi {
            return Interval::new(lo, hi);
        }
        k *= 8.0;
    }
    // Certification by expansion failed (conceivable only in the extreme
    // tails); fall back to a sound bisection bracket.
    let mut lo = -42.0;
    let mut hi = 42.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let c = cdf_point(mid);
        if c.hi() <= p {
            lo = mid;
        } else if c.lo() >= p {
            hi = mid;
        } else {
            break;
        }
    }
    Interval::new(lo, hi)
}

/// Γ_ρ̃(q1, q2) = Pr[X ≤ Φ⁻¹(q1) ∧ Y ≤ Φ⁻¹(q2)] for N(0,1) marginals with
/// correlation ρ̃. Interval arguments use coordinatewise monotonicity
/// (nondecreasing in q1, q2 and, by Slepian, in ρ̃).
pub fn bivariate_cdf(
    rho_t: impl Into<Interval>,
    q1: impl Into<Interval>,
    q2: impl Into<Interval>,
) -> Result<Enclosure, GaussianError> {
    bivariate_cdf_tol(rho_t, q1, q2, DEFAULT_TOL)
}

/// [`bivariate_cdf`] with an explicit quadrature tolerance.
pub fn bivariate_cdf_tol(
    rho_t: impl Into<Interval>,
    q1: impl Into<Interval>,
    q2: impl Into<Interval>,
    tol: f64,
) -> Result<Enclosure, GaussianError> {
    let rho = rho_t.into();
    let q1 = q1.into();
    let q2 = q2.into();
    if rho.lo() < -1.0 || rho.hi() > 1.0 {
        return Err(GaussianError::DomainError("rho_t outside [-1,1]"));
    }
    if q1.lo() < 0.0 || q1.hi() > 1.0 || q2.lo() < 0.0 || q2.hi() > 1.0 {
        return Err(GaussianError::DomainError("q outside [0,1]"));
    }
    Ok(Enclosure(gamma::gamma_corners(rho, q1, q2, tol)))
}

/// Λ_ρ̃(r1, r2): the probability that two thresholded projections agree.
pub fn lambda_fn(
    rho_t: impl Into<Interval>,
    r1: impl Into<Interval>,
    r2: impl Into<Interval>,
) -> Result<Enclosure, GaussianError> {
    lambda_fn_tol(rho_t, r1, r2, DEFAULT_TOL)
}

/// [`lambda_fn`] with an explicit quadrature tolerance.
pub fn lambda_fn_tol(
    rho_t: impl Into<Interval>,
    r1: impl Into<Interval>,
    r2: impl Into<Interval>,
    tol: f64,
) -> Result<Enclosure, GaussianError> {
    let rho = rho_t.into();
    let r1 = r1.into();
    let r2 = r2.into();
    if rho.lo() < -1.0 || rho.hi() > 1.0 {
        return Err(GaussianError::DomainError("rho_t outside [-1,1]"));
    }
    if r1.lo() < -1.0 || r1.hi() > 1.0 || r2.lo() < -1.0 || r2.hi() > 1.0 {
        return Err(GaussianError::DomainError("r outside [-1,1]"));
    }
    Ok(Enclosure(gamma::lambda_iv(rho, r1, r2, tol)))
}

#[allow(unused_imports)]
pub(crate) use gamma::{gamma_corners, lambda_hi, lambda_iv};

/// g(x) = 1 - 2Φ(Φ⁻¹((1-x)/2) / ρ̃) for ρ̃ ∈ (0, 1], clamped to [-1, 1].
/// At ρ̃ = 1 this is the identity.
pub fn g_threshold(rho_t: f64, x: f64) -> Result<Enclosure, GaussianError> {
    if rho_t <= 0.0 || rho_t > 1.0 {
        return Err(GaussianError::DomainError("g requires rho_t in (0,1]"));
    }
    if !(-1.0..=1.0).contains(&x) {
        return Err(GaussianError::DomainError("g requires x in [-1,1]"));
    }
    if rho_t == 1.0 {
        return Ok(Enclosure(Interval::point(x)));
    }
    let q = Interval::ONE
        .sub(&Interval::point(x))
        .scale(0.5)
        .clamp_to(&Interval::UNIT);
    let t = std_normal_cdf_inv(q)?.value();
    let y = t
        .div(&Interval::point(rho_t))
        .expect("rho_t is strictly positive");
    let phi = cdf_iv(&y);
    let g = Interval::ONE.sub(&phi.scale(2.0));
    Ok(Enclosure(g.clamp_to(&Interval::SYM_UNIT)))
}
