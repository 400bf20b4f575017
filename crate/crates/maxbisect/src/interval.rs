//! Sound interval arithmetic over `f64` with outward rounding.
//!
//! Every operation returns an interval that contains the exact real result
//! for all choices of points in the operand intervals (the inclusion
//! property). Instead of switching the FPU rounding mode, endpoints are
//! rounded outward only when an operation is detected to be inexact, using
//! error-free transformations: twoSum for `+`/`-` and an FMA residual for
//! `*`, `/` and `sqrt`. Exact operations therefore keep exact endpoints
//! (`[1,2] + [3,4]` is `[4,6]`, not a widened box around it).
//!
//! Endpoints are finite except for the `±∞` half-line markers produced by
//! the inverse normal CDF at p ∈ {0, 1}; consumers clamp through the CDF
//! range `[0,1]`.

use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IntervalError {
    /// Division by an interval containing zero.
    #[error("division by an interval containing zero")]
    DivisionByZeroInterval,
    /// Square root of an interval with a significantly negative lower end.
    #[error("square root of an interval with negative lower endpoint")]
    NegativeSqrt,
}

/// Absolute slack under which a negative `sqrt` lower endpoint is treated
/// as outward-rounding debris and clamped to zero.
pub const SQRT_CLAMP_SLACK: f64 = 1e-12;

/// A closed interval `[lo, hi]` with outward-rounded endpoints.
#[derive(Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

// Directed-rounding helpers. Each takes the rounded-to-nearest result plus
// the sign of the exact residual (exact - rounded) and nudges one ulp
// outward only when needed.
#[inline]
fn down(rounded: f64, residual_negative: bool) -> f64 {
    if rounded.is_nan() {
        return f64::NEG_INFINITY;
    }
    if residual_negative {
        rounded.next_down()
    } else {
        rounded
    }
}

#[inline]
fn up(rounded: f64, residual_positive: bool) -> f64 {
    if rounded.is_nan() {
        return f64::INFINITY;
    }
    if residual_positive {
        rounded.next_up()
    } else {
        rounded
    }
}

/// twoSum residual: `a + b = s + err` exactly, where `s = a + b` rounded.
#[inline]
fn sum_residual(a: f64, b: f64, s: f64) -> f64 {
    let bb = s - a;
    (a - (s - bb)) + (b - bb)
}

/// Lower bound of the exact `a + b`.
#[inline]
pub(crate) fn add_down(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        // -inf is already a sound lower bound; +inf overflow means the
        // exact sum exceeds MAX, so MAX bounds it from below.
        return if s == f64::INFINITY { f64::MAX } else { s };
    }
    down(s, sum_residual(a, b, s) < 0.0)
}

/// Upper bound of the exact `a + b`.
#[inline]
pub(crate) fn add_up(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        return if s == f64::NEG_INFINITY { f64::MIN } else { s };
    }
    up(s, sum_residual(a, b, s) > 0.0)
}

/// Product residual via FMA: `a * b = p + err` exactly.
#[inline]
fn prod_residual(a: f64, b: f64, p: f64) -> f64 {
    a.mul_add(b, -p)
}

#[inline]
pub(crate) fn mul_down(a: f64, b: f64) -> f64 {
    // 0 * ±inf arises only from half-line markers; the exact set product
    // of {0} with any set of reals is {0}.
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if !p.is_finite() {
        return if p == f64::INFINITY { f64::MAX } else { p };
    }
    down(p, prod_residual(a, b, p) < 0.0)
}

#[inline]
pub(crate) fn mul_up(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if !p.is_finite() {
        return if p == f64::NEG_INFINITY { f64::MIN } else { p };
    }
    up(p, prod_residual(a, b, p) > 0.0)
}

/// Sign of the exact `a/b - q` where `q = a/b` rounded; `q*b - a` is exact
/// under FMA, and dividing by `b` only flips its sign.
#[inline]
fn quot_residual_sign(a: f64, b: f64, q: f64) -> f64 {
    let r = q.mul_add(b, -a);
    if b > 0.0 {
        -r
    } else {
        r
    }
}

#[inline]
pub(crate) fn div_down(a: f64, b: f64) -> f64 {
    let q = a / b;
    if q.is_nan() {
        return f64::NEG_INFINITY;
    }
    if !q.is_finite() {
        return if q == f64::INFINITY { f64::MAX } else { q };
    }
    down(q, quot_residual_sign(a, b, q) < 0.0)
}

#[inline]
pub(crate) fn div_up(a: f64, b: f64) -> f64 {
    let q = a / b;
    if q.is_nan() {
        return f64::INFINITY;
    }
    if !q.is_finite() {
        return if q == f64::NEG_INFINITY { f64::MIN } else { q };
    }
    up(q, quot_residual_sign(a, b, q) > 0.0)
}

#[inline]
fn sqrt_down(a: f64) -> f64 {
    let s = a.sqrt();
    // s*s - a computed exactly via FMA; positive means s overshoots.
    down(s, s.mul_add(s, -a) > 0.0)
}

#[inline]
fn sqrt_up(a: f64) -> f64 {
    let s = a.sqrt();
    up(s, s.mul_add(s, -a) < 0.0)
}

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };
    /// `[-1, 1]`, the home of biases, correlations and configuration coords.
    pub const SYM_UNIT: Interval = Interval { lo: -1.0, hi: 1.0 };
    /// `[0, 1]`, the range of probabilities.
    pub const UNIT: Interval = Interval { lo: 0.0, hi: 1.0 };

    /// A new interval; panics if `lo > hi` or either endpoint is NaN.
    #[inline]
    pub fn new(lo: f64, hi: f64) -> Interval {
        debug_assert!(!lo.is_nan() && !hi.is_nan(), "NaN interval endpoint");
        assert!(lo <= hi, "inverted interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    /// The degenerate interval `[x, x]`.
    #[inline]
    pub fn point(x: f64) -> Interval {
        Interval::new(x, x)
    }

    /// One-ulp inflation of `approx`, for quantities known to lie within
    /// one ulp of a computed double (e.g. decimal constants).
    #[inline]
    pub fn with_ulp_slack(approx: f64) -> Interval {
        Interval::new(approx.next_down(), approx.next_up())
    }

    /// Relative inflation by `rel` plus absolute inflation by `abs`,
    /// used to certify library special functions from their documented
    /// error bounds.
    pub fn inflate(&self, rel: f64, abs: f64) -> Interval {
        let pad_lo = mul_up(self.lo.abs(), rel) + abs;
        let pad_hi = mul_up(self.hi.abs(), rel) + abs;
        Interval::new(add_down(self.lo, -pad_lo), add_up(self.hi, pad_hi))
    }

    #[inline]
    pub fn lo(&self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Midpoint, clamped into the interval.
    #[inline]
    pub fn mid(&self) -> f64 {
        let m = 0.5 * (self.lo + self.hi);
        if m.is_finite() {
            m.clamp(self.lo, self.hi)
        } else if self.lo.is_finite() {
            self.lo
        } else {
            self.hi
        }
    }

    /// Largest absolute value attained in the interval.
    #[inline]
    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    #[inline]
    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    #[inline]
    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    #[inline]
    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    #[inline]
    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    #[inline]
    pub fn add(&self, rhs: &Interval) -> Interval {
        Interval::new(add_down(self.lo, rhs.lo), add_up(self.hi, rhs.hi))
    }

    #[inline]
    pub fn sub(&self, rhs: &Interval) -> Interval {
        Interval::new(add_down(self.lo, -rhs.hi), add_up(self.hi, -rhs.lo))
    }

    #[inline]
    pub fn neg(&self) -> Interval {
        Interval::new(-self.hi, -self.lo)
    }

    pub fn mul(&self, rhs: &Interval) -> Interval {
        let (a, b, c, d) = (self.lo, self.hi, rhs.lo, rhs.hi);
        let lo = mul_down(a, c)
            .min(mul_down(a, d))
            .min(mul_down(b, c))
            .min(mul_down(b, d));
        let hi = mul_up(a, c)
            .max(mul_up(a, d))
            .max(mul_up(b, c))
            .max(mul_up(b, d));
        Interval::new(lo, hi)
    }

    /// Tighter than `self.mul(self)`: the square never goes negative.
    pub fn square(&self) -> Interval {
        if self.lo >= 0.0 {
            Interval::new(mul_down(self.lo, self.lo), mul_up(self.hi, self.hi))
        } else if self.hi <= 0.0 {
            Interval::new(mul_down(self.hi, self.hi), mul_up(self.lo, self.lo))
        } else {
            let m = self.mag();
            Interval::new(0.0, mul_up(m, m))
        }
    }

    pub fn div(&self, rhs: &Interval) -> Result<Interval, IntervalError> {
        if rhs.contains(0.0) {
            return Err(IntervalError::DivisionByZeroInterval);
        }
        let (a, b, c, d) = (self.lo, self.hi, rhs.lo, rhs.hi);
        let lo = div_down(a, c)
            .min(div_down(a, d))
            .min(div_down(b, c))
            .min(div_down(b, d));
        let hi = div_up(a, c)
            .max(div_up(a, d))
            .max(div_up(b, c))
            .max(div_up(b, d));
        Ok(Interval::new(lo, hi))
    }

    pub fn sqrt(&self) -> Result<Interval, IntervalError> {
        if self.hi < 0.0 {
            return Err(IntervalError::NegativeSqrt);
        }
        let lo = if self.lo < 0.0 {
            if self.lo >= -SQRT_CLAMP_SLACK {
                0.0
            } else {
                return Err(IntervalError::NegativeSqrt);
            }
        } else {
            self.lo
        };
        Ok(Interval::new(sqrt_down(lo), sqrt_up(self.hi)))
    }

    #[inline]
    pub fn abs(&self) -> Interval {
        if self.lo >= 0.0 {
            *self
        } else if self.hi <= 0.0 {
            self.neg()
        } else {
            Interval::new(0.0, self.mag())
        }
    }

    #[inline]
    pub fn min(&self, rhs: &Interval) -> Interval {
        Interval::new(self.lo.min(rhs.lo), self.hi.min(rhs.hi))
    }

    #[inline]
    pub fn max(&self, rhs: &Interval) -> Interval {
        Interval::new(self.lo.max(rhs.lo), self.hi.max(rhs.hi))
    }

    /// Smallest interval containing both operands.
    #[inline]
    pub fn hull(&self, rhs: &Interval) -> Interval {
        Interval::new(self.lo.min(rhs.lo), self.hi.max(rhs.hi))
    }

    /// Intersection; `None` when disjoint.
    pub fn intersect(&self, rhs: &Interval) -> Option<Interval> {
        let lo = self.lo.max(rhs.lo);
        let hi = self.hi.min(rhs.hi);
        if lo <= hi {
            Some(Interval::new(lo, hi))
        } else {
            None
        }
    }

    /// Intersection with bounds the exact value provably lies in; the
    /// caller asserts nonemptiness.
    #[inline]
    pub fn clamp_to(&self, bounds: &Interval) -> Interval {
        self.intersect(bounds)
            .expect("clamp_to called with disjoint bounds")
    }

    /// Multiply by a scalar treated as the exact point `[k, k]`.
    #[inline]
    pub fn scale(&self, k: f64) -> Interval {
        self.mul(&Interval::point(k))
    }

    /// Add a scalar treated as the exact point `[k, k]`.
    #[inline]
    pub fn shift(&self, k: f64) -> Interval {
        self.add(&Interval::point(k))
    }

    /// Enclosure of a monotone pointwise function from endpoint enclosures.
    ///
    /// `f` must return a certified enclosure of the exact value at each
    /// point and be monotone in the stated direction over `self`.
    pub fn lift_monotone<F>(&self, f: F, direction: Monotonicity) -> Interval
    where
        F: Fn(f64) -> Interval,
    {
        let (at_lo, at_hi) = (f(self.lo), f(self.hi));
        match direction {
            Monotonicity::Increasing => Interval::new(at_lo.lo, at_hi.hi),
            Monotonicity::Decreasing => Interval::new(at_hi.lo, at_lo.hi),
        }
    }
}

impl From<f64> for Interval {
    fn from(x: f64) -> Interval {
        Interval::point(x)
    }
}

/// Direction tag for [`Interval::lift_monotone`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Monotonicity {
    Increasing,
    Decreasing,
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rayon::prelude::*;

    fn rat(x: f64) -> BigRational {
        BigRational::from_float(x).expect("finite float")
    }

    /// Exact containment check: does [lo, hi] contain the rational x?
    fn rational_in(lo: f64, hi: f64, x: &BigRational) -> bool {
        rat(lo) <= *x && *x <= rat(hi)
    }

    #[test]
    fn exact_endpoint_arithmetic() {
        let a = Interval::new(1.0, 2.0);
        let b = Interval::new(3.0, 4.0);
        assert_eq!(a.add(&b), Interval::new(4.0, 6.0));
        assert_eq!(Interval::ZERO.add(&b), b);
    }

    #[test]
    fn inexact_addition_widens() {
        let a = Interval::point(0.1);
        let b = Interval::point(0.2);
        let s = a.add(&b);
        assert!(s.lo < s.hi, "0.1 + 0.2 must widen: {s:?}");
        assert!(rational_in(s.lo, s.hi, &(rat(0.1) + rat(0.2))));
    }

    #[test]
    fn mul_sign_cases() {
        let r = Interval::new(-1.0, 2.0).mul(&Interval::new(3.0, 4.0));
        assert_eq!(r, Interval::new(-4.0, 8.0));
    }

    #[test]
    fn sqrt_monotone_exact() {
        let r = Interval::new(4.0, 9.0).sqrt().unwrap();
        assert_eq!(r, Interval::new(2.0, 3.0));
    }

    #[test]
    fn sqrt_clamps_tiny_negative_only() {
        let r = Interval::new(-1e-13, 4.0).sqrt().unwrap();
        assert_eq!(r.lo(), 0.0);
        assert_eq!(
            Interval::new(-1.0, 4.0).sqrt(),
            Err(IntervalError::NegativeSqrt)
        );
    }

    #[test]
    fn div_monotone_exact() {
        let r = Interval::ONE.div(&Interval::new(2.0, 4.0)).unwrap();
        assert_eq!(r, Interval::new(0.25, 0.5));
        assert_eq!(
            Interval::ONE.div(&Interval::new(-1.0, 1.0)),
            Err(IntervalError::DivisionByZeroInterval)
        );
    }

    #[test]
    fn zero_times_halfline_marker() {
        let r = Interval::ZERO.mul(&Interval::new(0.0, f64::INFINITY));
        assert_eq!(r, Interval::ZERO);
    }

    #[test]
    fn lift_monotone_endpoints() {
        // An exp-like strictly increasing map with pointwise enclosures.
        let f = |x: f64| Interval::with_ulp_slack(x.exp());
        let r = Interval::new(0.0, 1.0).lift_monotone(f, Monotonicity::Increasing);
        assert!(r.contains(1.0) && r.contains(std::f64::consts::E));
        let g = |x: f64| Interval::with_ulp_slack((-x).exp());
        let d = Interval::new(0.0, 1.0).lift_monotone(g, Monotonicity::Decreasing);
        assert!(d.contains(1.0) && d.contains(1.0 / std::f64::consts::E));
    }

    /// Randomized inclusion property against exact rational arithmetic,
    /// 10^6 trials covering every operation.
    #[test]
    fn inclusion_property_randomized() {
        const TRIALS: u64 = 1_000_000;
        let failures: usize = (0..TRIALS)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(0x1A7E ^ i);
                let mut sample = |scale: f64| -> (Interval, f64) {
                    let lo = rng.gen_range(-scale..scale);
                    let w = rng.gen_range(0.0..scale / 4.0);
                    let hi = lo + w;
                    let x = rng.gen_range(lo..=hi);
                    (Interval::new(lo, hi), x)
                };
                let (a, x) = sample(1e3);
                let (b, y) = sample(1e3);
                let mut bad = 0;

                let s = a.add(&b);
                bad += usize::from(!rational_in(s.lo, s.hi, &(rat(x) + rat(y))));
                let d = a.sub(&b);
                bad += usize::from(!rational_in(d.lo, d.hi, &(rat(x) - rat(y))));
                let p = a.mul(&b);
                bad += usize::from(!rational_in(p.lo, p.hi, &(rat(x) * rat(y))));
                let sq = a.square();
                bad += usize::from(!rational_in(sq.lo, sq.hi, &(rat(x) * rat(x))));
                if !b.contains(0.0) {
                    let q = a.div(&b).unwrap();
                    bad += usize::from(!rational_in(q.lo, q.hi, &(rat(x) / rat(y))));
                }
                // sqrt inclusion: [lo,hi] ∋ sqrt(u) iff lo² ≤ u ≤ hi²,
                // compared exactly in rationals.
                let au = a.abs();
                let u = x.abs();
                let r = au.sqrt().unwrap();
                let ok = rat(r.lo).pow(2) <= rat(u) && rat(u) <= rat(r.hi).pow(2);
                bad += usize::from(!ok);

                bad
            })
            .sum();
        assert_eq!(failures, 0, "inclusion violations detected");
    }

    #[test]
    fn commutativity_of_set_enclosures() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let mut iv = |scale: f64| {
                let lo = rng.gen_range(-scale..scale);
                Interval::new(lo, lo + rng.gen_range(0.0..5.0))
            };
            let a = iv(10.0);
            let b = iv(10.0);
            assert_eq!(a.add(&b), b.add(&a));
            assert_eq!(a.mul(&b), b.mul(&a));
        }
    }

    #[test]
    fn width_monotonicity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let lo = rng.gen_range(-10.0..10.0);
            let a = Interval::new(lo, lo + rng.gen_range(0.0..5.0));
            let wide =
                Interval::new(a.lo - rng.gen_range(0.0..1.0), a.hi + rng.gen_range(0.0..1.0));
            let blo = rng.gen_range(-10.0..10.0);
            let b = Interval::new(blo, blo + rng.gen_range(0.0..5.0));
            assert!(wide.add(&b).contains_interval(&a.add(&b)));
            assert!(wide.mul(&b).contains_interval(&a.mul(&b)));
            assert!(wide.sub(&b).contains_interval(&a.sub(&b)));
        }
    }

    #[test]
    fn directed_scalar_helpers_bracket_exact_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..100_000 {
            let a: f64 = rng.gen_range(-1e6..1e6);
            let b: f64 = rng.gen_range(-1e-6..1e-6);
            let exact = rat(a) + rat(b);
            assert!(rat(add_down(a, b)) <= exact);
            assert!(exact <= rat(add_up(a, b)));
        }
    }
}
