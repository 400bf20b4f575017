//! The ratio function α, the two bias-selection algorithms (linear and
//! pairing), the permissible-bias region of the pairing selector, and the
//! reduction of the worst-bias search to at most nine candidate points.

use crate::config::{ConfigCube, Configuration};
use crate::gaussian::{self, fast, Enclosure};
use crate::interval::Interval;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RoundingError {
    /// The μ vector does not sum to zero within accumulated rounding.
    #[error("bias selection requires sum(mu) = 0, got residual {0:e}")]
    UnbalancedInput(f64),
    /// The ρ interval reaches 1, so the SDP contribution (1-ρ)/2 vanishes.
    #[error("alpha is undefined where rho reaches 1")]
    DegenerateEdge,
    /// Invalid boost function parameters.
    #[error("invalid boost function: {0}")]
    InvalidBoost(&'static str),
}

/// Single-knee piecewise-linear boost function f(x) = slope·max(0, x-knee),
/// nondecreasing and Lipschitz with f(0) = 0 and f(1) ≤ 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoostFunction {
    knee: f64,
    slope: f64,
}

impl BoostFunction {
    pub fn new(knee: f64, slope: f64) -> Result<BoostFunction, RoundingError> {
        if !(0.0..=1.0).contains(&knee) {
            return Err(RoundingError::InvalidBoost("knee must be in [0,1]"));
        }
        if !slope.is_finite() || slope < 0.0 {
            return Err(RoundingError::InvalidBoost("slope must be >= 0"));
        }
        if slope * (1.0 - knee) > 1.0 {
            return Err(RoundingError::InvalidBoost("f(1) must be <= 1"));
        }
        Ok(BoostFunction { knee, slope })
    }

    /// The identically-zero boost function.
    pub fn zero() -> BoostFunction {
        BoostFunction {
            knee: 0.0,
            slope: 0.0,
        }
    }

    pub fn knee(&self) -> f64 {
        self.knee
    }

    pub fn slope(&self) -> f64 {
        self.slope
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.slope * (x - self.knee).max(0.0)
    }

    /// Outward-rounded enclosure of f over an interval (f is monotone).
    pub fn eval_iv(&self, x: &Interval) -> Interval {
        let shifted = x.shift(-self.knee).max(&Interval::ZERO);
        shifted.scale(self.slope).max(&Interval::ZERO)
    }
}

/// Per-vertex biases with Σrᵢ = 0 up to accumulated rounding, checked by
/// compensated summation.
#[derive(Clone, Debug, PartialEq)]
pub struct BiasVector {
    r: Vec<f64>,
}

impl BiasVector {
    /// Wrap explicit bias values, checking the zero-sum invariant.
    pub fn from_values(r: Vec<f64>) -> Result<BiasVector, RoundingError> {
        check_balanced(&r)?;
        Ok(BiasVector { r })
    }

    pub fn values(&self) -> &[f64] {
        &self.r
    }

    pub fn into_values(self) -> Vec<f64> {
        self.r
    }

    pub fn balance_residual(&self) -> f64 {
        neumaier_sum(&self.r)
    }
}

/// Neumaier (improved Kahan) compensated summation.
fn neumaier_sum(xs: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn check_balanced(mus: &[f64]) -> Result<(), RoundingError> {
    let abs_sum: f64 = mus.iter().map(|m| m.abs()).sum();
    let tol = 64.0 * f64::EPSILON * abs_sum.max(1.0);
    let residual = neumaier_sum(mus);
    if residual.abs() > tol {
        return Err(RoundingError::UnbalancedInput(residual));
    }
    Ok(())
}

/// Linear bias selection rᵢ = c·μᵢ.
pub fn select_bias_linear(mus: &[f64], cparam: f64) -> Result<BiasVector, RoundingError> {
    assert!((0.0..=1.0).contains(&cparam));
    check_balanced(mus)?;
    Ok(BiasVector {
        r: mus.iter().map(|m| cparam * m).collect(),
    })
}

/// Pairing bias selection: start from rᵢ = c·μᵢ, then repeatedly take the
/// largest remaining strictly-positive μ and the smallest remaining
/// strictly-negative μ and boost the pair by ±(1-c)·f(min(|μᵢ|, |μⱼ|)).
/// Ties are broken toward the lowest vertex index; vertices with μᵢ = 0
/// never enter the loop.
pub fn select_bias_pairing(
    mus: &[f64],
    cparam: f64,
    f: &BoostFunction,
) -> Result<BiasVector, RoundingError> {
    assert!((0.0..=1.0).contains(&cparam));
    check_balanced(mus)?;
    let mut r: Vec<f64> = mus.iter().map(|m| cparam * m).collect();

    let mut pos: Vec<usize> = (0..mus.len()).filter(|&i| mus[i] > 0.0).collect();
    let mut neg: Vec<usize> = (0..mus.len()).filter(|&i| mus[i] < 0.0).collect();
    // argmax / argmin order with lowest-index tie-breaking.
    pos.sort_by(|&a, &b| mus[b].partial_cmp(&mus[a]).unwrap().then(a.cmp(&b)));
    neg.sort_by(|&a, &b| mus[a].partial_cmp(&mus[b]).unwrap().then(a.cmp(&b)));

    for (&i, &j) in pos.iter().zip(neg.iter()) {
        let beta = mus[i].abs().min(mus[j].abs());
        let boost = (1.0 - cparam) * f.eval(beta);
        r[i] += boost;
        r[j] -= boost;
    }
    debug_assert!(r.iter().all(|v| (-1.0..=1.0).contains(v)));
    Ok(BiasVector { r })
}

/// One axis-aligned rectangle of bias pairs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BiasRect {
    pub i1: Interval,
    pub i2: Interval,
}

/// The permissible-bias set R_{c,f}(μ₁, μ₂) as a union of one rectangle
/// (equal signs) or two rectangles (opposite signs), each strengthening
/// one coordinate's lower bound.
#[derive(Clone, Debug, PartialEq)]
pub struct BiasRegion {
    pub rects: Vec<BiasRect>,
}

impl BiasRegion {
    pub fn contains(&self, r1: f64, r2: f64) -> bool {
        self.rects
            .iter()
            .any(|r| r.i1.contains(r1) && r.i2.contains(r2))
    }
}

/// Signed bias interval for one vertex: sgn(r) = sgn(μ) and |r| between
/// `lower_abs` and c|μ| + (1-c)f(|μ|).
fn signed_interval(mu: f64, cparam: f64, f: &BoostFunction, lower_abs: f64) -> Interval {
    let upper_abs = (cparam * mu.abs() + (1.0 - cparam) * f.eval(mu.abs())).min(1.0);
    let lo_abs = lower_abs.min(upper_abs);
    if mu >= 0.0 {
        Interval::new(lo_abs, upper_abs)
    } else {
        Interval::new(-upper_abs, -lo_abs)
    }
}

/// The permissible biases of a pair (μ₁, μ₂) under parameters (c, f).
pub fn permissible_biases(
    mu1: f64,
    mu2: f64,
    cparam: f64,
    f: &BoostFunction,
) -> BiasRegion {
    let weak = |mu: f64| signed_interval(mu, cparam, f, cparam * mu.abs());
    if mu1.signum() == mu2.signum() || mu1 == 0.0 || mu2 == 0.0 {
        return BiasRegion {
            rects: vec![BiasRect {
                i1: weak(mu1),
                i2: weak(mu2),
            }],
        };
    }
    // Opposite signs: at least one coordinate obeys the strengthened bound
    // |r| ≥ c|μ| + (1-c)·f(min(|μ₁|, |μ₂|)).
    let fmin = f.eval(mu1.abs().min(mu2.abs()));
    let strong = |mu: f64| {
        signed_interval(mu, cparam, f, cparam * mu.abs() + (1.0 - cparam) * fmin)
    };
    BiasRegion {
        rects: vec![
            BiasRect {
                i1: strong(mu1),
                i2: weak(mu2),
            },
            BiasRect {
                i1: weak(mu1),
                i2: strong(mu2),
            },
        ],
    }
}

/// Certified enclosure of α = 2(1 - Λ_ρ̃(r1, r2))/(1 - ρ) over a cube of
/// configurations and interval biases.
pub fn alpha_value_cube(
    cube: &ConfigCube,
    r1: Interval,
    r2: Interval,
    tol: f64,
) -> Result<Interval, RoundingError> {
    let tr = cube
        .tilde_rho(false)
        .expect("non-strict tilde_rho is total");
    alpha_value_cube_with_tr(cube, tr, r1, r2, tol)
}

/// As [`alpha_value_cube`] with a caller-supplied ρ̃ enclosure (e.g. the
/// Conf-consistent one when bounding over cube ∩ Conf only).
pub fn alpha_value_cube_with_tr(
    cube: &ConfigCube,
    tr: Interval,
    r1: Interval,
    r2: Interval,
    tol: f64,
) -> Result<Interval, RoundingError> {
    let one_minus_rho = Interval::ONE.sub(&cube.rho);
    if one_minus_rho.lo() <= 0.0 {
        return Err(RoundingError::DegenerateEdge);
    }
    let lam = gaussian::lambda_iv(tr, r1, r2, tol);
    let num = Interval::ONE.sub(&lam).scale(2.0).max(&Interval::ZERO);
    let alpha = num
        .div(&one_minus_rho)
        .expect("denominator bounded away from zero");
    Ok(alpha.max(&Interval::ZERO))
}

/// Certified enclosure of α at a point configuration and point biases.
pub fn alpha_value(
    config: &Configuration,
    r1: f64,
    r2: f64,
) -> Result<Enclosure, RoundingError> {
    alpha_value_tol(config, r1, r2, gaussian::DEFAULT_TOL)
}

/// [`alpha_value`] with an explicit quadrature tolerance.
pub fn alpha_value_tol(
    config: &Configuration,
    r1: f64,
    r2: f64,
    tol: f64,
) -> Result<Enclosure, RoundingError> {
    let cube = ConfigCube::new(
        Interval::point(config.mu1),
        Interval::point(config.mu2),
        Interval::point(config.rho),
    );
    // The paper's boundary convention ρ̃ = 0 at |μ| = 1 must be preserved:
    // the interval quotient degenerates there, so special-case it.
    if config.mu1.abs() >= 1.0 || config.mu2.abs() >= 1.0 {
        let one_minus_rho = Interval::ONE.sub(&Interval::point(config.rho));
        if one_minus_rho.lo() <= 0.0 {
            return Err(RoundingError::DegenerateEdge);
        }
        let lam = gaussian::lambda_iv(
            Interval::ZERO,
            Interval::point(r1),
            Interval::point(r2),
            tol,
        );
        let num = Interval::ONE.sub(&lam).scale(2.0).max(&Interval::ZERO);
        return Ok(Enclosure(
            num.div(&one_minus_rho).expect("positive").max(&Interval::ZERO),
        ));
    }
    alpha_value_cube(&cube, Interval::point(r1), Interval::point(r2), tol).map(Enclosure)
}

/// Plain-float α for optimizer inner loops; no enclosure guarantees.
#[inline]
pub fn alpha_point_fast(config: &Configuration, r1: f64, r2: f64) -> f64 {
    let one_minus_rho = 1.0 - config.rho;
    if one_minus_rho <= 0.0 {
        return f64::INFINITY;
    }
    let tr = config.tilde_rho();
    2.0 * (1.0 - fast::lambda(tr, r1, r2)).max(0.0) / one_minus_rho
}

/// Candidate bias pairs whose minimum equals the minimum of α over
/// I₁ × I₂ at the given configuration: the four corners; for ρ̃ > 0 also
/// the origin (optional) and the stationary pairs built from
/// g(x) = 1 - 2Φ(Φ⁻¹((1-x)/2)/ρ̃); at ρ̃ = 1 the shared endpoint of
/// overlapping intervals.
pub fn worst_bias_candidates(
    config: &Configuration,
    i1: Interval,
    i2: Interval,
    include_origin: bool,
) -> Vec<(f64, f64)> {
    let tr = config.tilde_rho();
    let (a1, b1) = (i1.lo(), i1.hi());
    let (a2, b2) = (i2.lo(), i2.hi());
    let mut out = vec![(a1, a2), (a1, b2), (b1, a2), (b1, b2)];
    if tr <= 0.0 {
        return out;
    }
    if tr >= 1.0 {
        // g is the identity: any shared value of overlapping intervals.
        if i1.intersects(&i2) {
            let shared = a1.max(a2);
            out.push((shared, shared));
        }
        return out;
    }
    if include_origin && i1.contains(0.0) && i2.contains(0.0) {
        out.push((0.0, 0.0));
    }
    let g = |x: f64| fast::g_threshold(tr, x);
    for (x, into_second) in [(a1, true), (b1, true), (a2, false), (b2, false)] {
        let y = g(x);
        if into_second {
            if i2.contains(y) {
                out.push((x, y));
            }
        } else if i1.contains(y) {
            out.push((y, x));
        }
    }
    out
}

/// Candidate pairs as certified intervals, g-values clamped into the box
/// (a clamped stationary point coincides with a corner, which is already
/// present). Used by the certified `alpha_cf`.
fn candidate_boxes(
    tr: Interval,
    i1: Interval,
    i2: Interval,
    include_origin: bool,
) -> Vec<(Interval, Interval)> {
    let corner = |x: f64| Interval::point(x);
    let (a1, b1) = (i1.lo(), i1.hi());
    let (a2, b2) = (i2.lo(), i2.hi());
    let mut out = vec![
        (corner(a1), corner(a2)),
        (corner(a1), corner(b2)),
        (corner(b1), corner(a2)),
        (corner(b1), corner(b2)),
    ];
    if tr.hi() <= 0.0 {
        return out;
    }
    if include_origin && i1.contains(0.0) && i2.contains(0.0) {
        out.push((Interval::ZERO, Interval::ZERO));
    }
    if tr.lo() >= 1.0 {
        if i1.intersects(&i2) {
            let shared = corner(a1.max(a2));
            out.push((shared, shared));
        }
        return out;
    }
    // Evaluate g on the positive part of the ρ̃ enclosure; g is needed
    // only when ρ̃ might be positive, and α at these extra points is
    // evaluated with the full ρ̃ interval anyway (they are candidates, not
    // bounds).
    let tr_pos = tr.lo().max(1e-12);
    if let (Ok(ga1), Ok(gb1), Ok(ga2), Ok(gb2)) = (
        gaussian::g_threshold(tr_pos, a1),
        gaussian::g_threshold(tr_pos, b1),
        gaussian::g_threshold(tr_pos, a2),
        gaussian::g_threshold(tr_pos, b2),
    ) {
        let tr_hi = tr.hi().min(1.0);
        let extend = |g_lo: Enclosure, x: f64| {
            // g is monotone in ρ̃ direction too; hull the g enclosures at
            // both ρ̃ ends to cover every ρ̃ in the cube.
            let g_hi = gaussian::g_threshold(tr_hi, x)
                .map(|e| e.value())
                .unwrap_or(Interval::point(x));
            g_lo.value().hull(&g_hi)
        };
        for (x, g_enc, into_second) in [
            (a1, extend(ga1, a1), true),
            (b1, extend(gb1, b1), true),
            (a2, extend(ga2, a2), false),
            (b2, extend(gb2, b2), false),
        ] {
            let target = if into_second { i2 } else { i1 };
            if let Some(clamped) = g_enc.intersect(&target) {
                if into_second {
                    out.push((corner(x), clamped));
                } else {
                    out.push((clamped, corner(x)));
                }
            }
        }
    }
    out
}

/// Certified enclosure of min α over one rectangle via the candidate set.
fn alpha_rect_min(
    cube: &ConfigCube,
    tr: Interval,
    rect: &BiasRect,
    include_origin: bool,
    tol: f64,
) -> Result<Interval, RoundingError> {
    let one_minus_rho = Interval::ONE.sub(&cube.rho);
    if one_minus_rho.lo() <= 0.0 {
        return Err(RoundingError::DegenerateEdge);
    }
    let mut best: Option<Interval> = None;
    for (r1, r2) in candidate_boxes(tr, rect.i1, rect.i2, include_origin) {
        let lam = gaussian::lambda_iv(tr, r1, r2, tol);
        let num = Interval::ONE.sub(&lam).scale(2.0).max(&Interval::ZERO);
        let a = num
            .div(&one_minus_rho)
            .expect("denominator positive")
            .max(&Interval::ZERO);
        best = Some(match best {
            None => a,
            Some(b) => Interval::new(b.lo().min(a.lo()), b.hi().min(a.hi())),
        });
    }
    Ok(best.expect("candidate set is never empty"))
}

/// Certified enclosure of α_{c,f}(μ₁, μ₂, ρ) = min over the permissible
/// biases of α, via Lemma-style candidate reduction on each rectangle.
/// The (0,0) candidate is discarded: the permissible rectangles touch the
/// origin only at their corners.
pub fn alpha_cf(
    config: &Configuration,
    cparam: f64,
    f: &BoostFunction,
) -> Result<Enclosure, RoundingError> {
    alpha_cf_tol(config, cparam, f, gaussian::DEFAULT_TOL)
}

/// [`alpha_cf`] with an explicit quadrature tolerance.
pub fn alpha_cf_tol(
    config: &Configuration,
    cparam: f64,
    f: &BoostFunction,
    tol: f64,
) -> Result<Enclosure, RoundingError> {
    let cube = ConfigCube::new(
        Interval::point(config.mu1),
        Interval::point(config.mu2),
        Interval::point(config.rho),
    );
    let tr = if config.mu1.abs() >= 1.0 || config.mu2.abs() >= 1.0 {
        Interval::ZERO
    } else {
        cube.tilde_rho(false).expect("total")
    };
    let region = permissible_biases(config.mu1, config.mu2, cparam, f);
    let mut best: Option<Interval> = None;
    for rect in &region.rects {
        let a = alpha_rect_min(&cube, tr, rect, false, tol)?;
        best = Some(match best {
            None => a,
            Some(b) => Interval::new(b.lo().min(a.lo()), b.hi().min(a.hi())),
        });
    }
    Ok(Enclosure(best.expect("region has 1 or 2 rectangles")))
}

/// Plain-float α_{c,f} for optimizer inner loops.
pub fn alpha_cf_fast(config: &Configuration, cparam: f64, f: &BoostFunction) -> f64 {
    let region = permissible_biases(config.mu1, config.mu2, cparam, f);
    let mut best = f64::INFINITY;
    for rect in &region.rects {
        for (r1, r2) in worst_bias_candidates(config, rect.i1, rect.i2, false) {
            best = best.min(alpha_point_fast(config, r1, r2));
        }
    }
    best
}

/// Interval hulls of the permissible-bias rectangles over μ intervals,
/// split by sign so the strengthened opposite-sign bounds survive. Sound
/// superset: every R_{c,f}(μ₁, μ₂) with (μ₁, μ₂) in the box is covered by
/// one of the returned rectangles.
pub(crate) fn pairing_bias_hulls(
    mu1: Interval,
    mu2: Interval,
    cparam: f64,
    f: &BoostFunction,
) -> Vec<BiasRect> {
    let split_sign = |iv: Interval| -> Vec<Interval> {
        if iv.lo() >= 0.0 || iv.hi() <= 0.0 {
            vec![iv]
        } else {
            vec![
                Interval::new(iv.lo(), 0.0),
                Interval::new(0.0, iv.hi()),
            ]
        }
    };
    // Envelope of the weak bounds over a signed μ interval: |r| from
    // c·|μ|_min up to c·|μ|_max + (1-c)·f(|μ|_max), with `extra_low`
    // added to the lower end for a strengthened coordinate.
    let envelope = |piece: Interval, extra_low: Interval| -> Interval {
        let abs = piece.abs();
        let lo_abs = Interval::point(abs.lo())
            .scale(cparam)
            .add(&extra_low)
            .lo()
            .max(0.0);
        let hi_abs = Interval::point(abs.hi())
            .scale(cparam)
            .add(&f.eval_iv(&Interval::point(abs.hi())).scale(1.0 - cparam))
            .hi()
            .min(1.0);
        let lo_abs = lo_abs.min(hi_abs);
        if piece.hi() <= 0.0 && piece.lo() < 0.0 {
            Interval::new(-hi_abs, -lo_abs)
        } else if piece.lo() >= 0.0 && piece.hi() > 0.0 {
            Interval::new(lo_abs, hi_abs)
        } else {
            // The zero-width piece {0}: r = 0.
            Interval::ZERO
        }
    };
    let mut out = Vec::new();
    for p1 in split_sign(mu1) {
        for p2 in split_sign(mu2) {
            let opposite = (p1.hi() <= 0.0 && p2.lo() >= 0.0 && p2.hi() > 0.0
                || p2.hi() <= 0.0 && p1.lo() >= 0.0 && p1.hi() > 0.0)
                && p1.width() + p1.mag() > 0.0
                && p2.width() + p2.mag() > 0.0;
            if !opposite {
                out.push(BiasRect {
                    i1: envelope(p1, Interval::ZERO),
                    i2: envelope(p2, Interval::ZERO),
                });
                continue;
            }
            // min(|μ₁|, |μ₂|) over the piece is the min of the lower
            // absolute endpoints; f of it strengthens one coordinate.
            let min_abs = p1.abs().lo().min(p2.abs().lo());
            let fmin = f
                .eval_iv(&Interval::point(min_abs))
                .scale(1.0 - cparam)
                .max(&Interval::ZERO);
            out.push(BiasRect {
                i1: envelope(p1, fmin),
                i2: envelope(p2, Interval::ZERO),
            });
            out.push(BiasRect {
                i1: envelope(p1, Interval::ZERO),
                i2: envelope(p2, fmin),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{PHI_1, PHI_2};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn claim2_boost() -> BoostFunction {
        BoostFunction::new(0.478, 1.618).unwrap()
    }

    #[test]
    fn boost_function_validation() {
        assert!(BoostFunction::new(0.478, 1.618).is_ok());
        assert!(BoostFunction::new(0.0, 1.5).is_err()); // f(1) = 1.5 > 1
        assert!(BoostFunction::new(-0.1, 1.0).is_err());
        assert!(BoostFunction::new(0.5, -1.0).is_err());
        let f = claim2_boost();
        assert_eq!(f.eval(0.0), 0.0);
        assert_eq!(f.eval(0.478), 0.0);
        assert!((f.eval(1.0) - 1.618 * 0.522).abs() < 1e-12);
    }

    #[test]
    fn linear_selection() {
        let b = select_bias_linear(&[0.5, -0.5], 0.8).unwrap();
        assert_eq!(b.values(), &[0.4, -0.4]);
        let b = select_bias_linear(&[0.3, -0.1, -0.2], 0.0).unwrap();
        assert!(b.values().iter().all(|&v| v == 0.0));
        let mus = [0.25, -0.75, 0.5];
        let b = select_bias_linear(&mus, 1.0).unwrap();
        assert_eq!(b.values(), &mus);
        assert!(select_bias_linear(&[0.5, -0.3], 0.8).is_err());
    }

    #[test]
    fn pairing_selection_hand_trace() {
        let f = claim2_boost();
        let b = select_bias_pairing(&[0.6, -0.5, 0.2, -0.3], 0.8056, &f).unwrap();
        let boost = (1.0 - 0.8056) * 1.618 * (0.5 - 0.478);
        let expect = [
            0.8056 * 0.6 + boost,
            -0.8056 * 0.5 - boost,
            0.8056 * 0.2, // beta = 0.2 < knee, zero boost
            -0.8056 * 0.3,
        ];
        for (got, want) in b.values().iter().zip(expect.iter()) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        assert!((b.values()[0] - 0.49028).abs() < 1e-5);
        assert!((b.values()[1] - -0.40972).abs() < 1e-5);
        assert!(b.balance_residual().abs() < 1e-12);
    }

    #[test]
    fn pairing_no_mixed_signs_is_identity_scaling() {
        let f = claim2_boost();
        let b = select_bias_pairing(&[0.0, 0.0, 0.0], 0.9, &f).unwrap();
        assert_eq!(b.values(), &[0.0, 0.0, 0.0]);
        // Single antipodal pair gets one boost.
        let x = 0.7;
        let b = select_bias_pairing(&[x, -x], 0.8056, &f).unwrap();
        let expect = 0.8056 * x + (1.0 - 0.8056) * f.eval(x);
        assert!((b.values()[0] - expect).abs() < 1e-14);
        assert!((b.values()[1] + expect).abs() < 1e-14);
    }

    #[test]
    fn pairing_determinism_with_ties() {
        let f = claim2_boost();
        let mus = [0.4, 0.4, -0.4, -0.4];
        let a = select_bias_pairing(&mus, 0.8, &f).unwrap();
        let b = select_bias_pairing(&mus, 0.8, &f).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn permissible_region_shapes() {
        let f = claim2_boost();
        let c = 0.8056;
        // Equal signs: one rectangle, weak bounds.
        let region = permissible_biases(0.5, 0.5, c, &f);
        assert_eq!(region.rects.len(), 1);
        let r = &region.rects[0];
        assert!((r.i1.lo() - c * 0.5).abs() < 1e-15);
        assert!((r.i1.hi() - (c * 0.5 + (1.0 - c) * f.eval(0.5))).abs() < 1e-15);
        assert_eq!(r.i1, r.i2);

        // Opposite signs: two rectangles, one strengthened coordinate each.
        let region = permissible_biases(0.6, -0.5, c, &f);
        assert_eq!(region.rects.len(), 2);
        let fmin = f.eval(0.5);
        let strong_lo_1 = c * 0.6 + (1.0 - c) * fmin;
        let strong_lo_2 = -(c * 0.5 + (1.0 - c) * fmin);
        assert!((region.rects[0].i1.lo() - strong_lo_1).abs() < 1e-15);
        assert!((region.rects[1].i2.hi() - strong_lo_2).abs() < 1e-15);

        // μ₁ = 0 forces the degenerate interval [0,0].
        let region = permissible_biases(0.0, -0.7, c, &f);
        assert_eq!(region.rects[0].i1, Interval::ZERO);
    }

    #[test]
    fn pairing_output_lies_in_permissible_region() {
        let f = claim2_boost();
        let c = 0.8056;
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for trial in 0..1000 {
            let n = rng.gen_range(2..=200);
            // Balanced μ vector: random pairs (x, -x) plus zeros.
            let mut mus = Vec::with_capacity(n);
            for _ in 0..n / 2 {
                let x = rng.gen_range(-1.0..1.0);
                mus.push(x);
                mus.push(-x);
            }
            if mus.len() < n {
                mus.push(0.0);
            }
            let bias = select_bias_pairing(&mus, c, &f).unwrap();
            let r = bias.values();
            // Weak bound for every vertex.
            for (i, (&m, &ri)) in mus.iter().zip(r.iter()).enumerate() {
                assert!(
                    ri.signum() == m.signum() || ri == 0.0,
                    "trial {trial} vertex {i}"
                );
                let lo = c * m.abs() - 1e-12;
                let hi = c * m.abs() + (1.0 - c) * f.eval(m.abs()) + 1e-12;
                assert!(ri.abs() >= lo && ri.abs() <= hi, "trial {trial} vertex {i}");
            }
            // Two-rectangle membership for every opposite-sign pair.
            for i in 0..mus.len() {
                for j in (i + 1)..mus.len() {
                    if mus[i].signum() * mus[j].signum() >= 0.0 {
                        continue;
                    }
                    let region = permissible_biases(mus[i], mus[j], c, &f);
                    assert!(
                        region.contains(r[i] + 1e-15 * r[i].signum(), r[j])
                            || region.contains(r[i], r[j])
                            || region.contains(
                                r[i] - 1e-12 * r[i].signum(),
                                r[j] - 1e-12 * r[j].signum()
                            ),
                        "trial {trial} pair ({i},{j}): ({}, {}) not in {region:?}",
                        r[i],
                        r[j]
                    );
                }
            }
        }
    }

    #[test]
    fn alpha_at_integral_configuration() {
        // α(1,-1,-1, c, -c) = (1+c²)/2.
        for &c in &[0.0, 0.5, 0.8, 1.0] {
            let a = alpha_value(&PHI_2, c, -c).unwrap();
            let expect = (1.0 + c * c) / 2.0;
            assert!(a.contains(expect), "c = {c}: {a:?} vs {expect}");
        }
        let a = alpha_value(&PHI_2, 0.8, -0.8).unwrap();
        assert!(a.contains(0.82));
    }

    #[test]
    fn alpha_at_phi1_near_linear_optimum() {
        let c = 0.86450318;
        let a = alpha_value(&PHI_1, c * PHI_1.mu1, c * PHI_1.mu2).unwrap();
        assert!(
            (a.mid() - 0.87368).abs() < 1e-4,
            "alpha at phi1 = {}",
            a.mid()
        );
        let f = alpha_point_fast(&PHI_1, c * PHI_1.mu1, c * PHI_1.mu2);
        assert!(a.contains(f) || (f - a.mid()).abs() < 1e-9);
    }

    #[test]
    fn alpha_vanishes_at_equal_biases_under_full_correlation() {
        // For (0,0,ρ) with ρ<1 and r1 = r2, ρ̃ = ρ and the numerator is
        // |r1 - r2|/(1-ρ) = 0 in the ρ̃ → 1 limit; here directly: r1 = r2
        // with ρ̃ = 1 forces Λ = 1.
        let c = Configuration::new(0.0, 0.0, 0.5);
        let a = alpha_value(&c, 0.3, 0.3).unwrap();
        assert!(a.lo() >= 0.0 && a.hi().is_finite());
        let degenerate = Configuration::new(0.0, 0.0, 1.0);
        assert_eq!(
            alpha_value(&degenerate, 0.3, 0.3),
            Err(RoundingError::DegenerateEdge)
        );
    }

    #[test]
    fn candidates_shape_by_correlation_sign() {
        let neg = Configuration::new(0.3, 0.3, -0.5); // ρ̃ < 0
        let i1 = Interval::new(0.2, 0.4);
        let i2 = Interval::new(0.1, 0.3);
        assert_eq!(worst_bias_candidates(&neg, i1, i2, false).len(), 4);

        // ρ̃ = 1 with overlapping intervals: corners plus a shared point.
        let unit = Configuration::new(0.0, 0.0, 1.0);
        let cands = worst_bias_candidates(&unit, Interval::new(0.2, 0.4), Interval::new(0.2, 0.4), false);
        assert!(cands.contains(&(0.2, 0.2)));

        // ρ̃ > 0: corners plus in-range g-points only.
        let pos = Configuration::new(0.1, -0.1, 0.5);
        assert!(pos.tilde_rho() > 0.0);
        let cands = worst_bias_candidates(&pos, i1, i2, false);
        assert!(cands.len() >= 4 && cands.len() <= 8);
        let tr = pos.tilde_rho();
        for &(r1, r2) in &cands[4..] {
            let on_edge1 = r1 == i1.lo() || r1 == i1.hi();
            if on_edge1 {
                assert!((r2 - fast::g_threshold(tr, r1)).abs() < 1e-12);
            } else {
                assert!((r1 - fast::g_threshold(tr, r2)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn candidate_minimum_reaches_grid_minimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for trial in 0..60 {
            // Random smooth configuration with |ρ̃| ≤ 0.999.
            let config = loop {
                let c = Configuration::new(
                    rng.gen_range(-0.95..0.95),
                    rng.gen_range(-0.95..0.95),
                    rng.gen_range(-0.95..0.95),
                );
                if c.is_configuration() && c.tilde_rho().abs() <= 0.999 {
                    break c;
                }
            };
            let lo1 = rng.gen_range(-0.9..0.8);
            let i1 = Interval::new(lo1, lo1 + rng.gen_range(0.01..0.2));
            let lo2 = rng.gen_range(-0.9..0.8);
            let i2 = Interval::new(lo2, lo2 + rng.gen_range(0.01..0.2));

            let cands = worst_bias_candidates(&config, i1, i2, true);
            let cand_min = cands
                .iter()
                .map(|&(r1, r2)| alpha_point_fast(&config, r1, r2))
                .fold(f64::INFINITY, f64::min);

            let n = 60;
            let mut grid_min = f64::INFINITY;
            for i in 0..=n {
                for j in 0..=n {
                    let r1 = i1.lo() + i1.width() * i as f64 / n as f64;
                    let r2 = i2.lo() + i2.width() * j as f64 / n as f64;
                    grid_min = grid_min.min(alpha_point_fast(&config, r1, r2));
                }
            }
            assert!(
                cand_min <= grid_min + 1e-4,
                "trial {trial}: candidates {cand_min} vs grid {grid_min} at {config:?}"
            );
        }
    }

    #[test]
    fn alpha_symmetry_in_arguments() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..200 {
            let c = Configuration::new(
                rng.gen_range(-0.9..0.9),
                rng.gen_range(-0.9..0.9),
                rng.gen_range(-0.9..0.9),
            );
            if !c.is_configuration() {
                continue;
            }
            let swapped = Configuration::new(c.mu2, c.mu1, c.rho);
            let r1 = rng.gen_range(-1.0..1.0);
            let r2 = rng.gen_range(-1.0..1.0);
            let a = alpha_point_fast(&c, r1, r2);
            let b = alpha_point_fast(&swapped, r2, r1);
            assert!((a - b).abs() < 1e-11, "{c:?}: {a} vs {b}");
            assert!(a >= 0.0);
        }
    }

    #[test]
    fn alpha_cf_degenerate_region_at_zero_mu() {
        // μ₁ = μ₂ = 0 forces the region {(0,0)}.
        let f = claim2_boost();
        let config = Configuration::new(0.0, 0.0, -0.5);
        let enc = alpha_cf(&config, 0.8056, &f).unwrap();
        let direct = alpha_value(&config, 0.0, 0.0).unwrap();
        assert!((enc.mid() - direct.mid()).abs() < 1e-10);
    }

    #[test]
    fn alpha_cf_at_integral_corner_uses_boosted_biases() {
        let f = claim2_boost();
        let c = 0.8056;
        let enc = alpha_cf(&PHI_2, c, &f).unwrap();
        // Both biases boosted to ±(c + (1-c)f(1)): α well above (1+c²)/2.
        let boosted = c + (1.0 - c) * f.eval(1.0);
        let expect = alpha_value(&PHI_2, boosted, -c).unwrap();
        assert!(enc.lo() > (1.0 + c * c) / 2.0, "{enc:?}");
        assert!(enc.lo() <= expect.hi() + 1e-9, "{enc:?} vs {expect:?}");
        let fast_v = alpha_cf_fast(&PHI_2, c, &f);
        assert!((enc.mid() - fast_v).abs() < 1e-8);
    }

    #[test]
    fn bias_hulls_cover_pointwise_regions() {
        let f = claim2_boost();
        let c = 0.8056;
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..500 {
            let lo1 = rng.gen_range(-1.0..0.9);
            let mu1 = Interval::new(lo1, (lo1 + rng.gen_range(0.0..0.3)).min(1.0));
            let lo2 = rng.gen_range(-1.0..0.9);
            let mu2 = Interval::new(lo2, (lo2 + rng.gen_range(0.0..0.3)).min(1.0));
            let hulls = pairing_bias_hulls(mu1, mu2, c, &f);
            assert!(!hulls.is_empty() && hulls.len() <= 8);
            for _ in 0..20 {
                let m1 = rng.gen_range(mu1.lo()..=mu1.hi());
                let m2 = rng.gen_range(mu2.lo()..=mu2.hi());
                let region = permissible_biases(m1, m2, c, &f);
                for rect in &region.rects {
                    // Every pointwise rectangle sits inside some hull.
                    let covered = hulls.iter().any(|h| {
                        h.i1.lo() <= rect.i1.lo() + 1e-12
                            && rect.i1.hi() <= h.i1.hi() + 1e-12
                            && h.i2.lo() <= rect.i2.lo() + 1e-12
                            && rect.i2.hi() <= h.i2.hi() + 1e-12
                    });
                    assert!(covered, "({m1}, {m2}) rect {rect:?} not covered");
                }
            }
        }
    }
}
