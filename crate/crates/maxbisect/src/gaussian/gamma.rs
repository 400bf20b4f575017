//! Certified evaluation of the bivariate normal CDF Γ_ρ̃(q1, q2).
//!
//! Evaluation integrates the bivariate density over the correlation
//! parameter: ∂Γ/∂ρ at fixed thresholds (t1, t2) is the density at
//! (t1, t2), so with the substitution ρ = sin θ
//!
//!   Γ_ρ̃(q1, q2) = q1·q2 + (1/2π) ∫₀^{arcsin ρ̃} exp(E(θ)) dθ,
//!   E(θ) = -(t1² + t2² - 2 t1 t2 sin θ) / (2 cos² θ).
//!
//! The θ-integrand is bounded by 1 and smooth on the closed domain, so the
//! same code path handles every ρ̃ ∈ (-1, 1); no truncation of an infinite
//! integral is needed. Each panel integrates the degree-5 Taylor
//! polynomial at the panel center exactly and bounds the Lagrange
//! remainder by the degree-6 ball-Taylor coefficient over the whole panel.
//! Panels touching ±π/2 (where the sec² expansion degenerates) fall back
//! to a zero-order enclosure, sound because the numerator of E is a sum
//! of squares.

use super::taylor::{Ball, Taylor};
use super::{asin_point, cos_iv, cos_point, exp_iv, exp_point, inv_2pi, sin_iv, sin_point};
use crate::interval::{add_down, div_down, div_up, Interval};

/// Hard cap on quadrature panels per evaluation; beyond it the remaining
/// worklist is finished with zero-order enclosures (sound, just wide).
const MAX_PANELS: usize = 100_000;

/// Point-argument Γ enclosure at target quadrature tolerance `tol`.
///
/// Requires rho ∈ [-1, 1] and q1, q2 ∈ [0, 1].
pub(crate) fn gamma_point(rho: f64, q1: f64, q2: f64, tol: f64) -> Interval {
    debug_assert!((-1.0..=1.0).contains(&rho));
    debug_assert!((0.0..=1.0).contains(&q1) && (0.0..=1.0).contains(&q2));
    if q1 == 0.0 || q2 == 0.0 {
        return Interval::ZERO;
    }
    if q1 == 1.0 {
        return Interval::point(q2);
    }
    if q2 == 1.0 {
        return Interval::point(q1);
    }
    if rho == 1.0 {
        return Interval::point(q1.min(q2));
    }
    if rho == -1.0 {
        return Interval::point((q1 + q2 - 1.0).max(0.0));
    }

    let t1 = super::cdf_inv_point(q1);
    let t2 = super::cdf_inv_point(q2);
    let integral = plackett_integral(rho, t1, t2, tol);
    let qq = Interval::point(q1).mul(&Interval::point(q2));
    let raw = qq.add(&integral.mul(&inv_2pi()));

    // Fréchet bounds are free tightening and contain the exact value.
    let fre_lo = add_down(add_down(q1, q2), -1.0).max(0.0);
    let fre_hi = q1.min(q2);
    raw.clamp_to(&Interval::new(fre_lo, fre_hi))
}

/// Encloses ∫₀^{arcsin ρ} exp(E(θ)) dθ (signed).
fn plackett_integral(rho: f64, t1: Interval, t2: Interval, tol: f64) -> Interval {
    let theta = asin_point(rho);
    // Strip covering the arcsin enclosure width: 0 ≤ exp(E) ≤ 1 there.
    let strip = Interval::new(0.0, theta.width().max(0.0));
    let quad = Quadrature::new(t1, t2, tol);
    if rho >= 0.0 {
        quad.integrate(0.0, theta.lo(), true).add(&strip)
    } else {
        quad.integrate(theta.hi(), 0.0, false).add(&strip).neg()
    }
}

struct Quadrature {
    /// (t1-t2)²/2 and (t1+t2)²/2: the singular-term coefficients of the
    /// two cancellation-free splittings of E,
    ///   θ ≥ 0: E = -(t1-t2)²·sec²θ/2 - t1t2/(1+sinθ),
    ///   θ ≤ 0: E = -(t1+t2)²·sec²θ/2 + t1t2/(1-sinθ),
    /// exact because 2t1t2(1∓s)/(2cos²θ) = t1t2/(1±s). Keeping the
    /// sec² coefficient a plain constant avoids the catastrophic series
    /// cancellation of the naive -(t1²+t2²-2t1t2·s)·sec²/2 form near π/2.
    half_d_minus: Ball,
    half_d_plus: Ball,
    b: Ball,
    half_d_minus_iv: Interval,
    half_d_plus_iv: Interval,
    b_iv: Interval,
    tol: f64,
}

impl Quadrature {
    fn new(t1: Interval, t2: Interval, tol: f64) -> Quadrature {
        let half_d_minus_iv = t1.sub(&t2).square().scale(0.5);
        let half_d_plus_iv = t1.add(&t2).square().scale(0.5);
        let b_iv = t1.mul(&t2);
        Quadrature {
            half_d_minus: Ball::from_interval(&half_d_minus_iv),
            half_d_plus: Ball::from_interval(&half_d_plus_iv),
            b: Ball::from_interval(&b_iv),
            half_d_minus_iv,
            half_d_plus_iv,
            b_iv,
            tol,
        }
    }

    /// Rigorous adaptive quadrature of exp(E(θ)) over [a, b], a ≤ b.
    ///
    /// Panel splitting stops at the proportional budget or at the panel's
    /// irreducible width floor (set by the threshold-enclosure widths),
    /// whichever is larger; requests below the floor therefore degrade
    /// gracefully instead of subdividing without profit.
    fn integrate(&self, a: f64, b: f64, positive_branch: bool) -> Interval {
        if b <= a {
            return Interval::ZERO;
        }
        let total_len = b - a;
        let mut work = vec![(a, b)];
        let mut acc = Interval::ZERO;
        let mut panels = 0usize;
        while let Some((x, y)) = work.pop() {
            panels += 1;
            let w = y - x;
            let budget = self.tol * (w / total_len);
            let forced = panels >= MAX_PANELS || w <= 1e-13;
            let (enclosure, floor) = match self.taylor_panel(x, y, positive_branch) {
                Some(pair) => pair,
                // Expansion degenerates only when the panel touches ±π/2.
                None => (self.crude_panel(x, y), 0.0),
            };
            if enclosure.width() <= budget.max(w * floor) || forced {
                acc = acc.add(&enclosure);
            } else {
                let mid = 0.5 * (x + y);
                work.push((x, mid));
                work.push((mid, y));
            }
        }
        acc
    }

    /// Degree-5 Taylor value + degree-6 Lagrange remainder over one panel,
    /// paired with the panel's irreducible width-per-length floor.
    /// `None` when the expansion degenerates (cos² ball straddles zero).
    fn taylor_panel(&self, x: f64, y: f64, positive_branch: bool) -> Option<(Interval, f64)> {
        let c = 0.5 * (x + y);
        let panel = Interval::new(x, y);
        let panel2 = Interval::new(2.0 * x, 2.0 * y);

        let wide = self.integrand_series(
            positive_branch,
            Ball::from_interval(&sin_iv(&panel)),
            Ball::from_interval(&sin_iv(&panel2)),
            Ball::from_interval(&cos_iv(&panel2)),
        )?;
        let tight = self.integrand_series(
            positive_branch,
            Ball::from_interval(&sin_point(c)),
            Ball::from_interval(&sin_point(2.0 * c)),
            Ball::from_interval(&cos_point(2.0 * c)),
        )?;

        // ∫ₓʸ Σ m_k(c) h^k dh with h = θ - c, exactly in ball arithmetic.
        let hx = Ball::exact(x).sub(Ball::exact(c));
        let hy = Ball::exact(y).sub(Ball::exact(c));
        let mut px = hx; // h^(k+1) at the left end
        let mut py = hy;
        let mut val = Ball::ZERO;
        for k in 0..=5 {
            let term = py.sub(px).mul(tight.c[k]).scale(1.0 / (k + 1) as f64);
            val = val.add(term);
            px = px.mul(hx);
            py = py.mul(hy);
        }
        // px, py now hold h^7; remainder m₆(ξ)·∫ h⁶ dh with ∫ h⁶ dh ≥ 0.
        let h6_int = py.sub(px).scale(1.0 / 7.0);
        let rem = wide.c[6].mul(h6_int);
        // The value's width cannot drop below the integrand ball's own
        // radius times the panel width; splitting past that is futile.
        let floor = 4.0 * tight.c[0].r + 4e-16;
        Some((val.add(rem).to_interval(), floor))
    }

    /// Taylor coefficients of exp(E(θ)) from sin θ and sin/cos 2θ seeds,
    /// with cos²θ = (1 + cos 2θ)/2 and the branch-split E above. The
    /// branch is chosen by the panel's sign (panels never straddle 0).
    fn integrand_series(
        &self,
        positive_branch: bool,
        sin0: Ball,
        sin20: Ball,
        cos20: Ball,
    ) -> Option<Taylor> {
        let s = Taylor::derivative_cycle(sin0, cos_from_sin(sin0), 1.0);
        let cos2 = Taylor::derivative_cycle(cos20, sin20.neg(), 2.0);
        let c2 = Taylor::constant(Ball::exact(0.5)).add(&cos2.scale(0.5));
        let sec2 = c2.recip()?;
        let one = Taylor::constant(Ball::exact(1.0));
        let e = if positive_branch {
            let v = one.add(&s).recip()?; // 1/(1+s), constant term ≥ 1
            sec2.scale_ball(self.half_d_minus)
                .add(&v.scale_ball(self.b))
                .neg()
        } else {
            let v = one.sub(&s).recip()?; // 1/(1-s), constant term ≥ 1
            v.scale_ball(self.b)
                .sub(&sec2.scale_ball(self.half_d_plus))
        };
        // exp at the constant term; the true E is ≤ 0, so exp(E) ∈ [0, 1].
        let e0_iv = exp_iv(&e.c[0].to_interval())
            .intersect(&Interval::UNIT)
            .unwrap_or(Interval::UNIT);
        Some(e.exp_with(Ball::from_interval(&e0_iv)))
    }

    /// Zero-order enclosure w · range(exp E over [x, y]); works arbitrarily
    /// close to (and at) θ = ±π/2 because the singular factor appears only
    /// in exp(-d/(2cos²θ)) with a constant nonnegative d.
    fn crude_panel(&self, x: f64, y: f64) -> Interval {
        let panel = Interval::new(x, y);
        let s = sin_iv(&panel);
        let c2 = cos_iv(&panel).square();
        let positive_branch = x >= 0.0;
        let (d, linear) = if positive_branch {
            // exp(-B/(1+s)) with 1+s ≥ 1 on this branch.
            let v = Interval::ONE
                .div(&Interval::ONE.add(&s))
                .expect("1+s >= 1 on nonnegative panels");
            (self.half_d_minus_iv, self.b_iv.mul(&v).neg())
        } else {
            let v = Interval::ONE
                .div(&Interval::ONE.sub(&s))
                .expect("1-s >= 1 on nonpositive panels");
            (self.half_d_plus_iv, self.b_iv.mul(&v))
        };
        let singular = exp_neg_ratio(&d.max(&Interval::ZERO), &c2);
        let smooth = exp_iv(&linear);
        let m = singular.mul(&smooth);
        Interval::point(y)
            .sub(&Interval::point(x))
            .mul(&m.clamp_to(&Interval::UNIT))
    }
}

/// cos θ₀ as a ball from sin θ₀ via cos = √(1 - sin²); only nonnegative
/// cosines occur because every θ handled here lies in [-π/2, π/2].
fn cos_from_sin(sin0: Ball) -> Ball {
    let s = sin0.to_interval().clamp_to(&Interval::SYM_UNIT);
    let c = Interval::ONE
        .sub(&s.square())
        .max(&Interval::ZERO)
        .sqrt()
        .expect("nonnegative");
    Ball::from_interval(&c)
}

/// Enclosure of exp(-n/d) for n ⊆ [0, ∞), d ⊆ [0, ∞), with the limit
/// conventions x/0⁺ = +∞ (n > 0) and 0/0 resolved to the full range.
fn exp_neg_ratio(n: &Interval, d: &Interval) -> Interval {
    debug_assert!(n.lo() >= 0.0 && d.lo() >= 0.0);
    let lo = if d.lo() == 0.0 {
        0.0
    } else {
        let ratio = div_up(n.hi(), d.lo());
        exp_point(-ratio).lo()
    };
    let hi = if n.lo() == 0.0 {
        1.0
    } else if d.hi() == 0.0 {
        0.0f64.max(lo)
    } else {
        let ratio = div_down(n.lo(), d.hi());
        exp_point(-ratio).hi().min(1.0)
    };
    Interval::new(lo.min(hi), hi.max(lo))
}

/// Corner-monotone interval extension: Γ is nondecreasing in q1, q2 and in
/// ρ̃ (the θ-integrand is nonnegative), so interval arguments reduce to two
/// point evaluations.
pub(crate) fn gamma_corners(rho: Interval, q1: Interval, q2: Interval, tol: f64) -> Interval {
    let rho = rho.clamp_to(&Interval::SYM_UNIT);
    let q1 = q1.clamp_to(&Interval::UNIT);
    let q2 = q2.clamp_to(&Interval::UNIT);
    if rho.is_point() && q1.is_point() && q2.is_point() {
        return gamma_point(rho.lo(), q1.lo(), q2.lo(), tol);
    }
    let lo = gamma_point(rho.lo(), q1.lo(), q2.lo(), tol).lo();
    let hi = gamma_point(rho.hi(), q1.hi(), q2.hi(), tol).hi();
    Interval::new(lo, hi.max(lo))
}

/// Λ_ρ̃(r1, r2) = 2Γ_ρ̃((1-r1)/2, (1-r2)/2) + (r1+r2)/2, intersected with
/// [0, 1]. Interval r's are handled through the Γ corner extension plus
/// exact interval arithmetic on the linear term.
pub(crate) fn lambda_iv(rho: Interval, r1: Interval, r2: Interval, tol: f64) -> Interval {
    let q1 = Interval::ONE.sub(&r1).scale(0.5).clamp_to(&Interval::UNIT);
    let q2 = Interval::ONE.sub(&r2).scale(0.5).clamp_to(&Interval::UNIT);
    let gam = gamma_corners(rho, q1, q2, tol);
    let linear = r1.add(&r2).scale(0.5);
    gam.scale(2.0).add(&linear).clamp_to(&Interval::UNIT)
}

/// Certified upper bound of Λ over interval arguments from a single Γ
/// corner evaluation; the prover's accept test needs only this endpoint.
pub(crate) fn lambda_hi(rho: Interval, r1: Interval, r2: Interval, tol: f64) -> f64 {
    let q1_hi = Interval::ONE.sub(&r1).scale(0.5).hi().clamp(0.0, 1.0);
    let q2_hi = Interval::ONE.sub(&r2).scale(0.5).hi().clamp(0.0, 1.0);
    let rho_hi = rho.hi().clamp(-1.0, 1.0);
    let g = gamma_point(rho_hi, q1_hi, q2_hi, tol).hi();
    let linear = r1.add(&r2).scale(0.5).hi();
    (2.0 * g + linear).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::super::fast;
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn independence_case() {
        let g = gamma_point(0.0, 0.5, 0.5, 1e-12);
        assert!(g.contains(0.25), "{g:?}");
        assert!(g.width() < 1e-12);
    }

    #[test]
    fn quadrant_closed_form_across_rho() {
        // Γ(ρ, 1/2, 1/2) = 1/4 + arcsin(ρ)/(2π).
        for &rho in &[-0.999, -0.7, -0.25, 0.1, 0.5, 0.93, 0.9999] {
            let exact = 0.25 + f64::asin(rho) / (2.0 * std::f64::consts::PI);
            let g = gamma_point(rho, 0.5, 0.5, 1e-12);
            assert!(g.contains(exact), "rho = {rho}: {g:?} vs {exact}");
            assert!(g.width() < 5e-12, "rho = {rho}: width {}", g.width());
        }
        let third = gamma_point(0.5, 0.5, 0.5, 1e-13);
        assert!(third.contains(1.0 / 3.0));
    }

    #[test]
    fn degenerate_correlations() {
        assert!(gamma_point(1.0, 0.3, 0.3, 1e-12).contains(0.3));
        assert!(gamma_point(-1.0, 0.5, 0.5, 1e-12).contains(0.0));
        assert!(gamma_point(-1.0, 0.7, 0.8, 1e-12).contains(0.5));
    }

    #[test]
    fn agrees_with_fast_evaluator() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..300 {
            let rho = rng.gen_range(-0.995..0.995);
            let q1 = rng.gen_range(0.01..0.99);
            let q2 = rng.gen_range(0.01..0.99);
            let enc = gamma_point(rho, q1, q2, 1e-12);
            let fast_v = fast::gamma(rho, q1, q2);
            assert!(
                enc.lo() - 1e-12 <= fast_v && fast_v <= enc.hi() + 1e-12,
                "({rho}, {q1}, {q2}): {enc:?} vs {fast_v}"
            );
            assert!(
                enc.width() < 1e-10,
                "width {} at ({rho},{q1},{q2})",
                enc.width()
            );
        }
    }

    #[test]
    fn near_singular_correlation_still_encloses() {
        for &rho in &[0.999999, 0.999_999_999, -0.999999] {
            let g = gamma_point(rho, 0.4, 0.45, 1e-10);
            let f = fast::gamma(rho, 0.4, 0.45);
            assert!(
                g.lo() <= f + 1e-9 && f - 1e-9 <= g.hi(),
                "rho={rho} {g:?} vs {f}"
            );
        }
    }

    #[test]
    fn corner_extension_contains_sampled_values() {
        let rho = Interval::new(-0.3, 0.4);
        let q1 = Interval::new(0.2, 0.5);
        let q2 = Interval::new(0.55, 0.8);
        let wide = gamma_corners(rho, q1, q2, 1e-10);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let v = fast::gamma(
                rng.gen_range(rho.lo()..rho.hi()),
                rng.gen_range(q1.lo()..q1.hi()),
                rng.gen_range(q2.lo()..q2.hi()),
            );
            assert!(wide.lo() - 1e-12 <= v && v <= wide.hi() + 1e-12);
        }
    }

    #[test]
    fn lambda_matches_closed_forms() {
        let l = lambda_iv(
            Interval::point(1.0),
            Interval::point(0.4),
            Interval::point(-0.2),
            1e-12,
        );
        assert!(l.contains(0.7));
        let l = lambda_iv(
            Interval::point(-1.0),
            Interval::point(0.4),
            Interval::point(-0.2),
            1e-12,
        );
        assert!(l.contains(0.1));
        let l = lambda_iv(Interval::point(0.0), Interval::ZERO, Interval::ZERO, 1e-12);
        assert!(l.contains(0.5));
    }

    #[test]
    fn lambda_hi_dominates_sampled_lambda() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let rl = rng.gen_range(-0.9..0.8);
            let rho = Interval::new(rl, rl + 0.1);
            let a = rng.gen_range(-0.9..0.8);
            let r1 = Interval::new(a, a + 0.05);
            let b = rng.gen_range(-0.9..0.8);
            let r2 = Interval::new(b, b + 0.05);
            let hi = lambda_hi(rho, r1, r2, 1e-10);
            let full = lambda_iv(rho, r1, r2, 1e-10);
            assert!(hi >= full.hi() - 1e-12);
            for _ in 0..20 {
                let v = fast::lambda(
                    rng.gen_range(rho.lo()..rho.hi()),
                    rng.gen_range(r1.lo()..r1.hi()),
                    rng.gen_range(r2.lo()..r2.hi()),
                );
                assert!(v <= hi + 1e-9);
            }
        }
    }
}
