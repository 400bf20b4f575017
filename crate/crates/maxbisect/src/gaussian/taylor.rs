//! Degree-6 Taylor-coefficient arithmetic over midpoint-radius balls.
//!
//! The recurrences (Leibniz product, reciprocal, exponential) compute the
//! exact Taylor *coefficient functions* of composite expressions; seeded
//! with a ball enclosing a whole panel they enclose every coefficient
//! value over that panel, which is what the quadrature needs for its
//! Lagrange remainder. Ball arithmetic is used instead of endpoint
//! intervals because this is the innermost loop of every certified Γ
//! evaluation.
//!
//! Soundness of the radius updates: every radius formula is a sum of
//! nonnegative products, so evaluating it in rounded f64 arithmetic errs
//! by at most a handful of ulps, covered by the `SLOP` multiplier; the
//! midpoint's own rounding error is covered by the `EPS_M * |m|` term
//! (eps/2 would suffice); `EPS_ABS` floors the radius above underflow
//! artifacts.

use crate::interval::{add_down, add_up, Interval};

pub(crate) const DEG: usize = 6;

const SLOP: f64 = 1.0 + 1e-12;
const EPS_M: f64 = 2.3e-16;
const EPS_ABS: f64 = 1e-290;

/// A ball `[m - r, m + r]`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Ball {
    pub m: f64,
    pub r: f64,
}

#[inline]
fn pad(m: f64, raw_r: f64) -> f64 {
    (raw_r + EPS_M * m.abs()) * SLOP + EPS_ABS
}

impl Ball {
    pub const ZERO: Ball = Ball { m: 0.0, r: 0.0 };

    #[inline]
    pub fn exact(x: f64) -> Ball {
        Ball { m: x, r: 0.0 }
    }

    pub fn from_interval(iv: &Interval) -> Ball {
        let m = iv.mid();
        let r = add_up(iv.hi(), -m).max(add_up(m, -iv.lo())).max(0.0);
        Ball { m, r }
    }

    pub fn to_interval(self) -> Interval {
        Interval::new(add_down(self.m, -self.r), add_up(self.m, self.r))
    }

    #[inline]
    pub fn add(self, rhs: Ball) -> Ball {
        let m = self.m + rhs.m;
        Ball {
            m,
            r: pad(m, self.r + rhs.r),
        }
    }

    #[inline]
    pub fn sub(self, rhs: Ball) -> Ball {
        let m = self.m - rhs.m;
        Ball {
            m,
            r: pad(m, self.r + rhs.r),
        }
    }

    #[inline]
    pub fn neg(self) -> Ball {
        Ball {
            m: -self.m,
            r: self.r,
        }
    }

    #[inline]
    pub fn mul(self, rhs: Ball) -> Ball {
        let m = self.m * rhs.m;
        let raw = self.m.abs() * rhs.r + self.r * (rhs.m.abs() + rhs.r);
        Ball { m, r: pad(m, raw) }
    }

    #[inline]
    pub fn scale(self, k: f64) -> Ball {
        let m = self.m * k;
        Ball {
            m,
            r: pad(m, self.r * k.abs()),
        }
    }

    #[inline]
    pub fn mag(self) -> f64 {
        self.m.abs() + self.r
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Taylor {
    pub c: [Ball; DEG + 1],
}

impl Taylor {
    pub fn constant(v: Ball) -> Taylor {
        let mut c = [Ball::ZERO; DEG + 1];
        c[0] = v;
        Taylor { c }
    }

    /// Series of f(θ₀ + ωh) in h, where f cycles f → g → -f → -g under
    /// differentiation (sin/cos pairs): coefficient k is ω^k·cycle_k / k!.
    pub fn derivative_cycle(f0: Ball, g0: Ball, omega: f64) -> Taylor {
        let cycle = [f0, g0, f0.neg(), g0.neg()];
        const INV_FACT: [f64; DEG + 1] =
            [1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0, 1.0 / 120.0, 1.0 / 720.0];
        let mut c = [Ball::ZERO; DEG + 1];
        let mut pow = 1.0f64;
        for (k, slot) in c.iter_mut().enumerate() {
            // 1/k! is inexact for k ≥ 3; absorb its one-ulp error. ω^k is
            // exact for the ω ∈ {1, 2} used here.
            let approx = cycle[k % 4].scale(INV_FACT[k] * pow);
            *slot = Ball {
                m: approx.m,
                r: pad(approx.m, approx.r + 2.0 * EPS_M * approx.m.abs()),
            };
            pow *= omega;
        }
        Taylor { c }
    }

    pub fn add(&self, rhs: &Taylor) -> Taylor {
        let mut c = [Ball::ZERO; DEG + 1];
        for k in 0..=DEG {
            c[k] = self.c[k].add(rhs.c[k]);
        }
        Taylor { c }
    }

    pub fn sub(&self, rhs: &Taylor) -> Taylor {
        let mut c = [Ball::ZERO; DEG + 1];
        for k in 0..=DEG {
            c[k] = self.c[k].sub(rhs.c[k]);
        }
        Taylor { c }
    }

    pub fn neg(&self) -> Taylor {
        let mut c = [Ball::ZERO; DEG + 1];
        for (i, slot) in c.iter_mut().enumerate() {
            *slot = self.c[i].neg();
        }
        Taylor { c }
    }

    pub fn scale(&self, k: f64) -> Taylor {
        let mut c = [Ball::ZERO; DEG + 1];
        for (i, slot) in c.iter_mut().enumerate() {
            *slot = self.c[i].scale(k);
        }
        Taylor { c }
    }

    pub fn scale_ball(&self, b: Ball) -> Taylor {
        let mut c = [Ball::ZERO; DEG + 1];
        for (i, slot) in c.iter_mut().enumerate() {
            *slot = self.c[i].mul(b);
        }
        Taylor { c }
    }

    pub fn mul(&self, rhs: &Taylor) -> Taylor {
        let mut c = [Ball::ZERO; DEG + 1];
        for k in 0..=DEG {
            let mut m_acc = 0.0f64;
            let mut abs_acc = 0.0f64;
            let mut r_acc = 0.0f64;
            for i in 0..=k {
                let (a, b) = (self.c[i], rhs.c[k - i]);
                let p = a.m * b.m;
                m_acc += p;
                abs_acc += p.abs();
                r_acc += a.m.abs() * b.r + a.r * (b.m.abs() + b.r);
            }
            // γ_k-style bound on the dot-product rounding, proportional to
            // the sum of |products| (cancellation-safe).
            let extra = (k as f64 + 2.0) * EPS_M * abs_acc;
            c[k] = Ball {
                m: m_acc,
                r: pad(m_acc, r_acc + extra),
            };
        }
        Taylor { c }
    }

    /// Coefficients of 1/self; requires the constant ball to exclude zero.
    pub fn recip(&self) -> Option<Taylor> {
        let d0 = self.c[0];
        if d0.m.abs() <= d0.r {
            return None;
        }
        let u0 = Ball::from_interval(
            &Interval::ONE
                .div(&d0.to_interval())
                .expect("constant term excludes zero"),
        );
        let mut c = [Ball::ZERO; DEG + 1];
        c[0] = u0;
        for k in 1..=DEG {
            let mut acc = Ball::ZERO;
            for j in 1..=k {
                acc = acc.add(self.c[j].mul(c[k - j]));
            }
            c[k] = acc.mul(u0).neg();
        }
        Some(Taylor { c })
    }

    /// Coefficients of exp(self), given an enclosure of exp at the
    /// constant term.
    pub fn exp_with(&self, exp_c0: Ball) -> Taylor {
        let mut c = [Ball::ZERO; DEG + 1];
        c[0] = exp_c0;
        for k in 1..=DEG {
            let mut acc = Ball::ZERO;
            for j in 1..=k {
                acc = acc.add(self.c[j].scale(j as f64).mul(c[k - j]));
            }
            c[k] = acc.scale(1.0 / k as f64);
        }
        Taylor { c }
    }
}
