//! The configuration polytope: triples (μ₁, μ₂, ρ) of pairwise inner
//! products satisfying the four triangle inequalities, its smooth
//! restriction, the projection correlation ρ̃, and the subdivision-cube
//! geometry used by the prover.

use crate::interval::{Interval, IntervalError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    /// An interval μ strictly contains ±1 in strict mode, so the ρ̃
    /// denominator cannot be bounded away from zero.
    #[error("tilde_rho denominator degenerates: mu interval contains ±1")]
    DegenerateDenominator,
}

/// A point (μ₁, μ₂, ρ) in [-1, 1]³.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub mu1: f64,
    pub mu2: f64,
    pub rho: f64,
}

impl Configuration {
    pub fn new(mu1: f64, mu2: f64, rho: f64) -> Configuration {
        Configuration { mu1, mu2, rho }
    }

    /// All four triangle inequalities: ±μ₁ ±μ₂ ±ρ ≥ -1 with an even number
    /// of minus signs on the pair (μ₁μ₂ vs ρ).
    pub fn is_configuration(&self) -> bool {
        let (m1, m2, r) = (self.mu1, self.mu2, self.rho);
        let in_box = (-1.0..=1.0).contains(&m1)
            && (-1.0..=1.0).contains(&m2)
            && (-1.0..=1.0).contains(&r);
        in_box
            && m1 + m2 + r >= -1.0
            && m1 - m2 - r >= -1.0
            && -m1 + m2 - r >= -1.0
            && -m1 - m2 + r >= -1.0
    }

    /// Membership in the smooth restriction: additionally every coordinate
    /// is at most 1-δ in absolute value.
    pub fn is_smooth(&self, p: SmoothParams) -> bool {
        let b = 1.0 - p.delta;
        self.is_configuration()
            && self.mu1.abs() <= b
            && self.mu2.abs() <= b
            && self.rho.abs() <= b
    }

    /// ρ̃ = (ρ - μ₁μ₂)/√((1-μ₁²)(1-μ₂²)), clamped to [-1, 1]; by the
    /// boundary convention ρ̃ = 0 when either μ is ±1.
    pub fn tilde_rho(&self) -> f64 {
        if self.mu1.abs() >= 1.0 || self.mu2.abs() >= 1.0 {
            return 0.0;
        }
        let den = ((1.0 - self.mu1 * self.mu1) * (1.0 - self.mu2 * self.mu2)).sqrt();
        ((self.rho - self.mu1 * self.mu2) / den).clamp(-1.0, 1.0)
    }
}

/// The smoothing margin δ defining Conf ∩ [-1+δ, 1-δ]³.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothParams {
    pub delta: f64,
}

impl SmoothParams {
    pub fn new(delta: f64) -> SmoothParams {
        assert!(delta > 0.0 && delta < 1.0, "delta must be in (0,1)");
        SmoothParams { delta }
    }
}

/// An axis-aligned box in configuration space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConfigCube {
    pub mu1: Interval,
    pub mu2: Interval,
    pub rho: Interval,
}

/// Where a cube sits relative to the smooth configuration polytope.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CubeClass {
    /// Certified: no point of the cube is a smooth configuration.
    Outside,
    /// Certified: every point of the cube is a smooth configuration.
    Inside,
    /// Neither certificate holds.
    Straddling,
}

impl ConfigCube {
    pub fn new(mu1: Interval, mu2: Interval, rho: Interval) -> ConfigCube {
        ConfigCube { mu1, mu2, rho }
    }

    /// The root of the subdivision: [-1, 1]³.
    pub fn root() -> ConfigCube {
        ConfigCube::new(Interval::SYM_UNIT, Interval::SYM_UNIT, Interval::SYM_UNIT)
    }

    pub fn midpoint(&self) -> Configuration {
        Configuration::new(self.mu1.mid(), self.mu2.mid(), self.rho.mid())
    }

    pub fn max_edge(&self) -> f64 {
        self.mu1
            .width()
            .max(self.mu2.width())
            .max(self.rho.width())
    }

    pub fn contains(&self, c: &Configuration) -> bool {
        self.mu1.contains(c.mu1) && self.mu2.contains(c.mu2) && self.rho.contains(c.rho)
    }

    /// Sound enclosure of ρ̃ over the cube, intersected with [-1, 1]. When
    /// a μ interval reaches ±1 the denominator can vanish; the enclosure
    /// then falls back to [-1, 1] unless `strict`, which turns it into an
    /// error.
    pub fn tilde_rho(&self, strict: bool) -> Result<Interval, ConfigError> {
        let num = self.rho.sub(&self.mu1.mul(&self.mu2));
        let d1 = Interval::ONE.sub(&self.mu1.square()).max(&Interval::ZERO);
        let d2 = Interval::ONE.sub(&self.mu2.square()).max(&Interval::ZERO);
        let den = match d1.mul(&d2).sqrt() {
            Ok(d) => d,
            Err(IntervalError::NegativeSqrt) => unreachable!("clamped nonnegative"),
            Err(_) => return Err(ConfigError::DegenerateDenominator),
        };
        match num.div(&den) {
            // A quotient entirely beyond ±1 means no point of the cube is
            // a configuration; snap to the nearest endpoint (vacuous but
            // well-formed for downstream Λ evaluation).
            Ok(q) => Ok(q.intersect(&Interval::SYM_UNIT).unwrap_or_else(|| {
                if q.lo() > 1.0 {
                    Interval::point(1.0)
                } else {
                    Interval::point(-1.0)
                }
            })),
            Err(IntervalError::DivisionByZeroInterval) => {
                if strict {
                    Err(ConfigError::DegenerateDenominator)
                } else {
                    Ok(Interval::SYM_UNIT)
                }
            }
            Err(_) => unreachable!(),
        }
    }

    /// Enclosure of ρ̃ over cube ∩ Conf, as the intersection of several
    /// individually sound bounds chosen so that no region of the polytope
    /// leaves the enclosure degenerate:
    ///
    /// 1. the raw factored quotient (good in the interior);
    /// 2. the (p, q)-form (ρ-p)/√((1-p)²-q²) with p = μ₁μ₂, q = μ₁-μ₂
    ///    (exact identity for the denominator), whose upper end is
    ///    computed by endpoint analysis in A = 1-p: the derivative in A
    ///    changes sign at most once (an interior minimum), so the
    ///    supremum sits at an A/C endpoint combination — this stays sharp
    ///    on the diagonal μ₁ ≈ μ₂ where ρ̃ → 1 as ρ → 1;
    /// 3. the triangle-inequality bounds: substituting ρ = 1 - |μ₁-μ₂|
    ///    factors the quotient into √((1-μ₁)(1+μ₂)/((1+μ₁)(1-μ₂))) (and
    ///    mirrors), sharp near the |μ| = 1 faces.
    pub fn tilde_rho_conf(&self) -> Interval {
        let raw = self.tilde_rho(false).expect("non-strict mode is total");

        // (p, q)-form, plain interval evaluation.
        let p = self.mu1.mul(&self.mu2);
        let q2 = self.mu1.sub(&self.mu2).square();
        let a = Interval::ONE.sub(&p);
        let num = self.rho.sub(&p);
        let den2 = a.square().sub(&q2).max(&Interval::ZERO);
        let pq = match den2.sqrt().ok().filter(|d| d.lo() > 0.0) {
            Some(den) => {
                let quot = num.div(&den).expect("positive denominator");
                quot.intersect(&Interval::SYM_UNIT).unwrap_or_else(|| {
                    if quot.lo() > 1.0 {
                        Interval::point(1.0)
                    } else {
                        Interval::point(-1.0)
                    }
                })
            }
            None => Interval::SYM_UNIT,
        };

        // Sharp upper end of the (p, q)-form: f(A, B, C) = (A-B)/√(A²-C)
        // with B = 1-ρ is decreasing in B, monotone in C with the sign of
        // A-B, and has at most an interior minimum in A, so its supremum
        // over the box is attained at endpoint combinations.
        let b_lo = Interval::ONE.sub(&self.rho).lo().max(0.0);
        let mut pq_hi = -1.0f64;
        for av in [a.lo(), a.hi()] {
            for cv in [q2.lo(), q2.hi()] {
                let den2 = Interval::point(av)
                    .square()
                    .sub(&Interval::point(cv));
                if den2.lo() <= 0.0 {
                    if av > b_lo {
                        pq_hi = 1.0;
                    }
                    continue;
                }
                let den = den2.sqrt().expect("positive").lo();
                let f = crate::interval::div_up(av - b_lo, den);
                pq_hi = pq_hi.max(f.min(1.0));
            }
        }

        // Triangle-derived face bounds: sup over the cube of
        // (1-a)(1+b)/((1+a)(1-b)), monotone ↓ in a and ↑ in b.
        fn face(a: f64, b: f64) -> f64 {
            let num = Interval::ONE
                .sub(&Interval::point(a))
                .mul(&Interval::ONE.add(&Interval::point(b)));
            let den = Interval::ONE
                .add(&Interval::point(a))
                .mul(&Interval::ONE.sub(&Interval::point(b)));
            if den.lo() <= 0.0 {
                return f64::INFINITY;
            }
            match num.max(&Interval::ZERO).div(&den) {
                Ok(r) => r.sqrt().map_or(f64::INFINITY, |s| s.hi()),
                Err(_) => f64::INFINITY,
            }
        }
        let (m1, m2) = (&self.mu1, &self.mu2);
        let face_hi = face(m1.lo(), m2.hi()).min(face(m2.lo(), m1.hi()));
        // Lower bounds come from ρ ≥ -1 + |μ₁+μ₂|; negating a μ reuses
        // the same factorization.
        let face_lo = -face(m1.lo(), -m2.lo()).min(face(-m1.hi(), m2.hi()));

        let hi = raw
            .hi()
            .min(pq.hi())
            .min(pq_hi)
            .min(face_hi)
            .clamp(-1.0, 1.0);
        let lo = raw
            .lo()
            .max(pq.lo())
            .max(face_lo)
            .clamp(-1.0, 1.0);
        if lo <= hi {
            Interval::new(lo, hi)
        } else {
            // Possible only when cube ∩ Conf is empty but classification
            // was conservative; any nonempty enclosure is then vacuous.
            Interval::point(hi.max(-1.0))
        }
    }

    /// Classify against Conf_δ by interval evaluation of the four linear
    /// forms and the box bounds. Conservative: boundary-grazing cubes come
    /// back `Straddling`, which the prover treats by the sound superset
    /// policy.
    pub fn classify(&self, p: SmoothParams) -> CubeClass {
        let b = 1.0 - p.delta;
        let box_bound = Interval::new(-b, b);

        // Box part of Conf_δ.
        let coords = [&self.mu1, &self.mu2, &self.rho];
        let mut inside = true;
        for c in coords {
            if c.lo() > b || c.hi() < -b {
                return CubeClass::Outside;
            }
            inside &= box_bound.contains_interval(c);
        }

        // Triangle forms: each must be ≥ -1 somewhere (else Outside) and
        // everywhere (for Inside).
        let forms = [
            self.mu1.add(&self.mu2).add(&self.rho),
            self.mu1.sub(&self.mu2).sub(&self.rho),
            self.mu2.sub(&self.mu1).sub(&self.rho),
            self.rho.sub(&self.mu1).sub(&self.mu2),
        ];
        for f in &forms {
            if f.hi() < -1.0 {
                return CubeClass::Outside;
            }
            inside &= f.lo() >= -1.0;
        }
        if inside {
            CubeClass::Inside
        } else {
            CubeClass::Straddling
        }
    }

    /// Intersection with the smooth box [-1+δ, 1-δ]³; `None` when empty.
    /// Minimizing over the result is sound for bounding over cube ∩ Conf_δ
    /// (it is a superset of that set's box hull).
    pub fn intersect_smooth_box(&self, p: SmoothParams) -> Option<ConfigCube> {
        let b = 1.0 - p.delta;
        let bounds = Interval::new(-b, b);
        Some(ConfigCube::new(
            self.mu1.intersect(&bounds)?,
            self.mu2.intersect(&bounds)?,
            self.rho.intersect(&bounds)?,
        ))
    }

    /// Midpoint bisection in every coordinate of positive width: 8, 4, 2
    /// or 1 children whose union is the parent.
    pub fn split(&self) -> Vec<ConfigCube> {
        fn halves(iv: &Interval) -> Vec<Interval> {
            if iv.width() == 0.0 {
                vec![*iv]
            } else {
                let m = iv.mid();
                vec![Interval::new(iv.lo(), m), Interval::new(m, iv.hi())]
            }
        }
        let mut out = Vec::with_capacity(8);
        for m1 in halves(&self.mu1) {
            for m2 in halves(&self.mu2) {
                for r in halves(&self.rho) {
                    out.push(ConfigCube::new(m1, m2, r));
                }
            }
        }
        out
    }
}

/// The worst configuration of the linear-bias family away from the
/// integral corner (the paper's φ₁).
pub const PHI_1: Configuration = Configuration {
    mu1: 0.176945,
    mu2: 0.176945,
    rho: -0.646110,
};

/// The integral worst configuration (the paper's φ₂).
pub const PHI_2: Configuration = Configuration {
    mu1: 1.0,
    mu2: -1.0,
    rho: -1.0,
};

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_config(rng: &mut impl Rng) -> Configuration {
        // Rejection sampling inside Conf.
        loop {
            let c = Configuration::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            if c.is_configuration() {
                return c;
            }
        }
    }

    #[test]
    fn membership_examples() {
        assert!(PHI_1.is_configuration());
        assert!(PHI_2.is_configuration());
        assert!(!Configuration::new(0.5, 0.5, -1.0).is_configuration());
    }

    #[test]
    fn smoothness_examples() {
        let p = SmoothParams::new(1e-5);
        assert!(!PHI_2.is_smooth(p));
        assert!(Configuration::new(0.0, 0.0, 0.0).is_smooth(p));
        // Closed constraint: exactly 1-δ is still smooth.
        assert!(Configuration::new(1.0 - 1e-5, 0.0, 0.0).is_smooth(p));
        assert!(!Configuration::new(1.0 - 0.9e-5, 0.0, 0.0).is_smooth(p));
    }

    #[test]
    fn tilde_rho_values() {
        assert_eq!(PHI_2.tilde_rho(), 0.0);
        let c = Configuration::new(0.0, 0.0, 0.37);
        assert_eq!(c.tilde_rho(), 0.37);
        // Direct formula evaluation at φ₁ (cross-checked below at higher
        // precision via exact rationals in the quotient).
        let tr = PHI_1.tilde_rho();
        let num = PHI_1.rho - PHI_1.mu1 * PHI_1.mu2;
        let den = ((1.0 - PHI_1.mu1 * PHI_1.mu1) * (1.0 - PHI_1.mu2 * PHI_1.mu2)).sqrt();
        assert!((tr - num / den).abs() < 1e-15);
        assert!(
            (tr - -0.699_314_751_326_527_5).abs() < 1e-9,
            "tilde_rho(phi1) = {tr}"
        );
    }

    #[test]
    fn tilde_rho_stays_in_unit_interval_on_conf() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100_000 {
            let c = rand_config(&mut rng);
            let tr = c.tilde_rho();
            assert!((-1.0..=1.0).contains(&tr), "{c:?} -> {tr}");
            // The clamp never hides more than denominator rounding slack.
            if c.mu1.abs() < 0.999 && c.mu2.abs() < 0.999 {
                let num = c.rho - c.mu1 * c.mu2;
                let den =
                    ((1.0 - c.mu1 * c.mu1) * (1.0 - c.mu2 * c.mu2)).sqrt();
                assert!((num / den).abs() <= 1.0 + 1e-9);
            }
        }
    }

    #[test]
    fn conf_symmetry_under_mu_negation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let c = rand_config(&mut rng);
            let m = Configuration::new(-c.mu1, -c.mu2, c.rho);
            assert!(m.is_configuration());
            assert!((m.tilde_rho() - c.tilde_rho()).abs() < 1e-14);
        }
    }

    #[test]
    fn cube_tilde_rho_encloses_point_values() {
        let cube = ConfigCube::new(
            Interval::new(0.1, 0.2),
            Interval::new(-0.5, -0.4),
            Interval::new(-0.3, -0.2),
        );
        let enc = cube.tilde_rho(false).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let c = Configuration::new(
                rng.gen_range(0.1..0.2),
                rng.gen_range(-0.5..-0.4),
                rng.gen_range(-0.3..-0.2),
            );
            assert!(enc.contains(c.tilde_rho()));
        }
        // Strict mode rejects a μ interval through ±1.
        let bad = ConfigCube::new(
            Interval::new(0.95, 1.0),
            Interval::new(-0.5, -0.4),
            Interval::new(-0.6, -0.5),
        );
        assert_eq!(
            bad.tilde_rho(true),
            Err(ConfigError::DegenerateDenominator)
        );
        assert_eq!(bad.tilde_rho(false).unwrap(), Interval::SYM_UNIT);
    }

    #[test]
    fn classify_examples() {
        let p = SmoothParams::new(1e-5);
        // mu1+mu2+rho < -1 everywhere.
        let outside = ConfigCube::new(
            Interval::new(0.4, 0.5),
            Interval::new(-0.8, -0.7),
            Interval::new(-1.0, -0.99),
        );
        assert_eq!(outside.classify(p), CubeClass::Outside);

        let inside = ConfigCube::new(
            Interval::new(-0.1, 0.1),
            Interval::new(-0.1, 0.1),
            Interval::new(-0.1, 0.1),
        );
        assert_eq!(inside.classify(p), CubeClass::Inside);

        let straddling = ConfigCube::new(
            Interval::new(0.9, 1.0),
            Interval::new(-1.0, -0.9),
            Interval::new(-1.0, -0.9),
        );
        assert_eq!(straddling.classify(p), CubeClass::Straddling);
    }

    #[test]
    fn classify_is_sound_by_sampling() {
        let p = SmoothParams::new(1e-3);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..2000 {
            let lo1 = rng.gen_range(-1.0..0.8);
            let lo2 = rng.gen_range(-1.0..0.8);
            let lo3 = rng.gen_range(-1.0..0.8);
            let w = rng.gen_range(0.01..0.2);
            let cube = ConfigCube::new(
                Interval::new(lo1, (lo1 + w).min(1.0)),
                Interval::new(lo2, (lo2 + w).min(1.0)),
                Interval::new(lo3, (lo3 + w).min(1.0)),
            );
            let class = cube.classify(p);
            for _ in 0..50 {
                let c = Configuration::new(
                    rng.gen_range(cube.mu1.lo()..=cube.mu1.hi()),
                    rng.gen_range(cube.mu2.lo()..=cube.mu2.hi()),
                    rng.gen_range(cube.rho.lo()..=cube.rho.hi()),
                );
                match class {
                    CubeClass::Outside => assert!(!c.is_smooth(p), "{cube:?} {c:?}"),
                    CubeClass::Inside => assert!(c.is_smooth(p), "{cube:?} {c:?}"),
                    CubeClass::Straddling => {}
                }
            }
        }
    }

    #[test]
    fn split_geometry() {
        let root = ConfigCube::root();
        let children = root.split();
        assert_eq!(children.len(), 8);
        for ch in &children {
            assert_eq!(ch.max_edge(), 1.0);
        }
        // Zero-width coordinate is not split.
        let slab = ConfigCube::new(
            Interval::point(0.3),
            Interval::new(0.0, 1.0),
            Interval::new(0.0, 1.0),
        );
        assert_eq!(slab.split().len(), 4);
        let point = ConfigCube::new(
            Interval::point(0.3),
            Interval::point(0.1),
            Interval::point(-0.2),
        );
        assert_eq!(point.split().len(), 1);
    }
}
