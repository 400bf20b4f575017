//! The computer-assisted proof engine: recursive subdivision of [-1, 1]³
//! with certified interval bounds on the ratio α, establishing a global
//! lower bound over the smooth configuration polytope and emitting a
//! machine-checkable certificate.
//!
//! Each cube is resolved into one of four cases: entirely outside the
//! smooth polytope; certified lower bound above the target; a valid
//! midpoint whose certified upper bound falls below the target (a failure
//! witness disproving the target); or inconclusive, in which case the
//! cube splits into eight children. Counters merge commutatively, so a
//! run that completes without failures is deterministic for any worker
//! count. A run that finds a failure aborts eagerly; its counts then
//! depend on scheduling, but its (sorted) witness list is always
//! nonempty, which is what the outcome means.

use crate::config::{ConfigCube, CubeClass, SmoothParams};
use crate::gaussian;
use crate::interval::{add_down, add_up, div_down, mul_down, mul_up, Interval};
use crate::pipeline::Mode;
use crate::rounding::{self, BoostFunction};
use serde::{Deserialize, Serialize};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Mutex;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ProverError {
    #[error("certificate produced by {found}, this binary is {expected}")]
    MismatchedVersion { found: String, expected: String },
    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),
}

/// Rounding-family parameters the bound is proven for.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProverParams {
    pub mode: Mode,
    pub cparam: f64,
    pub boost: Option<BoostFunction>,
    /// Smoothing margin δ of the configuration domain.
    pub delta: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub target: f64,
    pub max_depth: u32,
    pub workers: usize,
    /// Record accepted leaves for replay when the run is small enough.
    pub record_leaves: bool,
}

impl VerifyOptions {
    pub fn new(target: f64) -> VerifyOptions {
        VerifyOptions {
            target,
            max_depth: 40,
            workers: rayon::current_num_threads(),
            record_leaves: false,
        }
    }
}

/// Leaf outcome counters; merged by addition.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub outside_conf: u64,
    pub bound_proved: u64,
    pub inconclusive_split: u64,
    pub failure_witness: u64,
    pub depth_exhausted: u64,
}

impl OutcomeCounts {
    fn merge(self, other: OutcomeCounts) -> OutcomeCounts {
        OutcomeCounts {
            outside_conf: self.outside_conf + other.outside_conf,
            bound_proved: self.bound_proved + other.bound_proved,
            inconclusive_split: self.inconclusive_split + other.inconclusive_split,
            failure_witness: self.failure_witness + other.failure_witness,
            depth_exhausted: self.depth_exhausted + other.depth_exhausted,
        }
    }

    pub fn leaves(&self) -> u64 {
        self.outside_conf + self.bound_proved + self.failure_witness + self.depth_exhausted
    }
}

/// A cube serialized as its six endpoint coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubeRecord {
    pub mu1: [F64Str; 2],
    pub mu2: [F64Str; 2],
    pub rho: [F64Str; 2],
}

impl From<&ConfigCube> for CubeRecord {
    fn from(c: &ConfigCube) -> CubeRecord {
        CubeRecord {
            mu1: [F64Str(c.mu1.lo()), F64Str(c.mu1.hi())],
            mu2: [F64Str(c.mu2.lo()), F64Str(c.mu2.hi())],
            rho: [F64Str(c.rho.lo()), F64Str(c.rho.hi())],
        }
    }
}

impl CubeRecord {
    pub fn to_cube(self) -> ConfigCube {
        ConfigCube::new(
            Interval::new(self.mu1[0].0, self.mu1[1].0),
            Interval::new(self.mu2[0].0, self.mu2[1].0),
            Interval::new(self.rho[0].0, self.rho[1].0),
        )
    }

    fn sort_key(&self) -> [u64; 6] {
        fn key(x: f64) -> u64 {
            let b = x.to_bits();
            if x >= 0.0 {
                b ^ (1 << 63)
            } else {
                !b
            }
        }
        [
            key(self.mu1[0].0),
            key(self.mu1[1].0),
            key(self.mu2[0].0),
            key(self.mu2[1].0),
            key(self.rho[0].0),
            key(self.rho[1].0),
        ]
    }
}

/// An f64 that serializes as a decimal string with 17 significant digits
/// (lossless round trip).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct F64Str(pub f64);

impl Serialize for F64Str {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{:.16e}", self.0))
    }
}

impl<'de> Deserialize<'de> for F64Str {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<F64Str, D::Error> {
        let s = String::deserialize(d)?;
        s.parse::<f64>()
            .map(F64Str)
            .map_err(serde::de::Error::custom)
    }
}

/// Accepted leaf kinds recorded for replay.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum LeafOutcome {
    OutsideConf,
    BoundProved,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeafRecord {
    pub cube: CubeRecord,
    pub outcome: LeafOutcome,
}

/// The machine-checkable record of one subdivision run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProofCertificate {
    pub prover_version: String,
    pub mode: Mode,
    pub cparam: F64Str,
    pub boost_knee: Option<F64Str>,
    pub boost_slope: Option<F64Str>,
    pub delta: F64Str,
    pub target: F64Str,
    /// Equals `target` iff no failure witness exists and no branch hit the
    /// depth limit; 0 otherwise.
    pub certified_bound: F64Str,
    pub counts: OutcomeCounts,
    /// Deepest recursion level reached.
    pub max_depth: u32,
    pub depth_limit: u32,
    pub failures: Vec<CubeRecord>,
    /// Accepted leaves, recorded only when requested and the run is small.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub leaves: Option<Vec<LeafRecord>>,
    pub wall_time_seconds: F64Str,
}

impl ProofCertificate {
    pub fn is_certified(&self) -> bool {
        self.failures.is_empty() && self.counts.depth_exhausted == 0
    }

    pub fn params(&self) -> ProverParams {
        ProverParams {
            mode: self.mode,
            cparam: self.cparam.0,
            boost: match (self.boost_knee, self.boost_slope) {
                (Some(k), Some(s)) => BoostFunction::new(k.0, s.0).ok(),
                _ => None,
            },
            delta: self.delta.0,
        }
    }

    /// Canonical JSON with the timing field zeroed, for byte comparisons.
    pub fn canonical_json(&self) -> String {
        let mut c = self.clone();
        c.wall_time_seconds = F64Str(0.0);
        serde_json::to_string_pretty(&c).expect("serializable")
    }
}

pub fn prover_version() -> String {
    format!("maxbisect-prover {}", env!("CARGO_PKG_VERSION"))
}

/// Quadrature tolerance policy: α's sensitivity to the Λ enclosure is
/// 2/(1-ρ), so scale the Γ tolerance with the cube's SDP contribution —
/// and with the proof margin, since quadrature slack only needs to stay
/// a small fraction of it.
fn quad_tol(one_minus_rho_lo: f64, margin: f64) -> f64 {
    (0.02 * margin * one_minus_rho_lo.clamp(0.05, 2.0)).clamp(1e-10, 1e-6)
}

/// Rough distance from the target to the family's known optimum, used
/// only to scale tolerances (soundness never depends on it).
fn margin_estimate(mode: Mode, target: f64) -> f64 {
    let opt = match mode {
        Mode::Linear => 0.8737,
        Mode::Pairing => 0.8777,
    };
    (opt - target).clamp(2e-5, 3e-3)
}

/// Certified enclosures of the quantities entering the Λ partial
/// derivatives over a cube, for the mean-value lower bound:
///   ∂Λ/∂r₁ = 1/2 - Φ((t₂ - ρ̃t₁)/√(1-ρ̃²)),
///   ∂Λ/∂ρ̃  = 2·φ₂(t₁, t₂; ρ̃),
///   ∂ρ̃/∂μ₁ = ρ̃μ₁/(1-μ₁²) - μ₂/D,   ∂ρ̃/∂ρ = 1/D,
/// with D = √((1-μ₁²)(1-μ₂²)). `None` when the cube touches a region
/// where the formulas degenerate (the corner bound takes over there).
struct LambdaDerivs {
    dl_dr1: Interval,
    dl_dr2: Interval,
    dl_dtr: Interval,
    dtr_dmu1: Interval,
    dtr_dmu2: Interval,
    dtr_drho: Interval,
}

fn lambda_derivative_bounds(
    cube: &ConfigCube,
    tr: Interval,
    r1: Interval,
    r2: Interval,
) -> Option<LambdaDerivs> {
    let d1 = Interval::ONE.sub(&cube.mu1.square());
    let d2 = Interval::ONE.sub(&cube.mu2.square());
    if d1.lo() < 5e-3 || d2.lo() < 5e-3 {
        return None;
    }
    let s2 = Interval::ONE.sub(&tr.square());
    if s2.lo() < 5e-3 {
        return None;
    }
    let s = s2.sqrt().ok()?;
    let big_d = d1.mul(&d2).sqrt().ok()?;
    if big_d.lo() <= 0.0 {
        return None;
    }

    let q1 = Interval::ONE.sub(&r1).scale(0.5).clamp_to(&Interval::UNIT);
    let q2 = Interval::ONE.sub(&r2).scale(0.5).clamp_to(&Interval::UNIT);
    let t1 = gaussian::std_normal_cdf_inv(q1).ok()?.value();
    let t2 = gaussian::std_normal_cdf_inv(q2).ok()?.value();
    if !t1.is_finite() || !t2.is_finite() {
        return None;
    }

    let u1 = t2.sub(&tr.mul(&t1)).div(&s).ok()?;
    let u2 = t1.sub(&tr.mul(&t2)).div(&s).ok()?;
    let half = Interval::point(0.5);
    let dl_dr1 = half.sub(&gaussian::std_normal_cdf(u1).value());
    let dl_dr2 = half.sub(&gaussian::std_normal_cdf(u2).value());

    // 2·φ₂ with the stable exponent (t₁-ρ̃t₂)²/(2s²) + t₂²/2 ≥ 0.
    let shifted = t1.sub(&tr.mul(&t2));
    let expo = shifted
        .square()
        .div(&s2.scale(2.0))
        .ok()?
        .add(&t2.square().scale(0.5))
        .neg();
    let pi_iv = Interval::with_ulp_slack(std::f64::consts::PI);
    let dl_dtr = gaussian::exp_iv(&expo)
        .div(&pi_iv.mul(&s))
        .ok()?
        .max(&Interval::ZERO);

    let dtr_dmu1 = tr
        .mul(&cube.mu1)
        .div(&d1)
        .ok()?
        .sub(&cube.mu2.div(&big_d).ok()?);
    let dtr_dmu2 = tr
        .mul(&cube.mu2)
        .div(&d2)
        .ok()?
        .sub(&cube.mu1.div(&big_d).ok()?);
    let dtr_drho = Interval::ONE.div(&big_d).ok()?;
    Some(LambdaDerivs {
        dl_dr1,
        dl_dr2,
        dl_dtr,
        dtr_dmu1,
        dtr_dmu2,
        dtr_drho,
    })
}

/// Corner-monotone lower bound of α over cube ∩ Conf_δ and all relevant
/// biases: one Γ corner per bias rectangle. Valid everywhere, loose in
/// proportion to the cube width; the mean-value path below is tighter in
/// the interior.
fn corner_lower(cube: &ConfigCube, params: &ProverParams, tr: Interval, tol: f64) -> f64 {
    let den_hi = add_up(1.0, -cube.rho.lo());
    if den_hi <= 0.0 {
        return 0.0;
    }
    let lam_hi = match params.mode {
        Mode::Linear => {
            let r1 = cube.mu1.scale(params.cparam);
            let r2 = cube.mu2.scale(params.cparam);
            gaussian::lambda_hi(tr, r1, r2, tol)
        }
        Mode::Pairing => {
            let f = params.boost.unwrap_or_else(BoostFunction::zero);
            let hulls = rounding::pairing_bias_hulls(cube.mu1, cube.mu2, params.cparam, &f);
            // min over rectangles of the α lower bound = the largest Λ.
            hulls
                .iter()
                .map(|rect| gaussian::lambda_hi(tr, rect.i1, rect.i2, tol))
                .fold(0.0f64, f64::max)
        }
    };
    let num_lo = mul_down(2.0, add_down(1.0, -lam_hi)).max(0.0);
    div_down(num_lo, den_hi).max(0.0)
}

/// Per-cube certified bounds: a lower bound on min α over cube ∩ Conf_δ
/// (mean-value form when the derivative enclosures are available, corner
/// form otherwise or when tighter) and, when the cube midpoint is a valid
/// smooth configuration, an upper bound on the min from its value there.
fn cube_bounds(
    boxed: &ConfigCube,
    params: &ProverParams,
    smooth: SmoothParams,
    target: f64,
) -> (f64, Option<f64>) {
    let one_minus_rho_lo = add_down(1.0, -boxed.rho.hi()).max(0.0);
    let den_hi = add_up(1.0, -boxed.rho.lo());
    if one_minus_rho_lo <= 0.0 || den_hi <= 0.0 {
        return (0.0, None);
    }
    let margin = margin_estimate(params.mode, target);
    let tol = quad_tol(one_minus_rho_lo, margin);
    let tr = boxed.tilde_rho_conf();
    let mid = boxed.midpoint();
    let mid_cube = ConfigCube::new(
        Interval::point(mid.mu1),
        Interval::point(mid.mu2),
        Interval::point(mid.rho),
    );
    let tr_mid = mid_cube.tilde_rho_conf();
    let den_mid = Interval::ONE.sub(&Interval::point(mid.rho));
    let w1 = boxed.mu1.width();
    let w2 = boxed.mu2.width();
    let wr = boxed.rho.width();

    let mut lower = f64::NEG_INFINITY;
    let mut upper = None;
    match params.mode {
        Mode::Linear => {
            let c = params.cparam;
            let r1m = Interval::point(c * mid.mu1);
            let r2m = Interval::point(c * mid.mu2);
            let lam_mid = gaussian::lambda_iv(tr_mid, r1m, r2m, tol);
            let n_mid = Interval::ONE.sub(&lam_mid).scale(2.0).max(&Interval::ZERO);
            let alpha_mid = n_mid.div(&den_mid).expect("1-rho > 0 at the midpoint");
            if mid.is_smooth(smooth) {
                upper = Some(alpha_mid.hi());
            }
            let r1 = boxed.mu1.scale(c);
            let r2 = boxed.mu2.scale(c);
            if let Some(d) = lambda_derivative_bounds(boxed, tr, r1, r2) {
                // ∂Λ/∂μᵢ combined in one interval expression so that the
                // r-channel and ρ̃-channel cancellation survives.
                let l_mu1 = d.dl_dr1.scale(c).add(&d.dl_dtr.mul(&d.dtr_dmu1)).mag();
                let l_mu2 = d.dl_dr2.scale(c).add(&d.dl_dtr.mul(&d.dtr_dmu2)).mag();
                let l_rho = d.dl_dtr.mul(&d.dtr_drho).mag();
                // N = 2(1-Λ) and the mean-value radius is w/2, so the
                // factors cancel: deficit = Σ |∂Λ/∂xᵢ|·wᵢ.
                let spread =
                    add_up(add_up(mul_up(l_mu1, w1), mul_up(l_mu2, w2)), mul_up(l_rho, wr));
                let n_lo = add_down(n_mid.lo(), -spread).max(0.0);
                lower = div_down(n_lo, den_hi).max(0.0);
            }
        }
        Mode::Pairing => {
            let f = params.boost.unwrap_or_else(BoostFunction::zero);
            if let Ok(enc) = rounding::alpha_cf_tol(&mid, params.cparam, &f, tol) {
                if mid.is_smooth(smooth) {
                    upper = Some(enc.hi());
                }
                // m(x) = min over permissible biases of α numerator; its
                // Lipschitz constant combines the direct ρ̃ channel with
                // the motion of the rectangle boundaries (rate ≤
                // c + (1-c)·slope per own coordinate, (1-c)·slope cross).
                let hulls =
                    rounding::pairing_bias_hulls(boxed.mu1, boxed.mu2, params.cparam, &f);
                let mut r1h: Option<Interval> = None;
                let mut r2h: Option<Interval> = None;
                for rect in &hulls {
                    r1h = Some(r1h.map_or(rect.i1, |h| h.hull(&rect.i1)));
                    r2h = Some(r2h.map_or(rect.i2, |h| h.hull(&rect.i2)));
                }
                if let (Some(r1h), Some(r2h)) = (r1h, r2h) {
                    if let Some(d) = lambda_derivative_bounds(boxed, tr, r1h, r2h) {
                        let own = params.cparam + (1.0 - params.cparam) * f.slope();
                        let cross = (1.0 - params.cparam) * f.slope();
                        let dr1 = d.dl_dr1.mag();
                        let dr2 = d.dl_dr2.mag();
                        let l_mu1 = d.dl_dtr.mul(&d.dtr_dmu1).mag() + dr1 * own + dr2 * cross;
                        let l_mu2 = d.dl_dtr.mul(&d.dtr_dmu2).mag() + dr2 * own + dr1 * cross;
                        let l_rho = d.dl_dtr.mul(&d.dtr_drho).mag();
                        let n_mid = enc.value().mul(&den_mid).max(&Interval::ZERO);
                        let spread = add_up(
                            add_up(mul_up(l_mu1, w1), mul_up(l_mu2, w2)),
                            mul_up(l_rho, wr),
                        );
                        let n_lo = add_down(n_mid.lo(), -spread).max(0.0);
                        lower = div_down(n_lo, den_hi).max(0.0);
                    }
                }
            }
        }
    }

    if lower <= target {
        lower = lower.max(corner_lower(boxed, params, tr, tol));
    }
    (lower.max(0.0), upper)
}

/// Sound enclosure of the α values over the cube (for inspection and
/// tests; the verifier itself uses [`alpha_lower`] plus midpoint uppers).
pub fn bound_alpha_on_cube(
    cube: &ConfigCube,
    params: &ProverParams,
    smooth: SmoothParams,
) -> Option<Interval> {
    let boxed = cube.intersect_smooth_box(smooth)?;
    let tol = quad_tol(add_down(1.0, -boxed.rho.hi()).max(1e-9), 1e-4);
    let tr = boxed.tilde_rho_conf();
    match params.mode {
        Mode::Linear => {
            let r1 = boxed.mu1.scale(params.cparam);
            let r2 = boxed.mu2.scale(params.cparam);
            rounding::alpha_value_cube_with_tr(&boxed, tr, r1, r2, tol).ok()
        }
        Mode::Pairing => {
            let f = params.boost.unwrap_or_else(BoostFunction::zero);
            let hulls = rounding::pairing_bias_hulls(boxed.mu1, boxed.mu2, params.cparam, &f);
            let mut total: Option<Interval> = None;
            for rect in hulls {
                let a = rounding::alpha_value_cube_with_tr(&boxed, tr, rect.i1, rect.i2, tol)
                    .ok()?;
                total = Some(match total {
                    None => a,
                    Some(t) => t.hull(&a),
                });
            }
            total
        }
    }
}

struct Shared<'a> {
    params: &'a ProverParams,
    smooth: SmoothParams,
    target: f64,
    max_depth: u32,
    abort: AtomicBool,
    failures: Mutex<Vec<CubeRecord>>,
    leaves: Option<Mutex<Vec<LeafRecord>>>,
}

/// Parallelize the recursion down to this depth; deeper subtrees run
/// sequentially inside one task.
const PAR_DEPTH: u32 = 12;

fn process(cube: &ConfigCube, depth: u32, shared: &Shared) -> (OutcomeCounts, u32) {
    if shared.abort.load(Ordering::Relaxed) {
        return (OutcomeCounts::default(), depth);
    }
    let mut counts = OutcomeCounts::default();
    match cube.classify(shared.smooth) {
        CubeClass::Outside => {
            counts.outside_conf += 1;
            if let Some(leaves) = &shared.leaves {
                leaves.lock().unwrap().push(LeafRecord {
                    cube: cube.into(),
                    outcome: LeafOutcome::OutsideConf,
                });
            }
            return (counts, depth);
        }
        CubeClass::Inside | CubeClass::Straddling => {}
    }
    let boxed = cube
        .intersect_smooth_box(shared.smooth)
        .expect("non-Outside cube intersects the smooth box");

    let (lower, upper) = cube_bounds(&boxed, shared.params, shared.smooth, shared.target);
    if lower > shared.target {
        counts.bound_proved += 1;
        if let Some(leaves) = &shared.leaves {
            leaves.lock().unwrap().push(LeafRecord {
                cube: cube.into(),
                outcome: LeafOutcome::BoundProved,
            });
        }
        return (counts, depth);
    }

    if let Some(upper) = upper {
        if upper < shared.target {
            counts.failure_witness += 1;
            shared.failures.lock().unwrap().push(cube.into());
            shared.abort.store(true, Ordering::Relaxed);
            return (counts, depth);
        }
    }

    if depth >= shared.max_depth {
        counts.depth_exhausted += 1;
        return (counts, depth);
    }

    counts.inconclusive_split += 1;
    let children = cube.split();
    let results: Vec<(OutcomeCounts, u32)> = if depth < PAR_DEPTH {
        use rayon::prelude::*;
        children
            .par_iter()
            .map(|ch| process(ch, depth + 1, shared))
            .collect()
    } else {
        children
            .iter()
            .map(|ch| process(ch, depth + 1, shared))
            .collect()
    };
    let mut deepest = depth;
    for (c, d) in results {
        counts = counts.merge(c);
        deepest = deepest.max(d);
    }
    (counts, deepest)
}

/// Run the four-case subdivision over [-1, 1]³ restricted to Conf_δ.
/// Returns a certificate; `certified_bound` equals the target exactly
/// when every branch was accepted.
pub fn verify(params: &ProverParams, opts: &VerifyOptions) -> ProofCertificate {
    assert!(opts.target > 0.0 && opts.target < 1.0, "target must be in (0,1)");
    let start = Instant::now();
    let smooth = SmoothParams::new(params.delta);
    let shared = Shared {
        params,
        smooth,
        target: opts.target,
        max_depth: opts.max_depth,
        abort: AtomicBool::new(false),
        failures: Mutex::new(Vec::new()),
        leaves: if opts.record_leaves {
            Some(Mutex::new(Vec::new()))
        } else {
            None
        },
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers.max(1))
        .build()
        .expect("thread pool");
    let (counts, deepest) = pool.install(|| process(&ConfigCube::root(), 0, &shared));

    let mut failures = shared.failures.into_inner().unwrap();
    failures.sort_by_key(|f| f.sort_key());
    let leaves = shared.leaves.map(|m| {
        let mut v = m.into_inner().unwrap();
        v.sort_by_key(|l| l.cube.sort_key());
        v
    });
    let certified = failures.is_empty() && counts.depth_exhausted == 0;
    ProofCertificate {
        prover_version: prover_version(),
        mode: params.mode,
        cparam: F64Str(params.cparam),
        boost_knee: params.boost.map(|b| F64Str(b.knee())),
        boost_slope: params.boost.map(|b| F64Str(b.slope())),
        delta: F64Str(params.delta),
        target: F64Str(opts.target),
        certified_bound: F64Str(if certified { opts.target } else { 0.0 }),
        counts,
        max_depth: deepest,
        depth_limit: opts.max_depth,
        failures,
        leaves,
        wall_time_seconds: F64Str(start.elapsed().as_secs_f64()),
    }
}

/// Re-verify a certificate. With recorded leaves, a seeded random
/// fraction of the accepted leaves is recomputed; without them, any
/// positive fraction triggers a full deterministic re-run whose counts
/// must reproduce the certificate. Structural consistency is always
/// checked. Returns false on any mismatch.
pub fn replay_certificate(
    cert: &ProofCertificate,
    spot_check_fraction: f64,
) -> Result<bool, ProverError> {
    if cert.prover_version != prover_version() {
        return Err(ProverError::MismatchedVersion {
            found: cert.prover_version.clone(),
            expected: prover_version(),
        });
    }
    // Structural consistency.
    let certified = cert.failures.is_empty() && cert.counts.depth_exhausted == 0;
    let expected_bound = if certified { cert.target.0 } else { 0.0 };
    if cert.certified_bound.0 != expected_bound {
        return Ok(false);
    }
    if cert.counts.failure_witness != cert.failures.len() as u64 {
        return Ok(false);
    }
    if spot_check_fraction <= 0.0 {
        return Ok(true);
    }
    let params = cert.params();
    if params.mode == Mode::Pairing && params.boost.is_none() && cert.boost_knee.is_some() {
        return Err(ProverError::InvalidCertificate(
            "pairing certificate with invalid boost parameters".into(),
        ));
    }
    let smooth = SmoothParams::new(params.delta);

    match &cert.leaves {
        Some(leaves) => {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let k = ((leaves.len() as f64) * spot_check_fraction.min(1.0)).ceil() as usize;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5EED_5EED);
            let sample: Vec<&LeafRecord> = if spot_check_fraction >= 1.0 {
                leaves.iter().collect()
            } else {
                leaves.choose_multiple(&mut rng, k).collect()
            };
            for leaf in sample {
                let cube = leaf.cube.to_cube();
                match leaf.outcome {
                    LeafOutcome::OutsideConf => {
                        if cube.classify(smooth) != CubeClass::Outside {
                            return Ok(false);
                        }
                    }
                    LeafOutcome::BoundProved => {
                        let boxed = match cube.intersect_smooth_box(smooth) {
                            Some(b) => b,
                            None => return Ok(false),
                        };
                        let (lower, _) = cube_bounds(&boxed, &params, smooth, cert.target.0);
                        if lower <= cert.target.0 {
                            return Ok(false);
                        }
                    }
                }
            }
            Ok(true)
        }
        None => {
            let opts = VerifyOptions {
                target: cert.target.0,
                max_depth: cert.depth_limit,
                workers: rayon::current_num_threads(),
                record_leaves: false,
            };
            let fresh = verify(&params, &opts);
            Ok(fresh.counts == cert.counts
                && fresh.certified_bound.0 == cert.certified_bound.0
                && fresh.failures == cert.failures)
        }
    }
}
