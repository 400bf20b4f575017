//! Non-rigorous numerical optimization of the rounding parameters: the
//! linear-bias curve α(c) and its maximizer, the two-point mixture bound
//! that limits every linear rounding, the pairing-parameter search, and
//! tabular data for the standard figures.
//!
//! Everything here evaluates α in plain floating point for speed;
//! certified numbers come from the prover alone.

use crate::config::Configuration;
use crate::gaussian::fast;
use crate::rounding::{alpha_cf_fast, alpha_point_fast, BoostFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum OptimizerError {
    #[error("unknown figure: {0}")]
    UnknownFigure(String),
}

/// Outcome of one inner minimization (and optionally an outer parameter
/// search).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OptimizationReport {
    /// Parameter vector the report is about: [c] or [c, knee, slope].
    pub best_params: Vec<f64>,
    /// Estimated global minimum of the ratio over configurations.
    pub best_ratio: f64,
    /// Near-minimal configurations (deduplicated local minima).
    pub worst_configs: Vec<(Configuration, f64)>,
    /// Coarse log of the search, one (params, value) pair per step.
    pub search_trace: Vec<(Vec<f64>, f64)>,
}

/// ρ endpoints of Conf above a given (μ₁, μ₂): the triangle inequalities
/// are exactly -1 + |μ₁+μ₂| ≤ ρ ≤ 1 - |μ₁-μ₂|.
pub fn rho_bounds(mu1: f64, mu2: f64) -> (f64, f64) {
    (-1.0 + (mu1 + mu2).abs(), 1.0 - (mu1 - mu2).abs())
}

fn project_to_conf(c: &mut Configuration) {
    c.mu1 = c.mu1.clamp(-1.0, 1.0);
    c.mu2 = c.mu2.clamp(-1.0, 1.0);
    let (lo, hi) = rho_bounds(c.mu1, c.mu2);
    // The envelope interval collapses (to rounding) at max|μ| = 1.
    c.rho = c.rho.clamp(lo, hi.max(lo));
}

/// Coordinate descent with step halving on an objective over Conf.
fn descend(
    start: Configuration,
    objective: &(impl Fn(&Configuration) -> f64 + Sync),
) -> (Configuration, f64) {
    let mut best = start;
    project_to_conf(&mut best);
    let mut best_val = objective(&best);
    let mut step = 0.05;
    while step > 1e-7 {
        let mut improved = false;
        for coord in 0..3 {
            for dir in [-1.0, 1.0] {
                let mut cand = best;
                match coord {
                    0 => cand.mu1 += dir * step,
                    1 => cand.mu2 += dir * step,
                    _ => cand.rho += dir * step,
                }
                project_to_conf(&mut cand);
                let v = objective(&cand);
                if v < best_val {
                    best = cand;
                    best_val = v;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (best, best_val)
}

/// Minimize an objective over Conf: surface grids on both ρ envelopes
/// (where the worst configurations live) plus a coarse interior grid and
/// seeded random interior restarts, each optionally refined by descent.
fn minimize_over_conf(
    objective: &(impl Fn(&Configuration) -> f64 + Sync),
    grid_n: usize,
    refine: bool,
) -> (f64, Vec<(Configuration, f64)>) {
    let n = grid_n.max(3);
    let coords: Vec<f64> = (0..n)
        .map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64)
        .collect();

    // Surface grids: lower and upper ρ envelopes.
    let mut evals: Vec<(Configuration, f64)> = coords
        .par_iter()
        .flat_map_iter(|&m1| {
            coords.iter().flat_map(move |&m2| {
                let (lo, hi) = rho_bounds(m1, m2);
                [
                    Configuration::new(m1, m2, lo),
                    Configuration::new(m1, m2, hi),
                ]
            })
        })
        .map(|c| {
            let v = objective(&c);
            (c, v)
        })
        .collect();

    // Coarse interior grid.
    let nc = (n / 2).max(2);
    let interior: Vec<f64> = (0..nc)
        .map(|i| -0.95 + 1.9 * i as f64 / (nc - 1) as f64)
        .collect();
    let interior_evals: Vec<(Configuration, f64)> = interior
        .par_iter()
        .flat_map_iter(|&m1| {
            let interior = interior.clone();
            interior.clone().into_iter().flat_map(move |m2| {
                interior
                    .clone()
                    .into_iter()
                    .map(move |r| Configuration::new(m1, m2, r))
            })
        })
        .filter(|c| c.is_configuration())
        .map(|c| {
            let v = objective(&c);
            (c, v)
        })
        .collect();
    evals.extend(interior_evals);

    // Random interior restarts (fixed seed for reproducibility).
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FF_EE00);
    for _ in 0..20 {
        loop {
            let c = Configuration::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            if c.is_configuration() {
                evals.push((c, objective(&c)));
                break;
            }
        }
    }

    evals.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    let mut minima: Vec<(Configuration, f64)> = Vec::new();
    if refine {
        let seeds: Vec<Configuration> = evals.iter().take(24).map(|e| e.0).collect();
        let refined: Vec<(Configuration, f64)> = seeds
            .par_iter()
            .map(|s| descend(*s, objective))
            .collect();
        minima.extend(refined);
    }
    minima.extend(evals.iter().take(24).cloned());
    minima.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());

    let best = minima.first().map(|m| m.1).unwrap_or(f64::INFINITY);
    // Deduplicate near-minimal configurations (L∞ clustering), keeping the
    // μ-negation symmetry class representative closest to the raw point.
    let mut worst: Vec<(Configuration, f64)> = Vec::new();
    for (c, v) in minima {
        if v > best + 5e-4 {
            break;
        }
        let dup = worst.iter().any(|(w, _)| {
            let direct = (w.mu1 - c.mu1)
                .abs()
                .max((w.mu2 - c.mu2).abs())
                .max((w.rho - c.rho).abs());
            let mirrored = (w.mu1 + c.mu1)
                .abs()
                .max((w.mu2 + c.mu2).abs())
                .max((w.rho - c.rho).abs());
            direct.min(mirrored) < 2e-2
        });
        if !dup {
            worst.push((c, v));
        }
        if worst.len() >= 8 {
            break;
        }
    }
    (best, worst)
}

/// Estimate α(c) = min over Conf of α(μ₁, μ₂, ρ, c·μ₁, c·μ₂).
pub fn alpha_of_c(cparam: f64, grid_n: usize, refine: bool) -> OptimizationReport {
    let objective = move |c: &Configuration| alpha_point_fast(c, cparam * c.mu1, cparam * c.mu2);
    let (best, worst) = minimize_over_conf(&objective, grid_n, refine);
    OptimizationReport {
        best_params: vec![cparam],
        best_ratio: best,
        worst_configs: worst,
        search_trace: vec![(vec![cparam], best)],
    }
}

/// Golden-section maximization of α(c) over c ∈ [0, 1]; returns the
/// maximizer and the value (the curve is unimodal: increasing along the
/// integral-corner branch (1+c²)/2, decreasing past the crossing).
pub fn maximize_linear() -> (f64, f64) {
    let eval = |c: f64| alpha_of_c(c, 81, true).best_ratio;
    let inv_phi = 0.618_033_988_749_894_9_f64;
    let (mut a, mut b) = (0.6, 1.0);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = eval(x1);
    let mut f2 = eval(x2);
    while b - a > 2e-4 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = eval(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = eval(x1);
        }
    }
    let c_star = 0.5 * (a + b);
    (c_star, eval(c_star))
}

/// The two worst configurations of the linear family at its optimum.
pub fn linear_worst_pair() -> (Configuration, Configuration) {
    (crate::config::PHI_1, crate::config::PHI_2)
}

const MIXTURE_P1: f64 = 0.931935;

/// Performance of linear biases on the fixed two-point configuration
/// mixture, as a function of c: the ratio of expected cut probability to
/// expected SDP contribution. Returns (c, ratio) rows.
pub fn mixture_bound_curve(c_grid: &[f64]) -> Vec<(f64, f64)> {
    let phi1 = crate::config::PHI_1;
    let phi2 = crate::config::PHI_2;
    let tr1 = phi1.tilde_rho();
    let den = MIXTURE_P1 * 0.5 * (1.0 - phi1.rho) + (1.0 - MIXTURE_P1) * 0.5 * (1.0 - phi2.rho);
    c_grid
        .par_iter()
        .map(|&c| {
            let cut1 = 1.0 - fast::lambda(tr1, c * phi1.mu1, c * phi1.mu2);
            // φ₂ is integral: ρ̃ = 0 by the boundary convention.
            let cut2 = 1.0 - fast::lambda(0.0, c * phi2.mu1, c * phi2.mu2);
            let num = MIXTURE_P1 * cut1 + (1.0 - MIXTURE_P1) * cut2;
            (c, num / den)
        })
        .collect()
}

/// Local search over (c, knee, slope) of the global minimum of α_{c,f}
/// over Conf, starting from `seed_params`. The inner minimization reuses
/// the surface-grid-plus-descent machinery with the candidate-reduced
/// α_{c,f} evaluations.
pub fn optimize_pairing(seed_params: (f64, f64, f64)) -> OptimizationReport {
    optimize_pairing_with(seed_params, 101, 2)
}

/// [`optimize_pairing`] with explicit inner grid size and outer rounds.
pub fn optimize_pairing_with(
    seed_params: (f64, f64, f64),
    grid_n: usize,
    outer_rounds: usize,
) -> OptimizationReport {
    let inner = |params: (f64, f64, f64), n: usize, refine: bool| -> (f64, Vec<(Configuration, f64)>) {
        let (c, knee, slope) = params;
        match BoostFunction::new(knee, slope) {
            Ok(f) => {
                let objective = move |cf: &Configuration| alpha_cf_fast(cf, c, &f);
                minimize_over_conf(&objective, n, refine)
            }
            Err(_) => (f64::NEG_INFINITY, Vec::new()),
        }
    };

    let mut trace = Vec::new();
    let mut best_params = seed_params;
    let (mut best_val, mut best_worst) = inner(best_params, grid_n, true);
    trace.push((
        vec![best_params.0, best_params.1, best_params.2],
        best_val,
    ));

    let mut step = 0.002;
    for _ in 0..outer_rounds {
        let mut improved = true;
        while improved {
            improved = false;
            for coord in 0..3 {
                for dir in [-1.0, 1.0] {
                    let mut cand = best_params;
                    match coord {
                        0 => cand.0 = (cand.0 + dir * step).clamp(0.0, 1.0),
                        1 => cand.1 = (cand.1 + dir * step).clamp(0.0, 1.0),
                        _ => cand.2 = (cand.2 + dir * step).max(0.0),
                    }
                    // Maximize the inner min; use a cheaper grid inside
                    // the search loop.
                    let (v, _) = inner(cand, grid_n / 2 + 1, false);
                    if v > best_val {
                        best_val = v;
                        best_params = cand;
                        improved = true;
                        trace.push((vec![cand.0, cand.1, cand.2], v));
                    }
                }
            }
        }
        step *= 0.25;
    }

    // Final full-precision evaluation at the incumbent.
    let (final_val, final_worst) = inner(best_params, grid_n, true);
    if final_val.is_finite() {
        best_val = final_val;
        best_worst = final_worst;
    }
    trace.push((
        vec![best_params.0, best_params.1, best_params.2],
        best_val,
    ));
    OptimizationReport {
        best_params: vec![best_params.0, best_params.1, best_params.2],
        best_ratio: best_val,
        worst_configs: best_worst,
        search_trace: trace,
    }
}

/// The named figures whose data the toolkit can emit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Figure {
    AlphaLinearFull,
    AlphaLinearZoom,
    LinearBadMixture,
    BoostEnvelope,
    SurfaceContourLower,
    SurfaceContourUpper,
}

impl std::str::FromStr for Figure {
    type Err = OptimizerError;
    fn from_str(s: &str) -> Result<Figure, OptimizerError> {
        match s {
            "alpha_linear_full" => Ok(Figure::AlphaLinearFull),
            "alpha_linear_zoom" => Ok(Figure::AlphaLinearZoom),
            "linear_bad_mixture" => Ok(Figure::LinearBadMixture),
            "boost_envelope" => Ok(Figure::BoostEnvelope),
            "surface_contour_lower" => Ok(Figure::SurfaceContourLower),
            "surface_contour_upper" => Ok(Figure::SurfaceContourUpper),
            other => Err(OptimizerError::UnknownFigure(other.to_string())),
        }
    }
}

/// Default pairing parameters used by the contour and envelope figures.
pub const FIG_C: f64 = 0.8056;
pub const FIG_KNEE: f64 = 0.478;
pub const FIG_SLOPE: f64 = 1.618;

/// CSV data (header + rows) sufficient to re-render the named figure.
pub fn emit_plot_data(figure: Figure, resolution: usize) -> String {
    let res = resolution.max(2);
    let mut out = String::new();
    match figure {
        Figure::AlphaLinearFull | Figure::AlphaLinearZoom => {
            let (lo, hi) = match figure {
                Figure::AlphaLinearFull => (0.0, 1.0),
                _ => (0.83, 0.88),
            };
            out.push_str("c,alpha\n");
            let rows: Vec<(f64, f64)> = (0..res)
                .into_par_iter()
                .map(|i| {
                    let c = lo + (hi - lo) * i as f64 / (res - 1) as f64;
                    (c, alpha_of_c(c, 41, true).best_ratio)
                })
                .collect();
            for (c, a) in rows {
                let _ = writeln!(out, "{c},{a}");
            }
        }
        Figure::LinearBadMixture => {
            out.push_str("c,ratio_phi1,ratio_phi2,mixture\n");
            let phi1 = crate::config::PHI_1;
            let tr1 = phi1.tilde_rho();
            let grid: Vec<f64> = (0..res)
                .map(|i| i as f64 / (res - 1) as f64)
                .collect();
            let mixture = mixture_bound_curve(&grid);
            for (i, &c) in grid.iter().enumerate() {
                let a1 = alpha_point_fast(&phi1, c * phi1.mu1, c * phi1.mu2);
                let _ = tr1;
                let a2 = (1.0 + c * c) / 2.0;
                let _ = writeln!(out, "{c},{a1},{a2},{}", mixture[i].1);
            }
        }
        Figure::BoostEnvelope => {
            out.push_str("mu,c_mu,c_mu_plus_boost\n");
            let f = BoostFunction::new(FIG_KNEE, FIG_SLOPE).expect("valid figure parameters");
            for i in 0..res {
                let mu = i as f64 / (res - 1) as f64;
                let lowr = FIG_C * mu;
                let upr = FIG_C * mu + (1.0 - FIG_C) * f.eval(mu);
                let _ = writeln!(out, "{mu},{lowr},{upr}");
            }
        }
        Figure::SurfaceContourLower | Figure::SurfaceContourUpper => {
            out.push_str("mu1,mu2,rho,alpha_cf\n");
            let f = BoostFunction::new(FIG_KNEE, FIG_SLOPE).expect("valid figure parameters");
            let rows: Vec<String> = (0..res)
                .into_par_iter()
                .map(|i| {
                    let mut chunk = String::new();
                    let mu1 = -1.0 + 2.0 * i as f64 / (res - 1) as f64;
                    for j in 0..res {
                        let mu2 = -1.0 + 2.0 * j as f64 / (res - 1) as f64;
                        let (lo, hi) = rho_bounds(mu1, mu2);
                        let rho = match figure {
                            Figure::SurfaceContourLower => lo,
                            _ => hi,
                        };
                        let cfg = Configuration::new(mu1, mu2, rho);
                        let v = alpha_cf_fast(&cfg, FIG_C, &f);
                        let _ = writeln!(chunk, "{mu1},{mu2},{rho},{v}");
                    }
                    chunk
                })
                .collect();
            for chunk in rows {
                out.push_str(&chunk);
            }
        }
    }
    out
}
