//! Independent brute-force and Monte Carlo oracles.
//!
//! Sampling uses inverse-CDF transforms over counter-based ChaCha streams:
//! trials are partitioned into fixed-size blocks, each block drawing from
//! its own stream, and block results are reduced in block order. Estimates
//! are therefore bit-identical across runs and worker counts.

use crate::gaussian::fast;
use crate::pipeline::{cut_value, rebalance, round_once, Graph, SdpSolution};
use crate::rounding::BiasVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("brute force requires an even vertex count, got {0}")]
    OddVertexCount(usize),
    #[error("brute force enumeration is capped at 24 vertices, got {0}")]
    TooLarge(usize),
}

/// Trials per ChaCha stream block; fixed so parallel scheduling cannot
/// change which trial sees which random numbers.
const BLOCK: u64 = 1 << 14;

/// A Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub seed: u64,
}

impl McEstimate {
    fn from_sums(sum: f64, sum_sq: f64, n: u64, seed: u64) -> McEstimate {
        let nf = n as f64;
        let mean = sum / nf;
        let var = ((sum_sq - sum * sum / nf) / (nf - 1.0).max(1.0)).max(0.0);
        McEstimate {
            mean,
            std_error: (var / nf).sqrt(),
            n_samples: n,
            seed,
        }
    }

    /// |mean - reference| in units of the standard error.
    pub fn sigmas_from(&self, reference: f64) -> f64 {
        (self.mean - reference).abs() / self.std_error.max(1e-300)
    }
}

fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block.wrapping_add(1));
    rng
}

fn open_unit(rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.gen();
    u.max(f64::MIN_POSITIVE).min(1.0 - f64::EPSILON)
}

/// Deterministic blocked Monte Carlo: `per_sample` maps one rng draw to a
/// value; returns mean and standard error.
fn blocked_mc(n: u64, seed: u64, per_sample: impl Fn(&mut ChaCha8Rng) -> f64 + Sync) -> McEstimate {
    let n_blocks = n.div_ceil(BLOCK);
    let partials: Vec<(f64, f64)> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = block_rng(seed, b);
            let count = BLOCK.min(n - b * BLOCK);
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..count {
                let v = per_sample(&mut rng);
                sum += v;
                sum_sq += v * v;
            }
            (sum, sum_sq)
        })
        .collect();
    let (sum, sum_sq) = partials
        .iter()
        .fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    McEstimate::from_sums(sum, sum_sq, n, seed)
}

/// Estimate Pr[x₁ = x₂] where xᵢ = sign(Zᵢ - Φ⁻¹((1-rᵢ)/2)) and (Z₁, Z₂)
/// are standard normals with correlation ρ̃ (built by the projection
/// identity Z₂ = ρ̃Z₁ + √(1-ρ̃²)·Z). This is the sampling oracle for Λ.
pub fn mc_same_side_prob(rho_t: f64, r1: f64, r2: f64, n: u64, seed: u64) -> McEstimate {
    let t1 = fast::inv_cdf(0.5 * (1.0 - r1));
    let t2 = fast::inv_cdf(0.5 * (1.0 - r2));
    let mix = (1.0 - rho_t * rho_t).max(0.0).sqrt();
    blocked_mc(n, seed, move |rng| {
        let z1 = fast::inv_cdf(open_unit(rng));
        let z = fast::inv_cdf(open_unit(rng));
        let z2 = rho_t * z1 + mix * z;
        let x1 = z1 >= t1;
        let x2 = z2 >= t2;
        f64::from(u8::from(x1 == x2))
    })
}

/// Estimate the quadrant probability Pr[Z₁ ≤ Φ⁻¹(q1) ∧ Z₂ ≤ Φ⁻¹(q2)] at
/// correlation ρ̃: the sampling oracle for Γ.
pub fn mc_gamma_quadrant(rho_t: f64, q1: f64, q2: f64, n: u64, seed: u64) -> McEstimate {
    let t1 = fast::inv_cdf(q1);
    let t2 = fast::inv_cdf(q2);
    let mix = (1.0 - rho_t * rho_t).max(0.0).sqrt();
    blocked_mc(n, seed, move |rng| {
        let z1 = fast::inv_cdf(open_unit(rng));
        let z = fast::inv_cdf(open_unit(rng));
        let z2 = rho_t * z1 + mix * z;
        f64::from(u8::from(z1 <= t1 && z2 <= t2))
    })
}

/// Exhaustive Max Bisection over balanced ±1 assignments, n ≤ 24 even.
/// Returns the optimum value and one maximizer.
pub fn brute_force_max_bisection(graph: &Graph) -> Result<(f64, Vec<i8>), OracleError> {
    let n = graph.n();
    if n % 2 != 0 {
        return Err(OracleError::OddVertexCount(n));
    }
    if n > 24 {
        return Err(OracleError::TooLarge(n));
    }
    if n == 0 {
        return Ok((0.0, Vec::new()));
    }
    // Fix vertex 0 on the +1 side (complement symmetry) and enumerate
    // subsets of {1..n-1} of size n/2 - 1 via Gosper's hack.
    let k = n / 2 - 1;
    let edges = graph.edges();
    let mut best = f64::NEG_INFINITY;
    let mut best_mask = 0u32;
    let limit = 1u32 << (n - 1);
    let mut comb: u32 = (1 << k) - 1;
    loop {
        if k == 0 {
            // Only the empty subset; handled by a single pass.
        }
        let mask = (comb << 1) | 1;
        let mut val = 0.0;
        for &(i, j, w) in edges {
            if ((mask >> i) ^ (mask >> j)) & 1 == 1 {
                val += w;
            }
        }
        if val > best {
            best = val;
            best_mask = mask;
        }
        if k == 0 {
            break;
        }
        // Gosper: next subset with the same popcount.
        let c = comb & comb.wrapping_neg();
        let r = comb + c;
        comb = (((r ^ comb) >> 2) / c) | r;
        if comb >= limit {
            break;
        }
    }
    let assignment: Vec<i8> = (0..n)
        .map(|i| if (best_mask >> i) & 1 == 1 { 1 } else { -1 })
        .collect();
    Ok((best, assignment))
}

/// Statistics of repeated Algorithm-1 roundings of one SDP solution.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct McRoundingStats {
    pub mean_cut: f64,
    pub std_error_cut: f64,
    /// Empirical distribution of the imbalance b = ½Σxᵢ.
    pub imbalance_histogram: BTreeMap<i64, u64>,
    pub mean_balanced_cut: f64,
    pub std_error_balanced_cut: f64,
    /// Per-vertex empirical mean of xᵢ (its bias).
    pub vertex_means: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
}

/// Run the rounding-and-rebalance steps `trials` times and aggregate.
pub fn mc_rounding_stats(
    graph: &Graph,
    sol: &SdpSolution,
    biases: &BiasVector,
    trials: u64,
    seed: u64,
) -> McRoundingStats {
    let n = sol.v.len();
    struct Partial {
        sum_cut: f64,
        sum_cut_sq: f64,
        sum_bal: f64,
        sum_bal_sq: f64,
        hist: BTreeMap<i64, u64>,
        vertex_sums: Vec<f64>,
    }
    let n_blocks = trials.div_ceil(BLOCK);
    let partials: Vec<Partial> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let count = BLOCK.min(trials - b * BLOCK);
            let mut p = Partial {
                sum_cut: 0.0,
                sum_cut_sq: 0.0,
                sum_bal: 0.0,
                sum_bal_sq: 0.0,
                hist: BTreeMap::new(),
                vertex_sums: vec![0.0; n],
            };
            for t in 0..count {
                let trial_seed = seed
                    .wrapping_mul(0x9e37_79b9_7f4a_7c15)
                    .wrapping_add(b * BLOCK + t);
                let x = round_once(sol, biases, trial_seed);
                let imbalance = x.iter().map(|&v| i64::from(v)).sum::<i64>() / 2;
                *p.hist.entry(imbalance).or_insert(0) += 1;
                let vx = cut_value(graph, &x).expect("consistent dimensions");
                p.sum_cut += vx;
                p.sum_cut_sq += vx * vx;
                let y = rebalance(&x, trial_seed).expect("even n");
                let vy = cut_value(graph, &y).expect("consistent dimensions");
                p.sum_bal += vy;
                p.sum_bal_sq += vy * vy;
                for (s, &xi) in p.vertex_sums.iter_mut().zip(&x) {
                    *s += f64::from(xi);
                }
            }
            p
        })
        .collect();

    let mut hist = BTreeMap::new();
    let mut sum_cut = 0.0;
    let mut sum_cut_sq = 0.0;
    let mut sum_bal = 0.0;
    let mut sum_bal_sq = 0.0;
    let mut vertex_sums = vec![0.0; n];
    for p in partials {
        sum_cut += p.sum_cut;
        sum_cut_sq += p.sum_cut_sq;
        sum_bal += p.sum_bal;
        sum_bal_sq += p.sum_bal_sq;
        for (k, v) in p.hist {
            *hist.entry(k).or_insert(0) += v;
        }
        for (acc, s) in vertex_sums.iter_mut().zip(&p.vertex_sums) {
            *acc += s;
        }
    }
    let cut = McEstimate::from_sums(sum_cut, sum_cut_sq, trials, seed);
    let bal = McEstimate::from_sums(sum_bal, sum_bal_sq, trials, seed);
    McRoundingStats {
        mean_cut: cut.mean,
        std_error_cut: cut.std_error,
        imbalance_histogram: hist,
        mean_balanced_cut: bal.mean,
        std_error_balanced_cut: bal.std_error,
        vertex_means: vertex_sums
            .into_iter()
            .map(|s| s / trials as f64)
            .collect(),
        trials,
        seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian;
    use crate::rounding::select_bias_linear;

    #[test]
    fn same_side_independent_fair_coins() {
        let est = mc_same_side_prob(0.0, 0.0, 0.0, 1_000_000, 1);
        assert!(est.sigmas_from(0.5) < 4.0, "{est:?}");
    }

    #[test]
    fn same_side_perfect_correlation_equal_biases() {
        let est = mc_same_side_prob(1.0, 0.3, 0.3, 100_000, 2);
        assert_eq!(est.mean, 1.0);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn same_side_matches_lambda() {
        let est = mc_same_side_prob(0.7, 0.3, -0.2, 10_000_000, 3);
        let lam = gaussian::lambda_fn(0.7, 0.3, -0.2).unwrap();
        assert!(
            est.sigmas_from(lam.mid()) < 4.0,
            "{est:?} vs {:?}",
            lam.value()
        );
    }

    #[test]
    fn gamma_quadrant_oracle() {
        let est = mc_gamma_quadrant(0.5, 0.5, 0.5, 4_000_000, 4);
        assert!(est.sigmas_from(1.0 / 3.0) < 4.0, "{est:?}");
    }

    #[test]
    fn determinism_across_worker_counts() {
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| mc_same_side_prob(0.4, 0.1, -0.3, 300_000, 42));
        let multi = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| mc_same_side_prob(0.4, 0.1, -0.3, 300_000, 42));
        assert_eq!(single, multi);
        let again = mc_same_side_prob(0.4, 0.1, -0.3, 300_000, 42);
        assert_eq!(single, again);
    }

    #[test]
    fn brute_force_small_graphs() {
        let (v, x) = brute_force_max_bisection(&Graph::cycle(4)).unwrap();
        assert_eq!(v, 4.0);
        assert_eq!(x.iter().map(|&b| i64::from(b)).sum::<i64>(), 0);

        let (v, _) = brute_force_max_bisection(&Graph::complete(4)).unwrap();
        assert_eq!(v, 4.0);

        // Two disjoint edges: both cut.
        let g = Graph::new(4, vec![(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        let (v, _) = brute_force_max_bisection(&g).unwrap();
        assert_eq!(v, 2.0);

        assert!(brute_force_max_bisection(&Graph::cycle(5)).is_err());
        let big = Graph::cycle(26);
        assert!(matches!(
            brute_force_max_bisection(&big),
            Err(OracleError::TooLarge(26))
        ));
    }

    #[test]
    fn brute_force_weighted() {
        // Heavy edge must be cut even at the cost of both light ones.
        let g = Graph::new(
            4,
            vec![(0, 1, 10.0), (0, 2, 1.0), (1, 3, 1.0), (2, 3, 0.5)],
        )
        .unwrap();
        let (v, x) = brute_force_max_bisection(&g).unwrap();
        assert!(x[0] != x[1]);
        assert!(v >= 10.0);
    }

    #[test]
    fn rounding_stats_on_orthogonal_solution() {
        // Integral embedding gives mutually orthogonal w̄'s; with r = 0 the
        // xᵢ are independent fair coins.
        let g = Graph::cycle(4);
        let sol = SdpSolution::integral_embedding(&[1, -1, 1, -1]);
        let biases = select_bias_linear(&[0.0, 0.0, 0.0, 0.0], 0.0).unwrap();
        let stats = mc_rounding_stats(&g, &sol, &biases, 200_000, 5);
        // Imbalance histogram vs binomial(4, 1/2): b = (#plus) - 2.
        let probs = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];
        for (k, p) in (-2..=2).zip(probs) {
            let observed = *stats.imbalance_histogram.get(&k).unwrap_or(&0) as f64;
            let expected = p * stats.trials as f64;
            let sd = (stats.trials as f64 * p * (1.0 - p)).sqrt();
            assert!(
                (observed - expected).abs() < 5.0 * sd,
                "bin {k}: {observed} vs {expected}"
            );
        }
        for m in &stats.vertex_means {
            assert!(m.abs() < 4.0 / (stats.trials as f64).sqrt() + 1e-3);
        }
        // Every rebalanced cut of C4 is a bisection; mean in [2, 4].
        assert!(stats.mean_balanced_cut >= 2.0 && stats.mean_balanced_cut <= 4.0);
    }

    #[test]
    fn rounding_stats_bias_matches_r() {
        let g = Graph::cycle(4);
        let sol = SdpSolution::integral_embedding(&[1, -1, 1, -1]);
        let biases = select_bias_linear(&[0.5, -0.5, 0.25, -0.25], 0.8).unwrap();
        let stats = mc_rounding_stats(&g, &sol, &biases, 400_000, 6);
        for (m, r) in stats.vertex_means.iter().zip(biases.values()) {
            let se = (1.0 - r * r).max(0.0).sqrt() / (stats.trials as f64).sqrt();
            assert!((m - r).abs() < 4.0 * se + 1e-3, "{m} vs {r}");
        }
    }

    #[test]
    fn covariance_identity_against_gamma() {
        // Two vertices with correlated w̄'s: Cov[x₁,x₂] = 4Γ(q₁,q₂) - 4q₁q₂.
        let rho_t = 0.6f64;
        let v0 = vec![1.0, 0.0, 0.0];
        let mu = [0.3f64, -0.3];
        let w1 = [0.0f64, 1.0, 0.0];
        let w2 = [0.0, rho_t, (1.0 - rho_t * rho_t).sqrt()];
        let v = vec![
            (0..3)
                .map(|k| mu[0] * v0[k] + (1.0 - mu[0] * mu[0]).sqrt() * w1[k])
                .collect::<Vec<f64>>(),
            (0..3)
                .map(|k| mu[1] * v0[k] + (1.0 - mu[1] * mu[1]).sqrt() * w2[k])
                .collect::<Vec<f64>>(),
        ];
        let g = Graph::new(2, vec![(0, 1, 1.0)]).unwrap();
        let sol = SdpSolution::from_vectors(v0, v);
        let r = [0.2, -0.2];
        let biases = crate::rounding::BiasVector::from_values(vec![0.2, -0.2]).unwrap();
        let trials = 2_000_000u64;
        // Sample means of x₁x₂ and x₁, x₂ individually.
        let stats = mc_rounding_stats(&g, &sol, &biases, trials, 7);
        // Empirical covariance from Pr[x₁ = x₂] = Λ: Cov = 2Λ - 1 - r₁r₂.
        let lam_emp = 1.0 - stats.mean_cut; // edge cut prob = 1 - Λ
        let cov_emp = 2.0 * lam_emp - 1.0 - r[0] * r[1];
        let q1 = 0.5 * (1.0 - r[0]);
        let q2 = 0.5 * (1.0 - r[1]);
        let gam = gaussian::bivariate_cdf(rho_t, q1, q2).unwrap().mid();
        let cov_expect = 4.0 * gam - 4.0 * q1 * q2;
        let se = 4.0 / (trials as f64).sqrt();
        assert!(
            (cov_emp - cov_expect).abs() < 4.0 * se,
            "{cov_emp} vs {cov_expect}"
        );
    }
}
