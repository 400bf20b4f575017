//! Heuristic low-rank (Burer-Monteiro style) solver for the basic SDP
//! relaxation with the balance constraint ‖Σvᵢ‖² = 0 enforced by a
//! quadratic penalty. Block-coordinate maximization: for fixed other rows
//! the optimal unit vᵢ has the closed form cᵢ/‖cᵢ‖, so every sweep is
//! monotone in the penalized objective and needs no step size.

use super::Graph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub(crate) struct LowRankResult {
    pub rows: Vec<Vec<f64>>,
    pub converged: bool,
}

/// Maximize ½Σw(1-⟨vᵢ,vⱼ⟩) - λ‖Σvᵢ‖² over unit rows, doubling λ until the
/// balance defect ‖Σvᵢ‖ is at most `balance_tol`, then project: subtract
/// the mean row and renormalize.
pub(crate) fn solve_low_rank(
    graph: &Graph,
    rank: usize,
    iterations: usize,
    seed: u64,
    init: Option<&[Vec<f64>]>,
) -> LowRankResult {
    let n = graph.n();
    let rank = rank.max(2);
    let mut rows: Vec<Vec<f64>> = match init {
        Some(rows) => rows
            .iter()
            .map(|r| {
                let mut v = r.clone();
                v.resize(rank, 0.0);
                normalize(&mut v);
                v
            })
            .collect(),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n)
                .map(|_| {
                    let mut v: Vec<f64> = (0..rank)
                        .map(|_| {
                            crate::gaussian::fast::inv_cdf(open_unit(&mut rng))
                        })
                        .collect();
                    normalize(&mut v);
                    v
                })
                .collect()
        }
    };

    let adjacency = graph.adjacency();
    let balance_tol = 1e-6 * n as f64;
    let mut lambda = (graph.total_weight() / n.max(1) as f64).max(1.0);
    let mut converged = false;

    let mut sum = column_sum(&rows, rank);
    for _outer in 0..24 {
        for _sweep in 0..iterations.max(1) {
            for i in 0..n {
                // c_i = -½ Σ_j w_ij v_j - 2λ (s - v_i)
                let mut c = vec![0.0f64; rank];
                for &(j, w) in &adjacency[i] {
                    for (ck, vjk) in c.iter_mut().zip(&rows[j]) {
                        *ck -= 0.5 * w * vjk;
                    }
                }
                for k in 0..rank {
                    c[k] -= 2.0 * lambda * (sum[k] - rows[i][k]);
                }
                let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 1e-300 {
                    for k in 0..rank {
                        let new = c[k] / norm;
                        sum[k] += new - rows[i][k];
                        rows[i][k] = new;
                    }
                }
            }
        }
        let defect = sum.iter().map(|x| x * x).sum::<f64>().sqrt();
        if defect <= balance_tol {
            converged = true;
            break;
        }
        lambda *= 2.0;
    }

    // Final projection: subtract the mean component and renormalize.
    let mean: Vec<f64> = sum.iter().map(|x| x / n as f64).collect();
    for row in rows.iter_mut() {
        for (rk, mk) in row.iter_mut().zip(&mean) {
            *rk -= mk;
        }
        normalize(row);
    }

    LowRankResult { rows, converged }
}

fn open_unit(rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.gen();
    u.max(f64::MIN_POSITIVE).min(1.0 - f64::EPSILON)
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 1e-300 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    } else {
        v[0] = 1.0;
        for x in v.iter_mut().skip(1) {
            *x = 0.0;
        }
    }
}

fn column_sum(rows: &[Vec<f64>], rank: usize) -> Vec<f64> {
    let mut s = vec![0.0f64; rank];
    for row in rows {
        for (sk, rk) in s.iter_mut().zip(row) {
            *sk += rk;
        }
    }
    s
}
