//! Desk-scale end-to-end Max Bisection: heuristic basic-SDP solve,
//! near-integral repair and smoothing of the vector solution, thresholded
//! hyperplane rounding with selected biases, and rebalancing to an exact
//! bisection.

mod sdp;

use crate::gaussian::fast;
use crate::rounding::{
    select_bias_linear, select_bias_pairing, BiasVector, BoostFunction, RoundingError,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PipelineError {
    #[error("graph error: {0}")]
    InvalidGraph(String),
    #[error("assignment length {got} does not match vertex count {want}")]
    DimensionMismatch { got: usize, want: usize },
    #[error("bisection requires an even vertex count, got {0}")]
    OddVertexCount(usize),
    #[error(transparent)]
    Rounding(#[from] RoundingError),
}

/// An undirected weighted graph without self-loops.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Graph {
    n: usize,
    edges: Vec<(u32, u32, f64)>,
}

impl Graph {
    pub fn new(n: usize, edges: Vec<(u32, u32, f64)>) -> Result<Graph, PipelineError> {
        for &(i, j, w) in &edges {
            if i == j {
                return Err(PipelineError::InvalidGraph(format!("self-loop at {i}")));
            }
            if i as usize >= n || j as usize >= n {
                return Err(PipelineError::InvalidGraph(format!(
                    "edge ({i},{j}) out of range for n={n}"
                )));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(PipelineError::InvalidGraph(format!(
                    "weight {w} on edge ({i},{j}) must be finite and nonnegative"
                )));
            }
        }
        Ok(Graph { n, edges })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(u32, u32, f64)] {
        &self.edges
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.2).sum()
    }

    pub(crate) fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(i, j, w) in &self.edges {
            adj[i as usize].push((j as usize, w));
            adj[j as usize].push((i as usize, w));
        }
        adj
    }

    /// Parse the text edge-list format: a header line `n m`, then one
    /// `i j weight` line per edge (0-indexed); `#` starts a comment.
    pub fn parse(text: &str) -> Result<Graph, PipelineError> {
        let mut lines = text.lines().filter_map(|l| {
            let l = l.split('#').next().unwrap_or("").trim();
            if l.is_empty() {
                None
            } else {
                Some(l)
            }
        });
        let header = lines
            .next()
            .ok_or_else(|| PipelineError::InvalidGraph("empty graph file".into()))?;
        let mut parts = header.split_whitespace();
        let n: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| PipelineError::InvalidGraph("bad header".into()))?;
        let m: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| PipelineError::InvalidGraph("bad header".into()))?;
        let mut edges = Vec::with_capacity(m);
        for line in lines {
            let mut it = line.split_whitespace();
            let i: u32 = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| PipelineError::InvalidGraph(format!("bad edge line: {line}")))?;
            let j: u32 = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| PipelineError::InvalidGraph(format!("bad edge line: {line}")))?;
            let w: f64 = match it.next() {
                Some(s) => s
                    .parse()
                    .map_err(|_| PipelineError::InvalidGraph(format!("bad weight: {line}")))?,
                None => 1.0,
            };
            edges.push((i, j, w));
        }
        if edges.len() != m {
            return Err(PipelineError::InvalidGraph(format!(
                "header promises {m} edges, found {}",
                edges.len()
            )));
        }
        Graph::new(n, edges)
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.edges.len());
        for &(i, j, w) in &self.edges {
            let _ = writeln!(out, "{i} {j} {w}");
        }
        out
    }

    pub fn cycle(n: usize) -> Graph {
        let edges = (0..n)
            .map(|i| (i as u32, ((i + 1) % n) as u32, 1.0))
            .collect();
        Graph::new(n, edges).expect("valid cycle")
    }

    pub fn complete(n: usize) -> Graph {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                edges.push((i as u32, j as u32, 1.0));
            }
        }
        Graph::new(n, edges).expect("valid complete graph")
    }

    pub fn complete_bipartite(a: usize, b: usize) -> Graph {
        let mut edges = Vec::new();
        for i in 0..a {
            for j in 0..b {
                edges.push((i as u32, (a + j) as u32, 1.0));
            }
        }
        Graph::new(a + b, edges).expect("valid bipartite graph")
    }
}

/// Number of edges (weight) cut by a ±1 assignment: ½Σw(1 - xᵢxⱼ).
pub fn cut_value(graph: &Graph, x: &[i8]) -> Result<f64, PipelineError> {
    if x.len() != graph.n {
        return Err(PipelineError::DimensionMismatch {
            got: x.len(),
            want: graph.n,
        });
    }
    Ok(graph
        .edges
        .iter()
        .map(|&(i, j, w)| {
            0.5 * w * (1.0 - f64::from(x[i as usize]) * f64::from(x[j as usize]))
        })
        .sum())
}

/// SDP objective of a vector solution: ½Σw(1 - ⟨vᵢ, vⱼ⟩).
pub fn sdp_value(graph: &Graph, sol: &SdpSolution) -> Result<f64, PipelineError> {
    if sol.v.len() != graph.n {
        return Err(PipelineError::DimensionMismatch {
            got: sol.v.len(),
            want: graph.n,
        });
    }
    Ok(graph
        .edges
        .iter()
        .map(|&(i, j, w)| 0.5 * w * (1.0 - dot(&sol.v[i as usize], &sol.v[j as usize])))
        .sum())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A unit-vector solution with the derived rounding data: μᵢ = ⟨v₀, vᵢ⟩
/// and the normalized orthogonal parts w̄ᵢ (vertices with ‖wᵢ‖ = 0 get a
/// fresh axis orthogonal to everything else).
#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub v0: Vec<f64>,
    pub v: Vec<Vec<f64>>,
    pub mu: Vec<f64>,
    pub wbar: Vec<Vec<f64>>,
    /// Ambient dimension of the w̄ vectors (≥ dimension of v).
    pub wdim: usize,
    /// Set when the balance penalty failed to converge.
    pub nonconvergence_warning: bool,
}

impl SdpSolution {
    /// Derive μ and w̄ from v0/v, enforcing Σμᵢ = 0 exactly by subtracting
    /// the mean, then re-deriving the orthogonal parts.
    fn derive(v0: Vec<f64>, v: Vec<Vec<f64>>, warn: bool) -> SdpSolution {
        let n = v.len();
        let dim = v0.len();
        let mut mu: Vec<f64> = v.iter().map(|vi| dot(&v0, vi)).collect();
        let mean = mu.iter().sum::<f64>() / n.max(1) as f64;
        for m in mu.iter_mut() {
            *m = (*m - mean).clamp(-1.0, 1.0);
        }

        let mut zero_w = Vec::new();
        let mut wbar: Vec<Vec<f64>> = Vec::with_capacity(n);
        for (i, vi) in v.iter().enumerate() {
            let mut w: Vec<f64> = vi
                .iter()
                .zip(&v0)
                .map(|(vik, v0k)| vik - mu[i] * v0k)
                .collect();
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-9 {
                zero_w.push(i);
                wbar.push(Vec::new()); // placeholder, filled below
            } else {
                for x in w.iter_mut() {
                    *x /= norm;
                }
                wbar.push(w);
            }
        }
        // Fresh orthogonal axes for degenerate vertices.
        let wdim = dim + zero_w.len();
        for w in wbar.iter_mut() {
            w.resize(wdim, 0.0);
        }
        for (k, &i) in zero_w.iter().enumerate() {
            wbar[i][dim + k] = 1.0;
        }
        SdpSolution {
            v0,
            v,
            mu,
            wbar,
            wdim,
            nonconvergence_warning: warn,
        }
    }

    /// Build a solution from explicit unit vectors, deriving μ and w̄.
    pub fn from_vectors(v0: Vec<f64>, v: Vec<Vec<f64>>) -> SdpSolution {
        SdpSolution::derive(v0, v, false)
    }

    /// Embed an integral ±1 assignment as an SDP solution (vᵢ = xᵢ·v₀).
    pub fn integral_embedding(x: &[i8]) -> SdpSolution {
        let dim = 2;
        let v0 = vec![1.0, 0.0];
        let v: Vec<Vec<f64>> = x.iter().map(|&xi| vec![f64::from(xi), 0.0]).collect();
        SdpSolution::derive(v0, v, false)
    }

    pub fn dim(&self) -> usize {
        self.v0.len()
    }
}

/// Heuristic basic SDP solve; see the module docs of `sdp` for the
/// method. The returned solution is feasible within tolerance but not
/// certified optimal.
pub fn solve_basic_sdp(graph: &Graph, rank: usize, iterations: usize, seed: u64) -> SdpSolution {
    solve_basic_sdp_seeded(graph, rank, iterations, seed, None)
}

/// As [`solve_basic_sdp`], with an optional warm-start row matrix (e.g.
/// an integral embedding); the solver's sweeps are monotone, so warm
/// starts can only help.
pub fn solve_basic_sdp_seeded(
    graph: &Graph,
    rank: usize,
    iterations: usize,
    seed: u64,
    init: Option<&[Vec<f64>]>,
) -> SdpSolution {
    let result = sdp::solve_low_rank(graph, rank, iterations, seed, init);
    let rows = result.rows;
    let dim = rows.first().map_or(2, |r| r.len());

    // v0 must be exactly orthogonal to Σvᵢ so that Σμᵢ = 0; Gram-Schmidt
    // the most-orthogonal coordinate axis against the sum direction.
    let mut s = vec![0.0f64; dim];
    for row in &rows {
        for (sk, rk) in s.iter_mut().zip(row) {
            *sk += rk;
        }
    }
    let s_norm = s.iter().map(|x| x * x).sum::<f64>().sqrt();
    let v0 = if s_norm < 1e-12 {
        let mut e = vec![0.0; dim];
        e[0] = 1.0;
        e
    } else {
        let shat: Vec<f64> = s.iter().map(|x| x / s_norm).collect();
        let k = (0..dim)
            .min_by(|&a, &b| shat[a].abs().partial_cmp(&shat[b].abs()).unwrap())
            .unwrap();
        let mut e = vec![0.0; dim];
        e[k] = 1.0;
        let proj = shat[k];
        for (ek, sk) in e.iter_mut().zip(&shat) {
            *ek -= proj * sk;
        }
        let norm = e.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in e.iter_mut() {
            *x /= norm;
        }
        e
    };
    SdpSolution::derive(v0, rows, !result.converged)
}

/// Default low-rank factorization width: ⌈√(2n)⌉ + 2.
pub fn default_rank(n: usize) -> usize {
    ((2.0 * n as f64).sqrt().ceil() as usize) + 2
}

/// Mix each vector with a fresh orthogonal axis so that every |μ′ᵢ| ≤ 1-δ
/// and |ρ′ᵢⱼ| ≤ (1-δ)²: v′ᵢ = (1-δ)vᵢ + √(2δ-δ²)·uᵢ. Scales μᵢ by (1-δ)
/// and ρᵢⱼ by (1-δ)², preserves Σμᵢ = 0, and costs at most δ·(total
/// weight) of SDP value.
pub fn smooth_solution(sol: &SdpSolution, delta: f64) -> SdpSolution {
    assert!((0.0..1.0).contains(&delta));
    if delta == 0.0 {
        return sol.clone();
    }
    let n = sol.v.len();
    let dim = sol.dim();
    let new_dim = dim + n;
    let a = 1.0 - delta;
    let b = (2.0 * delta - delta * delta).sqrt();

    let mut v0 = sol.v0.clone();
    v0.resize(new_dim, 0.0);
    let v: Vec<Vec<f64>> = sol
        .v
        .iter()
        .enumerate()
        .map(|(i, vi)| {
            let mut out = vec![0.0; new_dim];
            for (k, x) in vi.iter().enumerate() {
                out[k] = a * x;
            }
            out[dim + i] = b;
            out
        })
        .collect();
    SdpSolution::derive(v0, v, sol.nonconvergence_warning)
}

/// Replace the orthogonal part of near-integral vectors (‖wᵢ‖ below the
/// threshold) by a fresh axis of the same length: μ's are unchanged and
/// the affected ρᵢⱼ become μᵢμⱼ, moving any inner product by at most the
/// threshold.
pub fn repair_near_integral(sol: &SdpSolution, threshold: f64) -> SdpSolution {
    let n = sol.v.len();
    let dim = sol.dim();
    let affected: Vec<usize> = (0..n)
        .filter(|&i| {
            let w_norm_sq = (1.0 - sol.mu[i] * sol.mu[i]).max(0.0);
            w_norm_sq.sqrt() < threshold
        })
        .collect();
    if affected.is_empty() {
        return sol.clone();
    }
    let new_dim = dim + affected.len();
    let mut v0 = sol.v0.clone();
    v0.resize(new_dim, 0.0);
    let mut v: Vec<Vec<f64>> = sol
        .v
        .iter()
        .map(|vi| {
            let mut out = vi.clone();
            out.resize(new_dim, 0.0);
            out
        })
        .collect();
    for (k, &i) in affected.iter().enumerate() {
        let mu = sol.mu[i];
        let w_len = (1.0 - mu * mu).max(0.0).sqrt();
        for (slot, v0k) in v[i].iter_mut().zip(&v0) {
            *slot = mu * v0k;
        }
        v[i][dim + k] = w_len;
    }
    SdpSolution::derive(v0, v, sol.nonconvergence_warning)
}

/// Mean absolute inner product of the normalized orthogonal parts over
/// unordered vertex pairs i < j (diagonal pairs excluded).
pub fn measure_uncorrelation(sol: &SdpSolution) -> f64 {
    let n = sol.wbar.len();
    if n < 2 {
        return 0.0;
    }
    let mut total = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            total += dot(&sol.wbar[i], &sol.wbar[j]).abs();
        }
    }
    total / (n * (n - 1) / 2) as f64
}

/// One thresholded-hyperplane rounding: draw a standard Gaussian g and set
/// xᵢ = -1 iff ⟨w̄ᵢ, g⟩ < Φ⁻¹((1-rᵢ)/2).
pub fn round_once(sol: &SdpSolution, biases: &BiasVector, seed: u64) -> Vec<i8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g: Vec<f64> = (0..sol.wdim)
        .map(|_| fast::inv_cdf(open_unit(&mut rng)))
        .collect();
    sol.wbar
        .iter()
        .zip(biases.values())
        .map(|(w, &r)| {
            let t = fast::inv_cdf(0.5 * (1.0 - r));
            if dot(w, &g) < t {
                -1
            } else {
                1
            }
        })
        .collect()
}

fn open_unit(rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.gen();
    u.max(f64::MIN_POSITIVE).min(1.0 - f64::EPSILON)
}

/// Rebalance to an exact bisection: flip a uniformly random set of |b|
/// majority-side vertices, b = ½Σxᵢ.
pub fn rebalance(x: &[i8], seed: u64) -> Result<Vec<i8>, PipelineError> {
    if x.len() % 2 != 0 {
        return Err(PipelineError::OddVertexCount(x.len()));
    }
    let sum: i64 = x.iter().map(|&v| i64::from(v)).sum();
    let b = sum / 2;
    if b == 0 {
        return Ok(x.to_vec());
    }
    let majority: i8 = if b > 0 { 1 } else { -1 };
    let mut candidates: Vec<usize> = (0..x.len()).filter(|&i| x[i] == majority).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eba_1a9c_0ffe_e000);
    let mut y = x.to_vec();
    // Partial Fisher-Yates: the first |b| entries are a uniform subset.
    let k = b.unsigned_abs() as usize;
    for i in 0..k {
        let j = rng.gen_range(i..candidates.len());
        candidates.swap(i, j);
        y[candidates[i]] = -majority;
    }
    debug_assert_eq!(y.iter().map(|&v| i64::from(v)).sum::<i64>(), 0);
    Ok(y)
}

/// Which bias selection algorithm drives the rounding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Linear,
    Pairing,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct RoundingParams {
    pub mode: Mode,
    pub cparam: f64,
    pub boost: Option<BoostFunction>,
    pub delta_smooth: f64,
    pub trials: u32,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunStats {
    pub mean_cut_x: f64,
    pub std_cut_x: f64,
    pub mean_cut_y: f64,
    pub std_cut_y: f64,
    pub mean_abs_imbalance: f64,
    pub sdp_value: f64,
    pub uncorrelation: f64,
    pub nonconvergence_warning: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub best_y: Vec<i8>,
    pub best_value: f64,
    pub stats: RunStats,
}

/// End-to-end pipeline: solve, repair near-integral vectors, smooth,
/// select biases, round `trials` times with rebalancing, return the best
/// bisection found.
pub fn run_max_bisection(
    graph: &Graph,
    params: &RoundingParams,
) -> Result<RunReport, PipelineError> {
    if graph.n % 2 != 0 {
        return Err(PipelineError::OddVertexCount(graph.n));
    }
    let solved = solve_basic_sdp(graph, default_rank(graph.n), 60, params.seed);
    let repaired = repair_near_integral(&solved, 1e-6);
    let smoothed = smooth_solution(&repaired, params.delta_smooth);

    let biases = match params.mode {
        Mode::Linear => select_bias_linear(&smoothed.mu, params.cparam)?,
        Mode::Pairing => {
            let f = params.boost.unwrap_or_else(BoostFunction::zero);
            select_bias_pairing(&smoothed.mu, params.cparam, &f)?
        }
    };

    let sdp_val = sdp_value(graph, &smoothed)?;
    let mut best_y: Option<Vec<i8>> = None;
    let mut best_value = f64::NEG_INFINITY;
    let mut cuts_x = Vec::with_capacity(params.trials as usize);
    let mut cuts_y = Vec::with_capacity(params.trials as usize);
    let mut abs_imbalance = 0.0f64;
    for trial in 0..params.trials {
        let trial_seed = params
            .seed
            .wrapping_mul(0x9e37_79b9_7f4a_7c15)
            .wrapping_add(u64::from(trial));
        let x = round_once(&smoothed, &biases, trial_seed);
        let b = x.iter().map(|&v| i64::from(v)).sum::<i64>() / 2;
        abs_imbalance += b.abs() as f64;
        let y = rebalance(&x, trial_seed)?;
        let vx = cut_value(graph, &x)?;
        let vy = cut_value(graph, &y)?;
        cuts_x.push(vx);
        cuts_y.push(vy);
        if vy > best_value {
            best_value = vy;
            best_y = Some(y);
        }
    }

    let stats = RunStats {
        mean_cut_x: mean(&cuts_x),
        std_cut_x: std_dev(&cuts_x),
        mean_cut_y: mean(&cuts_y),
        std_cut_y: std_dev(&cuts_y),
        mean_abs_imbalance: abs_imbalance / f64::from(params.trials.max(1)),
        sdp_value: sdp_val,
        uncorrelation: measure_uncorrelation(&smoothed),
        nonconvergence_warning: smoothed.nonconvergence_warning,
    };
    Ok(RunReport {
        best_y: best_y.unwrap_or_else(|| vec![1; graph.n]),
        best_value,
        stats,
    })
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}
