use maxbisect::gaussian::bivariate_cdf_tol;
use std::time::Instant;

fn main() {
    let mut worst = Vec::new();
    for &rho in &[
        -0.9999999, -0.99999, -0.999, -0.97, -0.5, 0.0, 0.5, 0.97, 0.999, 0.99999, 0.9999999,
        0.999999999999, 1.0f64.next_down(),
    ] {
        for &q1 in &[1e-9, 1e-4, 0.0677, 0.3, 0.5, 0.9, 0.932, 0.9999, 1.0 - 1e-9] {
            for &q2 in &[1e-9, 0.0677, 0.5, 0.932, 1.0 - 1e-9] {
                let t0 = Instant::now();
                let g = bivariate_cdf_tol(rho, q1, q2, 2e-7).unwrap();
                let dt = t0.elapsed().as_secs_f64();
                worst.push((dt, rho, q1, q2, g.width()));
            }
        }
    }
    worst.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    println!("slowest gamma evaluations (tol 2e-7):");
    for (dt, rho, q1, q2, w) in worst.iter().take(12) {
        println!("  {:.4}s rho={rho} q1={q1} q2={q2} width={w:.2e}", dt);
    }
    let total: f64 = worst.iter().map(|w| w.0).sum();
    println!("total {total:.2}s over {} evals", worst.len());
}
