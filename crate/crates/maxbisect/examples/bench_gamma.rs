use maxbisect::gaussian::{bivariate_cdf_tol, lambda_fn_tol};
use std::time::Instant;

fn main() {
    for tol in [1e-6, 1e-8, 1e-10, 1e-12] {
        let t0 = Instant::now();
        let mut acc = 0.0;
        let n = 2000;
        for i in 0..n {
            let rho = -0.95 + 1.9 * (i as f64) / n as f64;
            let q1 = 0.05 + 0.9 * ((i * 7919) % n) as f64 / n as f64;
            let q2 = 0.05 + 0.9 * ((i * 104729) % n) as f64 / n as f64;
            let g = bivariate_cdf_tol(rho, q1, q2, tol).unwrap();
            acc += g.mid();
        }
        let dt = t0.elapsed().as_secs_f64();
        println!("gamma tol {tol:e}: {:.1} us/eval  (acc {acc:.3})", dt / n as f64 * 1e6);
    }
    // lambda with interval args as used by the prover (cube edge ~1e-2)
    let t0 = Instant::now();
    let n = 2000;
    let mut acc = 0.0;
    for i in 0..n {
        let c = -0.9 + 1.8 * (i as f64) / n as f64;
        let rho = maxbisect::interval::Interval::new(c, c + 0.01);
        let r1 = maxbisect::interval::Interval::new(0.1, 0.11);
        let r2 = maxbisect::interval::Interval::new(-0.3, -0.29);
        let l = lambda_fn_tol(rho, r1, r2, 1e-8).unwrap();
        acc += l.mid();
    }
    let dt = t0.elapsed().as_secs_f64();
    println!("lambda(iv) tol 1e-8: {:.1} us/eval (acc {acc:.3})", dt / n as f64 * 1e6);
}
