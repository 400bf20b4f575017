use maxbisect::gaussian::bivariate_cdf_tol;
use std::time::Instant;

fn main() {
    for &(rho, q) in &[
        (0.9999999f64, 0.0677f64),
        (0.999999999999, 0.0677),
        (1.0f64.next_down(), 0.0677),
        (1.0f64.next_down(), 0.932),
        (1.0f64.next_down(), 0.5),
    ] {
        for tol in [1e-5, 2e-7, 1e-9] {
            let t0 = Instant::now();
            let g = bivariate_cdf_tol(rho, q, q, tol).unwrap();
            println!(
                "rho={rho:.16} q={q} tol={tol:e}: width={:.3e} lo={:.6} in {:.3}s",
                g.width(),
                g.lo(),
                t0.elapsed().as_secs_f64()
            );
        }
    }
}
