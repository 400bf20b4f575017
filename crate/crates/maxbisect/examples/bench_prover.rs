use maxbisect::pipeline::Mode;
use maxbisect::prover::{verify, ProverParams, VerifyOptions};
use std::time::Instant;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let target: f64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(0.5);
    let depth: u32 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(20);
    let mode = args.get(3).map(|s| s.as_str()).unwrap_or("linear");
    let params = if mode == "linear" {
        ProverParams {
            mode: Mode::Linear,
            cparam: 0.86451,
            boost: None,
            delta: 1e-5,
        }
    } else {
        ProverParams {
            mode: Mode::Pairing,
            cparam: 0.8056,
            boost: Some(maxbisect::rounding::BoostFunction::new(0.478, 1.618).unwrap()),
            delta: 1e-5,
        }
    };
    let opts = VerifyOptions {
        target,
        max_depth: depth,
        workers: 8,
        record_leaves: false,
    };
    let t0 = Instant::now();
    let cert = verify(&params, &opts);
    println!(
        "target {target} depth {depth} {mode}: certified={} counts={:?} max_depth={} in {:.1}s",
        cert.is_certified(),
        cert.counts,
        cert.max_depth,
        t0.elapsed().as_secs_f64()
    );
}
