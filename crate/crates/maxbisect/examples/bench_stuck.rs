use maxbisect::config::{ConfigCube, CubeClass, SmoothParams};
use maxbisect::interval::Interval;
use maxbisect::pipeline::Mode;
use maxbisect::prover::{bound_alpha_on_cube, ProverParams};

fn main() {
    let params = ProverParams {
        mode: Mode::Linear,
        cparam: 0.86451,
        boost: None,
        delta: 1e-5,
    };
    let smooth = SmoothParams::new(1e-5);
    let target = 0.5;

    // Recursive search for a few deep stuck cubes.
    let mut stuck: Vec<(u32, ConfigCube, f64)> = Vec::new();
    let mut stack = vec![(ConfigCube::root(), 0u32)];
    while let Some((cube, depth)) = stack.pop() {
        if stuck.len() >= 16 {
            break;
        }
        if cube.classify(smooth) == CubeClass::Outside {
            continue;
        }
        let enc = bound_alpha_on_cube(&cube, &params, smooth).unwrap();
        if enc.lo() > target {
            continue;
        }
        if depth >= 16 {
            stuck.push((depth, cube, enc.lo()));
            continue;
        }
        // Randomize descendance order so the sample is less biased.
        let mut children = cube.split();
        if depth % 3 == 0 { children.reverse(); }
        for ch in children {
            stack.push((ch, depth + 1));
        }
    }
    for (d, c, lo) in &stuck {
        let tr = c.tilde_rho(false).unwrap();
        println!(
            "depth {d} lower {lo:.4} mu1=[{:.6},{:.6}] mu2=[{:.6},{:.6}] rho=[{:.6},{:.6}] tr=[{:.6},{:.6}]",
            c.mu1.lo(), c.mu1.hi(), c.mu2.lo(), c.mu2.hi(), c.rho.lo(), c.rho.hi(), tr.lo(), tr.hi()
        );
    }
    let _ = Interval::ZERO;
}
