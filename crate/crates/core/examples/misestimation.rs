//! Solving with a wrongly assumed singular interval. Convergence survives as
//! long as the evaluation point stays inside the image of the true cut, only
//! slower.
//!
//! `cargo run --release --example misestimation`

use num_complex::Complex64;
use subspace_fft::analysis::misestimation_report;
use subspace_fft::geometry::build_square_array;
use subspace_fft::solvers::SolverConfig;
use subspace_fft::transform::{SchemeKind, SpectralInterval};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let map = build_square_array(128, 0.5)?;
    let s1 = Complex64::new(0.0, 0.0);
    let cfg = SolverConfig::new(SchemeKind::EyreMiltonSub, s1).with_tol(1e-8).with_max_iters(500);
    let exact = SpectralInterval::square_array_exact();
    for assumed in [(0.25, 4.0), (0.6, 4.0), (1.0 / 3.0, 2.0)] {
        let assumed = SpectralInterval::new(assumed.0, assumed.1)?;
        let rep = misestimation_report(&map, s1, exact, assumed, &cfg)?;
        for (label, run) in [("true", &rep.true_run), ("assumed", &rep.assumed_run)] {
            println!(
                "{label:<8} [{:.4}, {:.4}]: {:?} in {:>3} iterations, rate {}, predicted {:.4}",
                run.interval.alpha(),
                run.interval.beta(),
                run.status,
                run.iterations,
                run.estimated_rate.map_or("-".into(), |r| format!("{r:.4}")),
                run.predicted_rate
            );
        }
        println!();
    }
    Ok(())
}
