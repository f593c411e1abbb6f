//! Residual histories of the four schemes at sigma1 = 0 with a 200-iteration
//! cap, measured rates next to the predicted `|z|`.
//!
//! `cargo run --release --example acceleration`

use num_complex::Complex64;
use subspace_fft::analysis::{predicted_rate, RATE_WINDOW};
use subspace_fft::geometry::build_square_array;
use subspace_fft::solvers::{estimate_rate, solve, SolverConfig};
use subspace_fft::transform::{SchemeKind, SpectralInterval};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let map = build_square_array(128, 0.5)?;
    let interval = SpectralInterval::square_array_widened();
    let s1 = Complex64::new(0.0, 0.0);
    println!("{:<10} {:>8} {:>8} {:>8} {:>10} {:>10}", "scheme", "1e-3 at", "1e-8 at", "iters", "rate", "predicted");
    for scheme in SchemeKind::ALL {
        let cfg = SolverConfig::new(scheme, s1).with_interval(interval).with_max_iters(200);
        let predicted = predicted_rate(scheme, s1, Some(&interval))
            .map_or_else(|e| format!("({e})"), |r| format!("{r:.4}"));
        match solve(&map, &cfg) {
            Ok(r) => {
                let at = |x: f64| r.history.first_below(x).map_or("-".to_string(), |k| k.to_string());
                let rate = estimate_rate(&r.history, RATE_WINDOW).map_or("-".to_string(), |v| format!("{v:.4}"));
                println!(
                    "{:<10} {:>8} {:>8} {:>8} {:>10} {:>10}",
                    scheme.name(),
                    at(1e-3),
                    at(1e-8),
                    r.iterations(),
                    rate,
                    predicted
                );
            }
            Err(e) => println!("{:<10} not run: {e}", scheme.name()),
        }
    }
    Ok(())
}
