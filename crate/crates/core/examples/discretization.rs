//! The two discrete `Gamma1` operators on the same insulating-inclusion
//! problem. The truncated wave-vector operator stalls here while the rotated
//! difference operator converges at the predicted rate.
//!
//! `cargo run --release --example discretization -- [n]`

use num_complex::Complex64;
use subspace_fft::analysis::RATE_WINDOW;
use subspace_fft::geometry::build_square_array;
use subspace_fft::solvers::{estimate_rate, solve, SolverConfig};
use subspace_fft::spectral_ops::Discretization;
use subspace_fft::transform::{SchemeKind, SpectralInterval};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: usize = std::env::args().nth(1).map_or(Ok(64), |s| s.parse())?;
    let map = build_square_array(n, 0.5)?;
    for disc in Discretization::ALL {
        for sigma1 in [2.0, 0.0] {
            let cfg = SolverConfig::new(SchemeKind::EyreMiltonSub, Complex64::new(sigma1, 0.0))
                .with_interval(SpectralInterval::square_array_widened())
                .with_discretization(disc)
                .with_max_iters(300);
            let r = solve(&map, &cfg)?;
            println!(
                "{:<10} sigma1 = {sigma1}: {:?} after {} iterations, residual {:.2e}, rate {}, sigma* = {:.6}",
                disc.name(),
                r.status,
                r.iterations(),
                r.final_residual(),
                estimate_rate(&r.history, RATE_WINDOW).map_or("-".into(), |v| format!("{v:.4}")),
                r.sigma_star.re
            );
        }
    }
    Ok(())
}
