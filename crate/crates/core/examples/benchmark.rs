//! The 25% square array of squares against the exact formula, all four
//! schemes, at an insulating and a conducting inclusion.
//!
//! `cargo run --release --example benchmark -- [n]`

use num_complex::Complex64;
use subspace_fft::analysis::obnosov;
use subspace_fft::geometry::build_square_array;
use subspace_fft::solvers::{solve, SolverConfig};
use subspace_fft::transform::{SchemeKind, SpectralInterval};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: usize = std::env::args().nth(1).map_or(Ok(128), |s| s.parse())?;
    let map = build_square_array(n, 0.5)?;
    for sigma1 in [2.0, 0.0] {
        let s1 = Complex64::new(sigma1, 0.0);
        let exact = obnosov(s1)?;
        println!("sigma1 = {sigma1}, exact sigma* = {:.8}", exact.re);
        for scheme in SchemeKind::ALL {
            let cfg = SolverConfig::new(scheme, s1)
                .with_interval(SpectralInterval::square_array_widened())
                .with_tol(1e-10);
            match solve(&map, &cfg) {
                Ok(r) => println!(
                    "  {:<10} {:?} in {:>4} iterations: sigma* = {:.8}, error {:.2e}",
                    scheme.name(),
                    r.status,
                    r.iterations(),
                    r.sigma_star.re,
                    (r.sigma_star - exact).norm()
                ),
                Err(e) => println!("  {:<10} not run: {e}", scheme.name()),
            }
        }
    }
    Ok(())
}
