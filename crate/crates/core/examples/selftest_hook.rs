//! The invariant suite run against the shipped projection and against a
//! deliberately broken one.
//!
//! `cargo run --release --example selftest_hook`

use num_complex::Complex64;
use subspace_fft::cli::{cmd_selftest, cmd_selftest_with, selftest::SELFTEST_GRID};
use subspace_fft::spectral_ops::{FourierProjector, GradientProjection, VectorField};

struct Leaky(FourierProjector);

impl GradientProjection for Leaky {
    fn gamma1(&self, f: &VectorField) -> VectorField {
        let mut g = self.0.gamma1(f);
        g.add_scaled(Complex64::new(1e-6, 0.0), f);
        g
    }
}

fn main() {
    print!("{}", cmd_selftest().report);
    println!();
    let broken = Leaky(FourierProjector::new(SELFTEST_GRID, SELFTEST_GRID));
    print!("{}", cmd_selftest_with(&broken).report);
}
