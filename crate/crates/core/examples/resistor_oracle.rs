//! The compound-resistor replacement behind the substitution, as a check on
//! the fractional-linear maps.
//!
//! `cargo run --example resistor_oracle`

use num_complex::Complex64;
use subspace_fft::transform::{compound_resistance, map_t, resistor_substitution_map, SpectralInterval};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for s in [0.0, 1.0, f64::INFINITY] {
        let z = resistor_substitution_map(Complex64::new(s, 0.0), 1.0, 1.0, 1.0, 1.0)?;
        println!("k = (1,1,1): sigma1 = {s:>4} -> {:.6}", z.re);
    }
    println!("R1 = 2, R2 = 1, k = (1,1,1): compound {:.6}", compound_resistance(2.0, 1.0, 1.0, 1.0, 1.0)?);

    let iv = SpectralInterval::square_array_widened();
    for s in [-4.0, -1.0, -0.25, 0.0, 1.0] {
        let t = map_t(Complex64::new(s, 0.0), &iv);
        println!("map_t({s:>5}) = {}", t.map_or_else(|e| e.to_string(), |t| format!("{:.6}", t.re)));
    }
    Ok(())
}
