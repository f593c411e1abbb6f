//! Predicted rate `|z|` over part of the complex sigma1-plane for each scheme,
//! rendered as a coarse character plot.
//!
//! `cargo run --example rate_contours`

use num_complex::Complex64;
use subspace_fft::analysis::{predicted_rate, rate_contours, Window};
use subspace_fft::transform::{SchemeKind, SpectralInterval};

fn glyph(v: Option<f64>) -> char {
    match v {
        None => 'x',
        Some(v) if v < 0.2 => ' ',
        Some(v) if v < 0.4 => '.',
        Some(v) if v < 0.6 => ':',
        Some(v) if v < 0.8 => '+',
        Some(v) if v < 1.0 => '#',
        Some(_) => '@',
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let interval = SpectralInterval::square_array_widened();
    let window = Window::new(-5.0, 5.0, -3.0, 3.0)?;
    for scheme in SchemeKind::ALL {
        let grid = rate_contours(scheme, Some(&interval), window, (61, 19))?;
        println!("{scheme}  (x: undefined, @: |z| >= 1)");
        for ii in (0..grid.ni).rev() {
            let row: String = (0..grid.nr).map(|ir| glyph(grid.value(ir, ii))).collect();
            println!("  |{row}|");
        }
    }
    for s in [2.0, 10.0, 100.0] {
        let s1 = Complex64::new(s, 0.0);
        println!(
            "sigma1 = {s:>5}: em {:.4}  em_sub {:.4}",
            predicted_rate(SchemeKind::EyreMilton, s1, None)?,
            predicted_rate(SchemeKind::EyreMiltonSub, s1, Some(&interval))?
        );
    }
    Ok(())
}
