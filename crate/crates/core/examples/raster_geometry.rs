//! Geometry builders and the plain-text raster format.
//!
//! `cargo run --example raster_geometry`

use subspace_fft::geometry::{build_disk_array, build_square_array, load_raster, save_raster, volume_fraction};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let square = build_square_array(8, 0.5)?;
    let text = save_raster(&square);
    print!("{text}");
    let back = load_raster(&text)?;
    assert_eq!(back, square);
    println!("square, side 1/2: fraction {:?}", volume_fraction(&square).reduced());

    for (n, r) in [(16, 0.25), (64, 0.25), (256, 0.25)] {
        let disk = build_disk_array(n, r)?;
        let f = volume_fraction(&disk);
        println!(
            "disk n = {n:>3}, r = {r}: fraction {:.5} (continuum {:.5})",
            f.as_f64(),
            std::f64::consts::PI * r * r
        );
    }

    match build_square_array(10, 0.25) {
        Ok(_) => println!("unexpected: side 2.5 pixels accepted"),
        Err(e) => println!("rejected: {e}"),
    }
    match load_raster("P-PHASE 2 2\n0 1\n1 x\n") {
        Ok(_) => println!("unexpected: bad token accepted"),
        Err(e) => println!("rejected: {e}"),
    }
    Ok(())
}
