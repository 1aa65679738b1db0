//! Where the removed detail lives in frequency.

use scalepath::spectral::{expected_spectral_diff, high_band_energy};
use scalepath::{run_path, synth, HyperParams, Image, ImagePlane, PathConfig};

fn main() -> scalepath::Result<()> {
    let (n, radius) = (32, 6.0);
    let mut originals = Vec::new();
    let mut smoothed = Vec::new();
    for seed in 0..8 {
        let x = synth::scene(n, n, seed)?;
        let res = run_path(
            &Image::Gray(x.clone()),
            &PathConfig::new(vec![0.6], HyperParams::default()),
        )?;
        let u = ImagePlane::from_real(n, n, res.snapshots[0].image.to_planar())?;
        let r: Vec<f64> = x
            .pixels()
            .iter()
            .zip(u.pixels())
            .map(|(a, b)| a - b)
            .collect();
        println!(
            "seed {seed}: residual high-band energy {:.4e}",
            high_band_energy(&r, n, n, radius)?
        );
        originals.push(x);
        smoothed.push(u);
    }
    let diff = expected_spectral_diff(&originals, &smoothed)?;
    println!(
        "mean difference: {:.1}% of energy beyond radius {radius}",
        100.0 * diff.high_fraction(radius)
    );
    Ok(())
}
