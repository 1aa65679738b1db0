//! Smooth a synthetic scene to one sparsity level and write it as PNG.
//!
//! `cargo run --example smooth_image -- [level] [out.png]`

use scalepath::{io, smooth_to_level, synth, HyperParams, Image};

fn main() -> scalepath::Result<()> {
    let mut args = std::env::args().skip(1);
    let level: f64 = args
        .next()
        .map_or(0.5, |a| a.parse().expect("level must be a number"));
    let out = args.next().unwrap_or_else(|| "smoothed.png".into());

    let x = Image::Gray(synth::scene(48, 48, 7)?);
    let snap = smooth_to_level(&x, level, &HyperParams::default(), 5_000_000)?;
    println!(
        "asked {level}, got {:.4} after {} iterations",
        snap.achieved_sparsity, snap.iteration
    );
    io::save_png(&snap.image, std::path::Path::new(&out))?;
    println!("wrote {out}");
    Ok(())
}
