//! Snapshots along the path: coarse structure first, texture last.

use scalepath::{run_path, synth, HyperParams, Image, PathConfig};

fn main() -> scalepath::Result<()> {
    let x = Image::Gray(synth::scene(16, 16, 4)?);
    let xs = x.to_planar();
    let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();

    let cfg = PathConfig::new(vec![0.2, 0.4, 0.6, 0.8, 1.0], HyperParams::default())
        .with_max_iters(5_000_000);
    let res = run_path(&x, &cfg)?;
    println!(
        "alpha = {:.4}, {} iterations",
        res.params.alpha, res.iterations
    );
    for s in &res.snapshots {
        let u = s.image.to_planar();
        let diff: Vec<f64> = u.iter().zip(&xs).map(|(a, b)| a - b).collect();
        println!(
            "level {:?}: sparsity {:.3} at iteration {:>8}, rel err {:.4}",
            s.requested_level,
            s.achieved_sparsity,
            s.iteration,
            norm(&diff) / norm(&xs)
        );
    }
    if res.truncated {
        println!("budget ran out");
    }
    Ok(())
}
