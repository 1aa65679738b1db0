//! On RGB input an edge is active in all channels at once.

use scalepath::{synth, HyperParams, Image, Smoother};

fn main() -> scalepath::Result<()> {
    let x = Image::Rgb(synth::color_scene(12, 12, 3)?);
    let mut s = Smoother::new(&x, &HyperParams::default())?;
    let mut state = s.initial_state();
    for _ in 0..20_000 {
        s.advance(&mut state)?;
    }
    let gamma = state.gamma();
    let m = gamma.edge_count();
    let mixed = (0..m)
        .filter(|&e| {
            let zeros = (0..3).filter(|&c| gamma.get(e, c) == 0.0).count();
            zeros != 0 && zeros != 3
        })
        .count();
    println!(
        "{} of {m} edges active, {mixed} partially active",
        state.support_count()
    );
    Ok(())
}
