//! The difference operator on a small grid and its adjoint.

use scalepath::{find_components, project, LatticeGraph, SupportSet};

fn main() -> scalepath::Result<()> {
    let g = LatticeGraph::new(3, 4)?;
    println!(
        "{}x{} grid: {} pixels, {} edges",
        g.height(),
        g.width(),
        g.pixel_count(),
        g.edge_count()
    );

    let u: Vec<f64> = (0..g.pixel_count()).map(|i| (i * i % 7) as f64).collect();
    let du = g.apply_d(&u)?;
    for (e, &(i, j)) in g.edges().iter().enumerate().take(5) {
        println!("edge {e}: u[{i}] - u[{j}] = {}", du.get(e, 0));
    }

    // <Du, Du> == <u, D^T D u>
    let lhs: f64 = du.values().iter().map(|v| v * v).sum();
    let rhs: f64 = u.iter().zip(g.apply_dt(&du)?).map(|(a, b)| a * b).sum();
    println!("adjoint check: {lhs} vs {rhs}");

    // keep only vertical differences: every row collapses to its mean
    let vertical = g.edges().iter().map(|&(i, j)| j != i + 1).collect();
    let parts = find_components(&g, &SupportSet::from_flags(vertical))?;
    println!("{} components", parts.component_count());
    let flat = project(&u, &parts)?;
    println!("projected: {flat:?}");
    Ok(())
}
