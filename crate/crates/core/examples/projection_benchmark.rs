//! Graph projection against dense and iterative least squares.
//!
//! `cargo run --release --example projection_benchmark -- [size]`

use scalepath::oracle::timing_benchmark;

fn main() -> scalepath::Result<()> {
    let n: usize = std::env::args()
        .nth(1)
        .map_or(32, |a| a.parse().expect("size"));
    let report = timing_benchmark(n, n, 5_000, 3)?;
    print!("{}", report.to_key_value());
    Ok(())
}
