//! Cross-conv time on doubling grids, Slater density and Newton kernel.
//!
//! Usage: `cargo run --release --example bench_scaling -- [max_exp] [eps] [repeats]`

use crossconv::cli::bench::{run_bench, BenchOptions};
use crossconv::cli::config::{CommonArgs, Defaults, RunConfig};

fn main() -> crossconv::Result<()> {
    let mut args = std::env::args().skip(1);
    let max_exp: u32 = args.next().and_then(|a| a.parse().ok()).unwrap_or(9);
    let eps: f64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(1e-5);
    let repeats: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(2);
    let cfg = RunConfig::resolve(
        CommonArgs {
            eps: Some(vec![eps]),
            ..CommonArgs::default()
        },
        Defaults {
            n: vec![256],
            d: vec![3],
            half_width: 10.0,
            eps: vec![eps],
        },
    )?;
    println!("{:>6} {:>9} {:>7} {:>12} {:>9}", "n", "conv s", "ratio", "ranks", "evals");
    for r in run_bench(&cfg, &BenchOptions { max_exp, repeats })? {
        println!(
            "{:>6} {:>9.3} {:>7} {:>12} {:>9}",
            r.n,
            r.total_seconds,
            r.time_ratio.map_or("-".into(), |x| format!("{x:.2}")),
            r.result_ranks,
            r.evaluations
        );
    }
    Ok(())
}
