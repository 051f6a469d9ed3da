//! Helium ground state on a sequence of grids.
//!
//! Usage: `cargo run --release --example helium -- [n ...]`

use std::time::Instant;

use crossconv::hf::{hf_solve, HfOptions, NucleiSpec, HELIUM_HF_LIMIT};
use crossconv::kernels::GridSpec;

fn main() -> crossconv::Result<()> {
    let sizes: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let sizes = if sizes.is_empty() { vec![64, 128] } else { sizes };
    println!("{:>6} {:>12} {:>10} {:>6} {:>8} {:>8}", "n", "E", "E - limit", "iters", "rank", "time");
    for n in sizes {
        let t0 = Instant::now();
        let sol = hf_solve(NucleiSpec::helium(), GridSpec::new(10.0, n)?, HfOptions::default())?;
        println!(
            "{:>6} {:>12.6} {:>10.2e} {:>6} {:>8} {:>7.1}s",
            n,
            sol.total_energy,
            sol.total_energy - HELIUM_HF_LIMIT,
            sol.log.len(),
            sol.state.psi.max_rank(),
            t0.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
