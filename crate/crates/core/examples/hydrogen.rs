//! One electron around a unit charge, with the electron-electron term off.
//! The exact ground-state energy is -1/2.
//!
//! Usage: `cargo run --release --example hydrogen -- [n]`

use crossconv::hf::{hf_solve, HfOptions, NucleiSpec};
use crossconv::kernels::GridSpec;

fn main() -> crossconv::Result<()> {
    let n = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(128);
    let options = HfOptions {
        hartree: false,
        ..HfOptions::default()
    };
    let sol = hf_solve(NucleiSpec::hydrogen(), GridSpec::new(10.0, n)?, options)?;
    for r in &sol.log {
        println!("{:>3} {:>14.8} {:>10.2e} {:?}", r.iteration, r.energy, r.delta, r.ranks);
    }
    println!("n = {n}: E = {:.6}, error {:.2e}", sol.total_energy, sol.total_energy + 0.5);
    Ok(())
}
