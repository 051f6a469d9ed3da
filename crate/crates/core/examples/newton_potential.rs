//! Newton potential of a Slater density on [-L, L]^3.
//!
//! Usage: `cargo run --release --example newton_potential -- [n] [eps] [2n-1|2n]`

use std::time::Instant;

use crossconv::conv::CirculantSize;
use crossconv::kernels::{cross_config, newton_potential_embedded, DensityFunction, GridSpec};

fn main() -> crossconv::Result<()> {
    let mut args = std::env::args().skip(1);
    let n = args.next().and_then(|a| a.parse().ok()).unwrap_or(256);
    let eps = args.next().and_then(|a| a.parse().ok()).unwrap_or(1e-5);
    let grid = GridSpec::new(10.0, n)?;
    let clock = Instant::now();
    let circulant = match args.next().as_deref() {
        Some("2n") => CirculantSize::Even,
        _ => CirculantSize::Odd,
    };
    let rep = newton_potential_embedded(&DensityFunction::Slater { zeta: 1.0 }, &grid, eps, &cross_config(eps), circulant)?;
    let secs = clock.elapsed().as_secs_f64();
    let r = rep.conv.product_ranks.iter().copied().max().unwrap_or(1);
    let m = circulant.extent(n);
    println!("density ranks   {:?}", rep.density_ranks);
    println!(
        "kernel ranks    {:?} ({} evaluations, {} sweeps)",
        rep.kernel_ranks, rep.kernel_stats.evaluations, rep.kernel_stats.sweeps
    );
    println!("product ranks   {:?}", rep.conv.product_ranks);
    println!("potential ranks {:?}", rep.potential.ranks());
    println!(
        "evaluations {} = {:.2} * d m r^2, sweeps {}",
        rep.conv.cross.evaluations,
        rep.conv.cross.evaluations as f64 / (3 * m * r * r) as f64,
        rep.conv.cross.sweeps
    );
    println!("stages {:?}", rep.conv.timings);
    println!("conv {:.3} s, total {:.3} s", rep.conv.timings.total(), secs);
    Ok(())
}
