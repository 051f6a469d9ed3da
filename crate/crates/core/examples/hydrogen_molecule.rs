//! Hartree-Fock for H2 at the equilibrium bond length.
//!
//! Usage: `cargo run --release --example hydrogen_molecule -- [n] [bond]`

use crossconv::hf::{hf_solve, HfOptions, NucleiSpec};
use crossconv::kernels::GridSpec;

fn main() -> crossconv::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(128);
    let bond: f64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(1.4);
    let nuclei = NucleiSpec::hydrogen_molecule(bond);
    let sol = hf_solve(nuclei, GridSpec::new(10.0, n)?, HfOptions::default())?;
    // nuclear repulsion is a constant shift
    let total = sol.total_energy + 1.0 / bond;
    println!("orbital energy {:.6}", sol.state.energy);
    println!("electronic {:.6}, with nuclear repulsion {:.6}", sol.total_energy, total);
    println!("{} iterations, converged {}, ranks {:?}", sol.log.len(), sol.converged, sol.state.psi.ranks());
    Ok(())
}
