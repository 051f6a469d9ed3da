//! TT-cross of a function known only through its values.
//!
//! Usage: `cargo run --release --example tt_cross -- [n] [d] [eps]`

use crossconv::cross::{tt_cross_with_stats, CrossConfig, FnBlackBox};
use crossconv::C64;

fn main() -> crossconv::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(64);
    let d: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(5);
    let eps: f64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(1e-8);
    let x = |i: usize| -1.0 + 2.0 * i as f64 / (n - 1) as f64;
    // exp(-|x|) on [-1, 1]^d
    let bb = FnBlackBox::new(vec![n; d], |i: &[usize]| {
        C64::new((-i.iter().map(|&k| x(k) * x(k)).sum::<f64>().sqrt()).exp(), 0.0)
    })?;
    let (t, stats) = tt_cross_with_stats(&bb, &CrossConfig::with_tolerance(eps), None)?;
    println!("ranks {:?}", t.ranks());
    println!(
        "{} evaluations out of {:.3e} entries, {} sweeps, validation error {:.2e}",
        stats.evaluations,
        (n as f64).powi(d as i32),
        stats.sweeps,
        stats.validation_error
    );
    Ok(())
}
