//! Cross-conv of random TT operands against direct summation.
//!
//! Usage: `cargo run --release --example convolution -- [d] [n] [eps]`

use crossconv::conv::{cross_conv_report, ConvOperands};
use crossconv::dense::{dense_convolve_fft, KernelTable};
use crossconv::TTTensor;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> crossconv::Result<()> {
    let mut args = std::env::args().skip(1);
    let d: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(3);
    let n: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(16);
    let eps: f64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(1e-6);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let f = TTTensor::random(&vec![n; d], &vec![3; d - 1], false, &mut rng)?;
    let g = TTTensor::random(&vec![2 * n - 1; d], &vec![2; d - 1], false, &mut rng)?;

    let rep = cross_conv_report(&ConvOperands::new(f.clone(), g.clone(), eps))?;
    let reference = dense_convolve_fft(&f.to_dense()?, &KernelTable::new(n, g.to_dense()?)?)?;
    println!("operand ranks {:?} and {:?}", f.ranks(), g.ranks());
    println!("product ranks {:?}, result ranks {:?}", rep.product_ranks, rep.result.ranks());
    println!("relative error {:.2e} (eps {eps:.0e})", rep.result.to_dense()?.relative_error(&reference)?);
    println!("{} evaluations, stages {:?}", rep.cross.evaluations, rep.timings);
    Ok(())
}
