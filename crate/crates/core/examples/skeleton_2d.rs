//! Two-dimensional convolution with both operands in skeleton form.
//!
//! Usage: `cargo run --release --example skeleton_2d -- [n] [eps]`

use crossconv::conv::{skeleton_conv_2d, CirculantSize};
use crossconv::cross::{skeleton_cross, CrossConfig, DenseMatrix};
use crossconv::dense::{dense_convolve_naive, DenseTensor, KernelTable};
use crossconv::C64;
use ndarray::Array2;

fn main() -> crossconv::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(128);
    let eps: f64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(1e-8);
    let h = 2.0 / n as f64;
    let gauss = |i: usize, j: usize| {
        let (x, y) = (-1.0 + (i as f64 + 0.5) * h, -1.0 + (j as f64 + 0.5) * h);
        C64::new((-8.0 * (x * x + y * y)).exp(), 0.0)
    };
    // 1 / (1 + r^2) over offsets
    let kern = |a: usize, b: usize| {
        let (x, y) = ((a as f64 - (n - 1) as f64) * h, (b as f64 - (n - 1) as f64) * h);
        C64::new(1.0 / (1.0 + 25.0 * (x * x + y * y)), 0.0)
    };
    let f_mat = Array2::from_shape_fn((n, n), |(i, j)| gauss(i, j));
    let g_mat = Array2::from_shape_fn((2 * n - 1, 2 * n - 1), |(a, b)| kern(a, b));
    let cfg = CrossConfig::with_tolerance(eps * 1e-2);
    let f = skeleton_cross(&DenseMatrix(f_mat.clone()), &cfg)?;
    let g = skeleton_cross(&DenseMatrix(g_mat.clone()), &cfg)?;
    println!("operand ranks {} and {}", f.rank(), g.rank());

    let w = skeleton_conv_2d(&f, &g, eps, &CrossConfig::with_tolerance(eps), CirculantSize::Odd)?;
    println!("result rank {}", w.rank());

    let dense_f = DenseTensor::new(vec![n, n], f_mat.iter().copied().collect())?;
    let dense_g = DenseTensor::new(vec![2 * n - 1; 2], g_mat.iter().copied().collect())?;
    let reference = dense_convolve_naive(&dense_f, &KernelTable::new(n, dense_g)?)?;
    let got = DenseTensor::new(vec![n, n], w.to_dense().iter().copied().collect())?;
    println!("relative error {:.2e}", got.relative_error(&reference)?);
    Ok(())
}
