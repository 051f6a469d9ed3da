//! Two-dimensional convolution of matrices given as skeleton factors.

use ndarray::{concatenate, s, Array2, Axis};

use super::CirculantSize;
use crate::cross::{skeleton_cross, CrossConfig, MatrixBlackBox, SkeletonFactors};
use crate::dense::circulant_source_index;
use crate::dft::{dft_batch_in_place, Direction};
use crate::error::{Error, Result};
use crate::C64;

/// Column-wise DFT of a factor matrix.
fn transform_columns(a: &Array2<C64>, direction: Direction) -> Array2<C64> {
    let (m, r) = a.dim();
    let mut buf: Vec<C64> = a.t().iter().copied().collect();
    dft_batch_in_place(&mut buf, m, direction);
    Array2::from_shape_vec((r, m), buf).expect("sizes match").reversed_axes().as_standard_layout().into_owned()
}

/// Entries of `(Ug Vg^T) o (Uf Vf^T)` on demand.
struct SpectralProduct {
    ug: Array2<C64>,
    vg: Array2<C64>,
    uf: Array2<C64>,
    vf: Array2<C64>,
}

impl MatrixBlackBox for SpectralProduct {
    fn shape(&self) -> (usize, usize) {
        (self.ug.nrows(), self.vg.nrows())
    }

    fn element(&self, i: usize, j: usize) -> Result<C64> {
        let g: C64 = self.ug.row(i).iter().zip(self.vg.row(j)).map(|(a, b)| a * b).sum();
        let f: C64 = self.uf.row(i).iter().zip(self.vf.row(j)).map(|(a, b)| a * b).sum();
        Ok(g * f)
    }

    fn columns(&self, cols: &[usize]) -> Result<Array2<C64>> {
        let mut g = self.ug.dot(&self.vg.select(Axis(0), cols).t());
        let f = self.uf.dot(&self.vf.select(Axis(0), cols).t());
        g.zip_mut_with(&f, |a, b| *a *= *b);
        Ok(g)
    }

    fn rows(&self, rows: &[usize]) -> Result<Array2<C64>> {
        let mut g = self.ug.select(Axis(0), rows).dot(&self.vg.t());
        let f = self.uf.select(Axis(0), rows).dot(&self.vf.t());
        g.zip_mut_with(&f, |a, b| *a *= *b);
        Ok(g)
    }
}

fn pad_rows(a: &Array2<C64>, m: usize) -> Array2<C64> {
    let mut out = Array2::from_elem((m, a.ncols()), C64::new(0.0, 0.0));
    out.slice_mut(s![..a.nrows(), ..]).assign(a);
    out
}

fn circulant_rows(a: &Array2<C64>, n: usize, size: CirculantSize) -> Array2<C64> {
    let m = size.extent(n);
    let padded = pad_rows(a, 2 * n);
    let map: Vec<usize> = (0..m).map(|i| circulant_source_index(i, n, m)).collect();
    padded.select(Axis(0), &map)
}

fn is_real(a: &Array2<C64>) -> bool {
    a.iter().all(|x| x.im == 0.0)
}

/// Convolution `w = f * g` of `n1 x n2` matrices, with `f = Uf Vf^T` and the
/// kernel `g = Ug Vg^T` over offsets (`(2 n1 - 1) x (2 n2 - 1)`, offset `k`
/// stored at `k + n - 1`). The result has relative accuracy about `eps`.
pub fn skeleton_conv_2d(
    f: &SkeletonFactors,
    kernel: &SkeletonFactors,
    eps: f64,
    cross: &CrossConfig,
    size: CirculantSize,
) -> Result<SkeletonFactors> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("eps must lie in (0, 1), got {eps}")));
    }
    let (n1, n2) = f.shape();
    let (e1, e2) = kernel.shape();
    if e1 != 2 * n1 - 1 || e2 != 2 * n2 - 1 {
        return Err(Error::invalid(format!(
            "kernel shape {e1} x {e2} must be (2*{n1}-1) x (2*{n2}-1)"
        )));
    }
    let (m1, m2) = (size.extent(n1), size.extent(n2));
    let op = SpectralProduct {
        ug: transform_columns(&circulant_rows(&kernel.u, n1, size), Direction::Forward),
        vg: transform_columns(&circulant_rows(&kernel.v, n2, size), Direction::Forward),
        uf: transform_columns(&pad_rows(&f.u, m1), Direction::Forward),
        vf: transform_columns(&pad_rows(&f.v, m2), Direction::Forward),
    };
    let cfg = CrossConfig {
        tolerance: eps,
        initial_rank: f.rank().max(kernel.rank()).min(cross.max_rank),
        ..cross.clone()
    };
    let theta = skeleton_cross(&op, &cfg)?;

    let u = transform_columns(&theta.u, Direction::Inverse).slice(s![..n1, ..]).to_owned();
    let v = transform_columns(&theta.v, Direction::Inverse).slice(s![..n2, ..]).to_owned();
    let real = [&f.u, &f.v, &kernel.u, &kernel.v].iter().all(|a| is_real(a));
    let w = if real {
        // Re(U V^T) = [Re U, -Im U] [Re V, Im V]^T
        let re = |a: &Array2<C64>| a.mapv(|x| C64::new(x.re, 0.0));
        let im = |a: &Array2<C64>| a.mapv(|x| C64::new(x.im, 0.0));
        let neg_im = |a: &Array2<C64>| a.mapv(|x| C64::new(-x.im, 0.0));
        SkeletonFactors::new(
            concatenate![Axis(1), re(&u), neg_im(&u)],
            concatenate![Axis(1), re(&v), im(&v)],
        )?
    } else {
        SkeletonFactors::new(u, v)?
    };
    w.truncate(eps)
}
