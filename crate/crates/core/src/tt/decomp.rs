//! TT-SVD and TT-rounding.

use ndarray::{s, Array2, Array3, Axis};

use super::{TTCore, TTTensor};
use crate::dense::{DenseTensor, ScalarField};
use crate::error::{Error, Result};
use crate::linalg::{qr_thin, svd_thin, tail_rank};
use crate::C64;

fn per_bond_threshold(tol: f64, norm: f64, d: usize) -> f64 {
    if d <= 1 {
        0.0
    } else {
        tol * norm / ((d - 1) as f64).sqrt()
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol >= 0.0) || !tol.is_finite() {
        return Err(Error::invalid(format!("tolerance must be finite and >= 0, got {tol}")));
    }
    Ok(())
}

fn snap_real(t: &mut TTTensor) {
    for c in &mut t.cores {
        c.data.mapv_inplace(|x| C64::new(x.re, 0.0));
    }
}

impl TTTensor {
    /// TT-SVD of a dense tensor with relative accuracy `tol` in the
    /// Frobenius norm.
    pub fn from_dense(a: &DenseTensor, tol: f64) -> Result<TTTensor> {
        check_tol(tol)?;
        let shape = a.shape().to_vec();
        let d = shape.len();
        let norm = a.frobenius_norm();
        if norm == 0.0 {
            return TTTensor::zeros(&shape);
        }
        let delta = per_bond_threshold(tol, norm, d);
        let mut cores = Vec::with_capacity(d);
        let mut rest = Array2::from_shape_vec((1, a.len()), a.data().to_vec())?;
        let mut r_prev = 1;
        for &n in &shape[..d - 1] {
            let cols = rest.len() / (r_prev * n);
            let m = rest.into_shape_with_order((r_prev * n, cols))?;
            let (u, sv, vh) = svd_thin(&m.view())?;
            let r = tail_rank(sv.as_slice().expect("contiguous"), delta);
            let core = u.slice(s![.., ..r]).to_owned().into_shape_with_order((r_prev, n, r))?;
            cores.push(TTCore::new(core)?);
            let mut next = vh.slice(s![..r, ..]).to_owned();
            for (i, mut row) in next.axis_iter_mut(Axis(0)).enumerate() {
                row.mapv_inplace(|x| x * sv[i]);
            }
            rest = next;
            r_prev = r;
        }
        let last = rest.into_shape_with_order((r_prev, shape[d - 1], 1))?;
        cores.push(TTCore::new(last)?);
        let mut t = TTTensor::new(cores)?;
        if a.field() == ScalarField::Real {
            snap_real(&mut t);
        }
        Ok(t)
    }

    /// Recompresses to relative accuracy `tol`: right-to-left QR
    /// orthogonalization followed by a left-to-right truncated SVD sweep.
    ///
    /// Real tensors stay real.
    pub fn round(&self, tol: f64) -> Result<TTTensor> {
        self.round_with_cap(tol, usize::MAX)
    }

    /// Like [`TTTensor::round`], with every rank additionally capped at
    /// `max_rank`.
    pub fn round_with_cap(&self, tol: f64, max_rank: usize) -> Result<TTTensor> {
        check_tol(tol)?;
        let d = self.ndim();
        let was_real = self.is_real();
        if d == 1 {
            return Ok(self.clone());
        }
        let mut cores: Vec<Array3<C64>> = self.cores.iter().map(|c| c.data.clone()).collect();

        // Right-to-left: make cores 1..d right-orthogonal.
        for k in (1..d).rev() {
            let (a, n, b) = cores[k].dim();
            let m = cores[k].view().into_shape_with_order((a, n * b))?;
            let mh = m.t().mapv(|x| x.conj());
            let (q, r) = qr_thin(&mh.view())?;
            // m = r^H q^H
            let rk = q.ncols();
            let qh = q.t().mapv(|x| x.conj());
            cores[k] = qh.as_standard_layout().into_owned().into_shape_with_order((rk, n, b))?;
            let rh = r.t().mapv(|x| x.conj());
            let (pa, pn, _) = cores[k - 1].dim();
            let prev = cores[k - 1].view().into_shape_with_order((pa * pn, a))?.dot(&rh);
            cores[k - 1] = prev.into_shape_with_order((pa, pn, rk))?;
        }
        let norm = cores[0].iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return TTTensor::zeros(&self.mode_sizes());
        }
        let delta = per_bond_threshold(tol, norm, d);

        // Left-to-right truncation.
        for k in 0..d - 1 {
            let (a, n, b) = cores[k].dim();
            let m = cores[k].view().into_shape_with_order((a * n, b))?;
            let (u, sv, vh) = svd_thin(&m)?;
            let r = tail_rank(sv.as_slice().expect("contiguous"), delta).min(max_rank).max(1);
            cores[k] = u.slice(s![.., ..r]).to_owned().into_shape_with_order((a, n, r))?;
            let mut sv_vh = vh.slice(s![..r, ..]).to_owned();
            for (i, mut row) in sv_vh.axis_iter_mut(Axis(0)).enumerate() {
                row.mapv_inplace(|x| x * sv[i]);
            }
            let (_, nn, bb) = cores[k + 1].dim();
            let next = sv_vh.dot(&cores[k + 1].view().into_shape_with_order((b, nn * bb))?);
            cores[k + 1] = next.into_shape_with_order((r, nn, bb))?;
        }
        let mut t = TTTensor::from_arrays(cores)?;
        if was_real {
            snap_real(&mut t);
        }
        Ok(t)
    }
}
