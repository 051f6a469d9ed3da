//! Thin wrappers over LAPACK (via `ndarray-linalg`) used by the TT and cross
//! modules.

use ndarray::{s, Array1, Array2, ArrayView2, ShapeBuilder};
use ndarray_linalg::{Inverse, JobSvd, QR, SVDDC};

use crate::error::{Error, Result};
use crate::C64;

fn to_fortran(a: &ArrayView2<C64>) -> Array2<C64> {
    let mut f = Array2::zeros(a.dim().f());
    f.assign(a);
    f
}

fn standard(a: Array2<C64>) -> Array2<C64> {
    if a.is_standard_layout() {
        a
    } else {
        a.as_standard_layout().into_owned()
    }
}

/// Thin QR factorization `a = q r` with `q` of shape `m x min(m, n)`.
pub fn qr_thin(a: &ArrayView2<C64>) -> Result<(Array2<C64>, Array2<C64>)> {
    let (q, r) = to_fortran(a).qr()?;
    Ok((standard(q), standard(r)))
}

/// Thin SVD `a = u diag(s) vh`. Tall inputs are reduced by QR first.
pub fn svd_thin(a: &ArrayView2<C64>) -> Result<(Array2<C64>, Array1<f64>, Array2<C64>)> {
    let (m, n) = a.dim();
    if m > 2 * n {
        let (q, r) = qr_thin(a)?;
        let (u, s, vh) = svd_small(&r.view())?;
        Ok((q.dot(&u), s, vh))
    } else {
        svd_small(a)
    }
}

fn svd_small(a: &ArrayView2<C64>) -> Result<(Array2<C64>, Array1<f64>, Array2<C64>)> {
    let (u, s, vh) = to_fortran(a).svddc(JobSvd::Some)?;
    match (u, vh) {
        (Some(u), Some(vh)) => Ok((standard(u), s, standard(vh))),
        _ => Err(Error::Linalg("SVD did not return singular vectors".into())),
    }
}

/// Smallest rank `r >= 1` whose discarded tail satisfies
/// `sqrt(sum_{j >= r} s_j^2) <= threshold`.
pub fn tail_rank(s: &[f64], threshold: f64) -> usize {
    let mut tail = 0.0;
    let mut r = s.len();
    while r > 1 {
        let next = tail + s[r - 1] * s[r - 1];
        if next.sqrt() > threshold {
            break;
        }
        tail = next;
        r -= 1;
    }
    r.max(1)
}

pub fn inverse(a: &ArrayView2<C64>) -> Result<Array2<C64>> {
    Ok(a.to_owned().inv()?)
}

/// Orthonormal basis of the dominant column space of `a`, truncated so that
/// the discarded singular values have Frobenius mass at most
/// `rel_tol * ||a||_F`, and at most `max_rank` columns.
pub fn column_basis(a: &ArrayView2<C64>, rel_tol: f64, max_rank: usize) -> Result<Array2<C64>> {
    column_basis_bounded(a, rel_tol, 1, max_rank)
}

/// [`column_basis`] keeping at least `min_rank` columns when available.
pub fn column_basis_bounded(a: &ArrayView2<C64>, rel_tol: f64, min_rank: usize, max_rank: usize) -> Result<Array2<C64>> {
    let (u, s, _) = svd_thin(a)?;
    let total = s.iter().map(|x| x * x).sum::<f64>().sqrt();
    let r = tail_rank(s.as_slice().unwrap_or(&s.to_vec()), rel_tol * total)
        .max(min_rank)
        .min(max_rank)
        .min(s.len())
        .max(1);
    Ok(u.slice(s![.., ..r]).to_owned())
}

pub fn frobenius(a: &ArrayView2<C64>) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}
