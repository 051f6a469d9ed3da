//! Row selection by the maxvol principle.

use ndarray::{Array2, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::linalg::inverse;
use crate::C64;

/// Entries of `A * A[rows]^-1` may exceed 1 in modulus by at most this much.
pub const MAXVOL_TOLERANCE: f64 = 5e-2;

const MAX_SWAPS_PER_COLUMN: usize = 100;

/// Greedy partial-pivoting elimination; returns `r` rows forming a
/// well-conditioned starting submatrix.
fn pivoted_rows(a: &ArrayView2<C64>) -> Result<Vec<usize>> {
    let (n, r) = a.dim();
    // column-major working copy
    let mut cols: Vec<Vec<C64>> = (0..r).map(|j| a.column(j).to_vec()).collect();
    let scale = a.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let mut used = vec![false; n];
    let mut rows = Vec::with_capacity(r);
    for j in 0..r {
        let (p, best) = cols[j]
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, x)| (i, x.norm()))
            .fold((usize::MAX, -1.0), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
        if p == usize::MAX || !(best > 1e-13 * scale) || scale == 0.0 {
            return Err(Error::DegenerateInput(format!(
                "matrix is numerically rank deficient (column {j} of {r})"
            )));
        }
        used[p] = true;
        rows.push(p);
        let (head, tail) = cols.split_at_mut(j + 1);
        let pivot_col = &head[j];
        let pivot = pivot_col[p];
        for col in tail.iter_mut() {
            let factor = col[p] / pivot;
            if factor == C64::new(0.0, 0.0) {
                continue;
            }
            for (x, y) in col.iter_mut().zip(pivot_col) {
                *x -= factor * y;
            }
        }
    }
    Ok(rows)
}

/// Chooses `r` rows of the `N x r` matrix `a` (`N >= r`) whose submatrix
/// `Â` is quasi-dominant: every entry of `a Â^-1` has modulus at most
/// `1 + MAXVOL_TOLERANCE`.
pub fn maxvol(a: &ArrayView2<C64>) -> Result<Vec<usize>> {
    let (n, r) = a.dim();
    if r == 0 || n < r {
        return Err(Error::invalid(format!(
            "maxvol needs an N x r matrix with N >= r >= 1, got {n} x {r}"
        )));
    }
    let mut rows = pivoted_rows(a)?;
    let sub = a.select(Axis(0), &rows);
    let mut b: Array2<C64> = a.dot(&inverse(&sub.view())?);
    let limit = 1.0 + MAXVOL_TOLERANCE;
    for _ in 0..MAX_SWAPS_PER_COLUMN * r {
        let mut best = (0, 0, 0.0);
        for ((i, j), x) in b.indexed_iter() {
            let v = x.norm();
            if v > best.2 {
                best = (i, j, v);
            }
        }
        let (i, j, v) = best;
        if v <= limit {
            break;
        }
        // Replace row rows[j] by i:  B <- B - B[:, j] (B[i, :] - e_j) / B[i, j]
        let bij = b[[i, j]];
        let col_j = b.column(j).to_owned();
        let mut row_i = b.row(i).to_owned();
        row_i[j] -= C64::new(1.0, 0.0);
        row_i.mapv_inplace(|x| x / bij);
        for (mut row, cj) in b.axis_iter_mut(Axis(0)).zip(col_j.iter()) {
            if *cj == C64::new(0.0, 0.0) {
                continue;
            }
            row.scaled_add(-*cj, &row_i);
        }
        rows[j] = i;
    }
    Ok(rows)
}

/// Largest modulus of `a * a[rows]^-1`.
pub fn dominance(a: &ArrayView2<C64>, rows: &[usize]) -> Result<f64> {
    let sub = a.select(Axis(0), rows);
    let b = a.dot(&inverse(&sub.view())?);
    Ok(b.iter().map(|x| x.norm()).fold(0.0, f64::max))
}
