//! Structural and elementwise operations on TT tensors.

use ndarray::{s, Array3, Axis};

use super::{zero, TTCore, TTTensor};
use crate::dft::{dft_batch_in_place, Direction};
use crate::error::{Error, Result};
use crate::C64;

impl TTTensor {
    /// Embeds the tensor into a larger one filled with zeros; each mode `k`
    /// grows from `n_k` to `new_shape[k]`. Ranks are unchanged.
    pub fn zero_pad(&self, new_shape: &[usize]) -> Result<TTTensor> {
        if new_shape.len() != self.ndim() {
            return Err(Error::invalid("padding shape has the wrong number of modes"));
        }
        let cores = self
            .cores
            .iter()
            .zip(new_shape)
            .map(|(c, &m)| {
                let (a, n, b) = c.data.dim();
                if m < n {
                    return Err(Error::invalid(format!("cannot pad mode of size {n} to {m}")));
                }
                let mut out = Array3::from_elem((a, m, b), zero());
                out.slice_mut(s![.., ..n, ..]).assign(&c.data);
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;
        TTTensor::from_arrays(cores)
    }

    /// Sub-tensor `A(start_1 + j_1, ..., start_d + j_d)` with
    /// `0 <= j_k < len_k`.
    pub fn restrict(&self, start: &[usize], len: &[usize]) -> Result<TTTensor> {
        if start.len() != self.ndim() || len.len() != self.ndim() {
            return Err(Error::invalid("restriction has the wrong number of modes"));
        }
        let cores = self
            .cores
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let n = c.mode_size();
                if len[k] == 0 || start[k] + len[k] > n {
                    return Err(Error::invalid(format!(
                        "window [{}, {}) outside mode {k} of size {n}",
                        start[k],
                        start[k] + len[k]
                    )));
                }
                Ok(c.data.slice(s![.., start[k]..start[k] + len[k], ..]).to_owned())
            })
            .collect::<Result<Vec<_>>>()?;
        TTTensor::from_arrays(cores)
    }

    /// Reindexes every mode: the result satisfies
    /// `out(i_1, ..., i_d) = self(perm_1[i_1], ..., perm_d[i_d])`.
    ///
    /// Each map only needs to be a valid index list into its mode.
    pub fn mode_permute(&self, perms: &[Vec<usize>]) -> Result<TTTensor> {
        if perms.len() != self.ndim() {
            return Err(Error::invalid("one index map per mode is required"));
        }
        let cores = self
            .cores
            .iter()
            .zip(perms)
            .map(|(c, p)| {
                if p.is_empty() || p.iter().any(|&i| i >= c.mode_size()) {
                    return Err(Error::invalid("index map out of range"));
                }
                Ok(c.data.select(Axis(1), p))
            })
            .collect::<Result<Vec<_>>>()?;
        TTTensor::from_arrays(cores)
    }

    /// Multidimensional DFT, applied to each core along its mode index.
    /// Ranks are preserved exactly.
    pub fn dft(&self, direction: Direction) -> TTTensor {
        let cores = self
            .cores
            .iter()
            .map(|c| {
                let (a, n, b) = c.data.dim();
                // (a, n, b) -> (a, b, n) so that each fibre is contiguous
                let mut buf: Vec<C64> = c
                    .data
                    .view()
                    .permuted_axes([0, 2, 1])
                    .as_standard_layout()
                    .iter()
                    .copied()
                    .collect();
                dft_batch_in_place(&mut buf, n, direction);
                let t = Array3::from_shape_vec((a, b, n), buf).expect("sizes match");
                let data = t.permuted_axes([0, 2, 1]).as_standard_layout().into_owned();
                TTCore { data }
            })
            .collect();
        TTTensor { cores }
    }

    /// Exact elementwise product; ranks multiply.
    pub fn hadamard_exact(&self, other: &TTTensor) -> Result<TTTensor> {
        if self.mode_sizes() != other.mode_sizes() {
            return Err(Error::invalid("mode sizes differ in Hadamard product"));
        }
        let cores = self
            .cores
            .iter()
            .zip(&other.cores)
            .map(|(x, y)| {
                let (a, n, b) = x.data.dim();
                let (c, _, e) = y.data.dim();
                Array3::from_shape_fn((a * c, n, b * e), |(p, i, q)| {
                    x.data[[p / c, i, q / e]] * y.data[[p % c, i, q % e]]
                })
            })
            .collect();
        TTTensor::from_arrays(cores)
    }

    /// Exact real part with real cores of twice the interior ranks.
    ///
    /// Every complex matrix `A + iB` in the chain is replaced by the real
    /// block `[[A, -B], [B, A]]`; the first and last cores keep only the
    /// blocks that contribute to the real entry.
    pub fn real_part(&self) -> TTTensor {
        let d = self.ndim();
        if d == 1 {
            let mut out = self.clone();
            out.cores[0].data.mapv_inplace(|x| C64::new(x.re, 0.0));
            return out;
        }
        let re = |x: &C64| C64::new(x.re, 0.0);
        let im = |x: &C64| C64::new(x.im, 0.0);
        let neg_im = |x: &C64| C64::new(-x.im, 0.0);
        let cores = self
            .cores
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let (a, n, b) = c.data.dim();
                let g = &c.data;
                if k == 0 {
                    let mut out = Array3::from_elem((1, n, 2 * b), zero());
                    out.slice_mut(s![.., .., ..b]).assign(&g.map(re));
                    out.slice_mut(s![.., .., b..]).assign(&g.map(neg_im));
                    out
                } else if k == d - 1 {
                    let mut out = Array3::from_elem((2 * a, n, 1), zero());
                    out.slice_mut(s![..a, .., ..]).assign(&g.map(re));
                    out.slice_mut(s![a.., .., ..]).assign(&g.map(im));
                    out
                } else {
                    let mut out = Array3::from_elem((2 * a, n, 2 * b), zero());
                    out.slice_mut(s![..a, .., ..b]).assign(&g.map(re));
                    out.slice_mut(s![..a, .., b..]).assign(&g.map(neg_im));
                    out.slice_mut(s![a.., .., ..b]).assign(&g.map(im));
                    out.slice_mut(s![a.., .., b..]).assign(&g.map(re));
                    out
                }
            })
            .collect();
        TTTensor::from_arrays(cores).expect("ranks chain by construction")
    }

    /// Real part of every core entry. This is not the real part of the
    /// tensor unless the cores were already real; kept for fault-injection
    /// runs of the verifier.
    pub fn discard_core_imaginary_parts(&self) -> TTTensor {
        let mut out = self.clone();
        for c in &mut out.cores {
            c.data.mapv_inplace(|x| C64::new(x.re, 0.0));
        }
        out
    }
}
