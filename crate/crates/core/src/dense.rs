//! Dense d-dimensional tensors and the brute-force convolution oracles.
//!
//! Data is stored row-major (last index fastest). The same order is used by
//! the TT file format and by every dense expansion in the crate.

use rayon::prelude::*;

use crate::dft::{dft_batch_in_place, Direction};
use crate::error::{Error, Result};
use crate::C64;

/// A multi-index `(i_1, ..., i_d)` with `0 <= i_k < n_k`.
pub type MultiIndex = Vec<usize>;

/// Whether a tensor is known to hold real values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarField {
    Real,
    Complex,
}

#[derive(Debug, Clone)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<C64>,
    field: ScalarField,
}

pub(crate) fn check_shape(shape: &[usize]) -> Result<()> {
    if shape.is_empty() {
        return Err(Error::invalid("tensor must have at least one mode"));
    }
    if shape.contains(&0) {
        return Err(Error::invalid(format!("mode sizes must be positive: {shape:?}")));
    }
    Ok(())
}

pub(crate) fn check_index(shape: &[usize], idx: &[usize]) -> Result<()> {
    if idx.len() != shape.len() {
        return Err(Error::invalid(format!(
            "index of length {} for a {}-dimensional tensor",
            idx.len(),
            shape.len()
        )));
    }
    if let Some(k) = idx.iter().zip(shape).position(|(&i, &n)| i >= n) {
        return Err(Error::invalid(format!(
            "index {idx:?} out of bounds in mode {k} (size {})",
            shape[k]
        )));
    }
    Ok(())
}

/// Row-major linear offset of `idx`. Assumes bounds were checked.
pub(crate) fn ravel(shape: &[usize], idx: &[usize]) -> usize {
    idx.iter().zip(shape).fold(0, |acc, (&i, &n)| acc * n + i)
}

pub(crate) fn unravel(shape: &[usize], mut flat: usize) -> MultiIndex {
    let mut idx = vec![0; shape.len()];
    for k in (0..shape.len()).rev() {
        idx[k] = flat % shape[k];
        flat /= shape[k];
    }
    idx
}

impl DenseTensor {
    pub fn new(shape: Vec<usize>, data: Vec<C64>) -> Result<Self> {
        check_shape(&shape)?;
        let len: usize = shape.iter().product();
        if data.len() != len {
            return Err(Error::invalid(format!(
                "data length {} does not match shape {shape:?}",
                data.len()
            )));
        }
        Ok(Self {
            shape,
            data,
            field: ScalarField::Complex,
        })
    }

    pub fn from_real(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let mut t = Self::new(shape, data.into_iter().map(|x| C64::new(x, 0.0)).collect())?;
        t.field = ScalarField::Real;
        Ok(t)
    }

    pub fn zeros(shape: Vec<usize>) -> Result<Self> {
        let len = shape.iter().product();
        let mut t = Self::new(shape, vec![C64::new(0.0, 0.0); len])?;
        t.field = ScalarField::Real;
        Ok(t)
    }

    pub fn from_fn(shape: Vec<usize>, f: impl Fn(&[usize]) -> C64) -> Result<Self> {
        check_shape(&shape)?;
        let len: usize = shape.iter().product();
        let data = (0..len).map(|flat| f(&unravel(&shape, flat))).collect();
        Self::new(shape, data)
    }

    pub fn from_real_fn(shape: Vec<usize>, f: impl Fn(&[usize]) -> f64) -> Result<Self> {
        let mut t = Self::from_fn(shape, |i| C64::new(f(i), 0.0))?;
        t.field = ScalarField::Real;
        Ok(t)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn ndim(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn field(&self) -> ScalarField {
        self.field
    }

    pub(crate) fn set_field(&mut self, field: ScalarField) {
        self.field = field;
    }

    pub fn get(&self, idx: &[usize]) -> Result<C64> {
        check_index(&self.shape, idx)?;
        Ok(self.data[ravel(&self.shape, idx)])
    }

    pub(crate) fn at(&self, idx: &[usize]) -> C64 {
        self.data[ravel(&self.shape, idx)]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `||self - reference|| / ||reference||` (absolute error if the
    /// reference vanishes).
    pub fn relative_error(&self, reference: &DenseTensor) -> Result<f64> {
        if self.shape != reference.shape {
            return Err(Error::invalid(format!(
                "shape mismatch {:?} vs {:?}",
                self.shape, reference.shape
            )));
        }
        let diff: f64 = self
            .data
            .iter()
            .zip(&reference.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let scale = reference.frobenius_norm();
        Ok(if scale > 0.0 { diff / scale } else { diff })
    }

    pub fn max_abs_difference(&self, other: &DenseTensor) -> Result<f64> {
        if self.shape != other.shape {
            return Err(Error::invalid("shape mismatch"));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Elementwise product.
    pub fn hadamard(&self, other: &DenseTensor) -> Result<DenseTensor> {
        if self.shape != other.shape {
            return Err(Error::invalid("shape mismatch in elementwise product"));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a * b).collect();
        let mut out = DenseTensor::new(self.shape.clone(), data)?;
        if self.field == ScalarField::Real && other.field == ScalarField::Real {
            out.field = ScalarField::Real;
        }
        Ok(out)
    }

    pub fn scaled(&self, alpha: C64) -> DenseTensor {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|x| *x *= alpha);
        if alpha.im != 0.0 {
            out.field = ScalarField::Complex;
        }
        out
    }

    pub fn add(&self, other: &DenseTensor) -> Result<DenseTensor> {
        if self.shape != other.shape {
            return Err(Error::invalid("shape mismatch in addition"));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        let mut out = DenseTensor::new(self.shape.clone(), data)?;
        if self.field == ScalarField::Real && other.field == ScalarField::Real {
            out.field = ScalarField::Real;
        }
        Ok(out)
    }

    pub fn real_part(&self) -> DenseTensor {
        DenseTensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|x| C64::new(x.re, 0.0)).collect(),
            field: ScalarField::Real,
        }
    }

    pub fn imag_norm(&self) -> f64 {
        self.data.iter().map(|x| x.im * x.im).sum::<f64>().sqrt()
    }

    /// Zero-pads every mode to `new_shape`, keeping entries at the low end.
    pub fn zero_pad(&self, new_shape: &[usize]) -> Result<DenseTensor> {
        if new_shape.len() != self.ndim() || new_shape.iter().zip(&self.shape).any(|(a, b)| a < b) {
            return Err(Error::invalid(format!(
                "cannot pad {:?} to {new_shape:?}",
                self.shape
            )));
        }
        let mut out = DenseTensor::from_fn(new_shape.to_vec(), |idx| {
            if idx.iter().zip(&self.shape).all(|(i, n)| i < n) {
                self.at(idx)
            } else {
                C64::new(0.0, 0.0)
            }
        })?;
        out.field = self.field;
        Ok(out)
    }

    /// Keeps the index window `start[k] .. start[k] + len[k]` in every mode.
    pub fn window(&self, start: &[usize], len: &[usize]) -> Result<DenseTensor> {
        if start.len() != self.ndim()
            || len.len() != self.ndim()
            || (0..self.ndim()).any(|k| len[k] == 0 || start[k] + len[k] > self.shape[k])
        {
            return Err(Error::invalid("window out of bounds"));
        }
        let mut out = DenseTensor::from_fn(len.to_vec(), |idx| {
            let src: Vec<usize> = idx.iter().zip(start).map(|(i, s)| i + s).collect();
            self.at(&src)
        })?;
        out.field = self.field;
        Ok(out)
    }

    /// `out(i) = self(perm_1(i_1), ..., perm_d(i_d))`.
    pub fn reindex(&self, perms: &[Vec<usize>]) -> Result<DenseTensor> {
        if perms.len() != self.ndim() || perms.iter().zip(&self.shape).any(|(p, &n)| p.len() != n) {
            return Err(Error::invalid("permutation shape mismatch"));
        }
        let mut out = DenseTensor::from_fn(self.shape.clone(), |idx| {
            let src: Vec<usize> = idx.iter().zip(perms).map(|(&i, p)| p[i]).collect();
            self.at(&src)
        })?;
        out.field = self.field;
        Ok(out)
    }

    /// Full d-dimensional DFT as successive 1-D transforms along each mode.
    pub fn dft(&self, direction: Direction) -> DenseTensor {
        let mut data = self.data.clone();
        let d = self.ndim();
        for k in 0..d {
            let n = self.shape[k];
            let inner: usize = self.shape[k + 1..].iter().product();
            let outer: usize = self.shape[..k].iter().product();
            let mut line = vec![C64::new(0.0, 0.0); n];
            for o in 0..outer {
                for s in 0..inner {
                    let base = o * n * inner + s;
                    for i in 0..n {
                        line[i] = data[base + i * inner];
                    }
                    dft_batch_in_place(&mut line, n, direction);
                    for i in 0..n {
                        data[base + i * inner] = line[i];
                    }
                }
            }
        }
        DenseTensor {
            shape: self.shape.clone(),
            data,
            field: ScalarField::Complex,
        }
    }
}

/// Convolution kernel sampled at offset vectors `k in {-(n-1), ..., n-1}^d`.
///
/// Offset `k` is stored at index `k + (n - 1)` of a tensor with extent
/// `2n - 1` per mode.
#[derive(Debug, Clone)]
pub struct KernelTable {
    n: usize,
    table: DenseTensor,
}

impl KernelTable {
    pub fn new(n: usize, table: DenseTensor) -> Result<Self> {
        if n == 0 || table.shape().iter().any(|&m| m != 2 * n - 1) {
            return Err(Error::invalid(format!(
                "kernel table of shape {:?} does not have extent 2n-1 = {} per mode",
                table.shape(),
                (2 * n).saturating_sub(1)
            )));
        }
        Ok(Self { n, table })
    }

    /// Builds the table from a function of the offset vector.
    pub fn from_offsets(d: usize, n: usize, f: impl Fn(&[isize]) -> C64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("kernel extent must be positive"));
        }
        let shift = n as isize - 1;
        let table = DenseTensor::from_fn(vec![2 * n - 1; d], |idx| {
            let off: Vec<isize> = idx.iter().map(|&i| i as isize - shift).collect();
            f(&off)
        })?;
        Self::new(n, table)
    }

    /// The identity kernel: one at offset zero.
    pub fn delta(d: usize, n: usize) -> Result<Self> {
        let mut t = Self::from_offsets(d, n, |k| {
            if k.iter().all(|&x| x == 0) {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })?;
        t.table.field = ScalarField::Real;
        Ok(t)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ndim(&self) -> usize {
        self.table.ndim()
    }

    pub fn table(&self) -> &DenseTensor {
        &self.table
    }

    pub fn into_table(self) -> DenseTensor {
        self.table
    }

    pub fn at_offset(&self, offset: &[isize]) -> Result<C64> {
        let shift = self.n as isize - 1;
        if offset.len() != self.ndim() || offset.iter().any(|&k| k.abs() > shift) {
            return Err(Error::invalid(format!("offset {offset:?} outside the kernel table")));
        }
        let idx: Vec<usize> = offset.iter().map(|&k| (k + shift) as usize).collect();
        Ok(self.table.at(&idx))
    }
}

fn check_conv_operands(f: &DenseTensor, g: &KernelTable) -> Result<()> {
    if f.ndim() != g.ndim() || f.shape().iter().any(|&n| n != g.n()) {
        return Err(Error::invalid(format!(
            "operand shape {:?} incompatible with a kernel of extent n = {} in {} modes",
            f.shape(),
            g.n(),
            g.ndim()
        )));
    }
    Ok(())
}

fn result_field(f: &DenseTensor, g: &KernelTable) -> ScalarField {
    if f.field() == ScalarField::Real && g.table().field() == ScalarField::Real {
        ScalarField::Real
    } else {
        ScalarField::Complex
    }
}

/// Direct summation `w_j = sum_i f_i g_{j - i}`; `O(N^2)` for `N = n^d`.
pub fn dense_convolve_naive(f: &DenseTensor, g: &KernelTable) -> Result<DenseTensor> {
    check_conv_operands(f, g)?;
    let shape = f.shape().to_vec();
    let n = g.n();
    let total = f.len();
    let shift = n - 1;
    let data: Vec<C64> = (0..total)
        .into_par_iter()
        .map(|flat_j| {
            let j = unravel(&shape, flat_j);
            let mut acc = C64::new(0.0, 0.0);
            let mut off = vec![0usize; j.len()];
            for (flat_i, fi) in f.data().iter().enumerate() {
                if fi.re == 0.0 && fi.im == 0.0 {
                    continue;
                }
                let i = unravel(&shape, flat_i);
                for k in 0..j.len() {
                    off[k] = j[k] + shift - i[k];
                }
                acc += fi * g.table().at(&off);
            }
            acc
        })
        .collect();
    let mut out = DenseTensor::new(shape, data)?;
    if result_field(f, g) == ScalarField::Real {
        out = out.real_part();
    }
    Ok(out)
}

/// Index map from circulant position to kernel storage position for a
/// circulant of size `m` built from a kernel of extent `n` (storage `2n-1`).
///
/// For `m = 2n - 1`: position `i < n` reads offset `i`, position `i >= n`
/// reads offset `i - m`. For `m = 2n` the extra middle slot (offset `+-n`)
/// reads storage index `2n - 1`, which callers fill with zero.
pub(crate) fn circulant_source_index(i: usize, n: usize, m: usize) -> usize {
    if i < n {
        i + n - 1
    } else if m == 2 * n && i == n {
        2 * n - 1
    } else {
        // offset i - m, stored at i - m + n - 1
        i + n - 1 - m
    }
}

/// Circulant-embedding FFT convolution on dense tensors:
/// `w = restrict(F^-1(F(c_g) o F(q_f)))`.
pub fn dense_convolve_fft(f: &DenseTensor, g: &KernelTable) -> Result<DenseTensor> {
    check_conv_operands(f, g)?;
    let d = f.ndim();
    let n = g.n();
    let m = 2 * n - 1;
    let q = f.zero_pad(&vec![m; d])?;
    let perms: Vec<Vec<usize>> = (0..d)
        .map(|_| (0..m).map(|i| circulant_source_index(i, n, m)).collect())
        .collect();
    let c = g.table().reindex(&perms)?;
    let product = c.dft(Direction::Forward).hadamard(&q.dft(Direction::Forward))?;
    let w_ext = product.dft(Direction::Inverse);
    let mut w = w_ext.window(&vec![0; d], &vec![n; d])?;
    if result_field(f, g) == ScalarField::Real {
        w = w.real_part();
    } else {
        w.set_field(ScalarField::Complex);
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_real(shape: Vec<usize>, rng: &mut ChaCha8Rng) -> DenseTensor {
        let len = shape.iter().product();
        DenseTensor::from_real(shape, (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn hand_summed_one_dimensional_case() {
        let f = DenseTensor::from_real(vec![2], vec![1.0, 2.0]).unwrap();
        let g = KernelTable::from_offsets(1, 2, |k| C64::new([3.0, 4.0, 5.0][(k[0] + 1) as usize], 0.0)).unwrap();
        let naive = dense_convolve_naive(&f, &g).unwrap();
        assert_eq!(naive.data()[0].re, 10.0);
        assert_eq!(naive.data()[1].re, 13.0);
        let fft = dense_convolve_fft(&f, &g).unwrap();
        assert!((fft.data()[0].re - 10.0).abs() < 1e-13);
        assert!((fft.data()[1].re - 13.0).abs() < 1e-13);
    }

    #[test]
    fn discarded_circulant_entry() {
        // c = [4, 5, 3], q = [1, 2, 0]; the third circulant output is 13.
        let c = DenseTensor::from_real(vec![3], vec![4.0, 5.0, 3.0]).unwrap();
        let q = DenseTensor::from_real(vec![3], vec![1.0, 2.0, 0.0]).unwrap();
        let w = c
            .dft(Direction::Forward)
            .hadamard(&q.dft(Direction::Forward))
            .unwrap()
            .dft(Direction::Inverse);
        assert!((w.data()[2].re - 13.0).abs() < 1e-13);
        let perm: Vec<usize> = (0..3).map(|i| circulant_source_index(i, 2, 3)).collect();
        assert_eq!(perm, vec![1, 2, 0]);
    }

    #[test]
    fn delta_kernel_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_real(vec![4, 4, 4], &mut rng);
        let g = KernelTable::delta(3, 4).unwrap();
        let naive = dense_convolve_naive(&f, &g).unwrap();
        assert_eq!(naive.data(), f.data());
        let fft = dense_convolve_fft(&f, &g).unwrap();
        assert!(fft.relative_error(&f).unwrap() < 1e-14);
    }

    #[test]
    fn oracles_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (d, n) in [(1usize, 8usize), (2, 4), (2, 8), (3, 8)] {
            let f = random_real(vec![n; d], &mut rng);
            let g = KernelTable::new(n, random_real(vec![2 * n - 1; d], &mut rng)).unwrap();
            let naive = dense_convolve_naive(&f, &g).unwrap();
            let fft = dense_convolve_fft(&f, &g).unwrap();
            assert!(fft.relative_error(&naive).unwrap() <= 1e-12, "d={d} n={n}");
        }
    }

    #[test]
    fn convolution_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 4;
        let f1 = random_real(vec![n, n], &mut rng);
        let f2 = random_real(vec![n, n], &mut rng);
        let g = KernelTable::new(n, random_real(vec![2 * n - 1; 2], &mut rng)).unwrap();
        let (a, b) = (C64::new(0.7, 0.0), C64::new(-1.9, 0.0));
        let lhs = dense_convolve_fft(&f1.scaled(a).add(&f2.scaled(b)).unwrap(), &g).unwrap();
        let rhs = dense_convolve_fft(&f1, &g)
            .unwrap()
            .scaled(a)
            .add(&dense_convolve_fft(&f2, &g).unwrap().scaled(b))
            .unwrap();
        assert!(lhs.relative_error(&rhs).unwrap() < 1e-12);
    }

    #[test]
    fn complex_operands_stay_complex() {
        let f = DenseTensor::new(vec![2], vec![C64::new(0.0, 1.0), C64::new(1.0, 0.0)]).unwrap();
        let g = KernelTable::delta(1, 2).unwrap();
        let w = dense_convolve_fft(&f, &g).unwrap();
        assert_eq!(w.field(), ScalarField::Complex);
        assert!((w.data()[0] - C64::new(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn size_mismatch_is_rejected() {
        let f = DenseTensor::zeros(vec![3, 3]).unwrap();
        let g = KernelTable::delta(2, 4).unwrap();
        assert!(matches!(dense_convolve_naive(&f, &g), Err(Error::InvalidArgument(_))));
        assert!(matches!(dense_convolve_fft(&f, &g), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn dft_scaling_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let t = random_real(vec![3, 5, 4], &mut rng);
        let f = t.dft(Direction::Forward);
        let ratio = f.frobenius_norm().powi(2) / t.frobenius_norm().powi(2);
        assert!((ratio - 60.0).abs() < 1e-10);
    }
}
