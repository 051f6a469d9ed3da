//! Tensor-train (TT) format.
//!
//! A tensor `A(i_1, ..., i_d)` is stored as a chain of three-way cores
//! `G_k` of shape `r_{k-1} x n_k x r_k` with `r_0 = r_d = 1`:
//!
//! ```text
//! A(i_1, ..., i_d) = G_1(i_1) G_2(i_2) ... G_d(i_d)
//! ```
//!
//! where each `G_k(i_k)` is an `r_{k-1} x r_k` matrix. Cores are complex
//! throughout; real tensors carry zero imaginary parts.

mod decomp;
pub mod io;
mod ops;

use ndarray::{s, Array1, Array2, Array3, ArrayView2, Axis};
use rand::Rng;

use crate::dense::{check_index, check_shape, DenseTensor, MultiIndex, ScalarField};
use crate::error::{Error, Result};
use crate::C64;

/// One TT-core of shape `(left_rank, mode_size, right_rank)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TTCore {
    data: Array3<C64>,
}

impl TTCore {
    pub fn new(data: Array3<C64>) -> Result<Self> {
        let (a, n, b) = data.dim();
        if a == 0 || n == 0 || b == 0 {
            return Err(Error::invalid(format!(
                "TT-core dimensions must be positive, got ({a}, {n}, {b})"
            )));
        }
        Ok(Self {
            data: data.as_standard_layout().into_owned(),
        })
    }

    pub fn left_rank(&self) -> usize {
        self.data.dim().0
    }

    pub fn mode_size(&self) -> usize {
        self.data.dim().1
    }

    pub fn right_rank(&self) -> usize {
        self.data.dim().2
    }

    pub fn data(&self) -> &Array3<C64> {
        &self.data
    }

    pub fn into_data(self) -> Array3<C64> {
        self.data
    }

    /// The `r_{k-1} x r_k` matrix `G_k(i)`.
    pub fn slice(&self, i: usize) -> ArrayView2<'_, C64> {
        self.data.index_axis(Axis(1), i)
    }

    /// Unfolding of shape `(left_rank * mode_size, right_rank)`.
    pub(crate) fn left_unfolding(&self) -> ArrayView2<'_, C64> {
        let (a, n, b) = self.data.dim();
        self.data
            .view()
            .into_shape_with_order((a * n, b))
            .expect("standard layout core")
    }

    /// Unfolding of shape `(left_rank, mode_size * right_rank)`.
    pub(crate) fn right_unfolding(&self) -> ArrayView2<'_, C64> {
        let (a, n, b) = self.data.dim();
        self.data
            .view()
            .into_shape_with_order((a, n * b))
            .expect("standard layout core")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TTTensor {
    cores: Vec<TTCore>,
}

pub(crate) fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

pub(crate) fn one() -> C64 {
    C64::new(1.0, 0.0)
}

impl TTTensor {
    /// Validates boundary ranks and rank chaining.
    pub fn new(cores: Vec<TTCore>) -> Result<Self> {
        if cores.is_empty() {
            return Err(Error::invalid("a TT tensor needs at least one core"));
        }
        if cores[0].left_rank() != 1 || cores[cores.len() - 1].right_rank() != 1 {
            return Err(Error::invalid("boundary TT-ranks must equal 1"));
        }
        for (k, w) in cores.windows(2).enumerate() {
            if w[0].right_rank() != w[1].left_rank() {
                return Err(Error::invalid(format!(
                    "rank mismatch between cores {k} and {}: {} vs {}",
                    k + 1,
                    w[0].right_rank(),
                    w[1].left_rank()
                )));
            }
        }
        Ok(Self { cores })
    }

    pub fn from_arrays(cores: Vec<Array3<C64>>) -> Result<Self> {
        Self::new(cores.into_iter().map(TTCore::new).collect::<Result<_>>()?)
    }

    /// Rank-1 tensor `v_1(i_1) v_2(i_2) ... v_d(i_d)`.
    pub fn rank_one(factors: &[Vec<C64>]) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::invalid("a TT tensor needs at least one core"));
        }
        let cores = factors
            .iter()
            .map(|v| {
                let n = v.len();
                Array3::from_shape_vec((1, n, 1), v.clone())
                    .map_err(Error::from)
                    .and_then(TTCore::new)
            })
            .collect::<Result<_>>()?;
        Self::new(cores)
    }

    pub fn ones(shape: &[usize]) -> Result<Self> {
        check_shape(shape)?;
        Self::rank_one(&shape.iter().map(|&n| vec![one(); n]).collect::<Vec<_>>())
    }

    pub fn zeros(shape: &[usize]) -> Result<Self> {
        check_shape(shape)?;
        Self::rank_one(&shape.iter().map(|&n| vec![zero(); n]).collect::<Vec<_>>())
    }

    /// Random cores with entries uniform in `[-1, 1]` (real or complex).
    ///
    /// `ranks` lists the interior ranks `r_1, ..., r_{d-1}`.
    pub fn random<R: Rng>(shape: &[usize], ranks: &[usize], complex: bool, rng: &mut R) -> Result<Self> {
        check_shape(shape)?;
        if ranks.len() + 1 != shape.len() || ranks.contains(&0) {
            return Err(Error::invalid("need d-1 positive interior ranks"));
        }
        let mut full = vec![1];
        full.extend_from_slice(ranks);
        full.push(1);
        let cores = shape
            .iter()
            .enumerate()
            .map(|(k, &n)| {
                Array3::from_shape_simple_fn((full[k], n, full[k + 1]), || {
                    let re = rng.gen_range(-1.0..1.0);
                    let im = if complex { rng.gen_range(-1.0..1.0) } else { 0.0 };
                    C64::new(re, im)
                })
            })
            .collect();
        Self::from_arrays(cores)
    }

    pub fn ndim(&self) -> usize {
        self.cores.len()
    }

    pub fn mode_sizes(&self) -> Vec<usize> {
        self.cores.iter().map(TTCore::mode_size).collect()
    }

    /// Full rank vector `(r_0, r_1, ..., r_d)`.
    pub fn ranks(&self) -> Vec<usize> {
        let mut r: Vec<usize> = self.cores.iter().map(TTCore::left_rank).collect();
        r.push(1);
        r
    }

    pub fn max_rank(&self) -> usize {
        self.ranks().into_iter().max().unwrap_or(1)
    }

    pub fn cores(&self) -> &[TTCore] {
        &self.cores
    }

    pub fn into_cores(self) -> Vec<TTCore> {
        self.cores
    }

    /// Number of stored scalars.
    pub fn storage(&self) -> usize {
        self.cores.iter().map(|c| c.data.len()).sum()
    }

    /// True when every core entry has a zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.cores.iter().all(|c| c.data.iter().all(|x| x.im == 0.0))
    }

    /// `G_1(i_1) ... G_d(i_d)`.
    pub fn element(&self, idx: &[usize]) -> Result<C64> {
        check_index(&self.mode_sizes(), idx)?;
        Ok(self.element_unchecked(idx))
    }

    pub(crate) fn element_unchecked(&self, idx: &[usize]) -> C64 {
        let mut v: Array1<C64> = self.cores[0].slice(idx[0]).row(0).to_owned();
        for (core, &i) in self.cores.iter().zip(idx).skip(1) {
            v = v.dot(&core.slice(i));
        }
        v[0]
    }

    pub fn to_dense(&self) -> Result<DenseTensor> {
        // acc has shape (prod of leading modes, r_k)
        let mut acc = Array2::from_elem((1, 1), one());
        for core in &self.cores {
            let rows = acc.nrows();
            let (_, n, rr) = core.data.dim();
            let next = acc.dot(&core.right_unfolding());
            acc = next.into_shape_with_order((rows * n, rr))?;
        }
        let data = acc.into_raw_vec_and_offset().0;
        let mut t = DenseTensor::new(self.mode_sizes(), data)?;
        if self.is_real() {
            t.set_field(ScalarField::Real);
        }
        Ok(t)
    }

    /// `sum_i conj(self(i)) * other(i)`.
    pub fn dot(&self, other: &TTTensor) -> Result<C64> {
        if self.mode_sizes() != other.mode_sizes() {
            return Err(Error::invalid(format!(
                "mode sizes differ: {:?} vs {:?}",
                self.mode_sizes(),
                other.mode_sizes()
            )));
        }
        let mut phi = Array2::from_elem((1, 1), one());
        for (a, b) in self.cores.iter().zip(&other.cores) {
            let (ra, n, ra2) = a.data.dim();
            let rb2 = b.right_rank();
            let t = phi.dot(&b.right_unfolding());
            let t = t.into_shape_with_order((ra * n, rb2))?;
            let a_conj_t = a.left_unfolding().t().mapv(|x| x.conj());
            phi = a_conj_t.dot(&t);
            debug_assert_eq!(phi.dim(), (ra2, rb2));
        }
        Ok(phi[[0, 0]])
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).map(|x| x.re.max(0.0).sqrt()).unwrap_or(0.0)
    }

    pub fn scale(&self, alpha: C64) -> TTTensor {
        let mut out = self.clone();
        out.cores[0].data.mapv_inplace(|x| x * alpha);
        out
    }

    pub fn conj(&self) -> TTTensor {
        let mut out = self.clone();
        for c in &mut out.cores {
            c.data.mapv_inplace(|x| x.conj());
        }
        out
    }

    /// Exact sum; ranks add (except the boundary ones).
    pub fn add(&self, other: &TTTensor) -> Result<TTTensor> {
        if self.mode_sizes() != other.mode_sizes() {
            return Err(Error::invalid("mode sizes differ in TT addition"));
        }
        let d = self.ndim();
        if d == 1 {
            let data = &self.cores[0].data + &other.cores[0].data;
            return Self::from_arrays(vec![data]);
        }
        let cores = self
            .cores
            .iter()
            .zip(&other.cores)
            .enumerate()
            .map(|(k, (a, b))| {
                let (ra, n, ra2) = a.data.dim();
                let (rb, _, rb2) = b.data.dim();
                let rows = if k == 0 { 1 } else { ra + rb };
                let cols = if k == d - 1 { 1 } else { ra2 + rb2 };
                let mut c = Array3::from_elem((rows, n, cols), zero());
                if k == 0 {
                    c.slice_mut(s![.., .., ..ra2]).assign(&a.data);
                    c.slice_mut(s![.., .., ra2..]).assign(&b.data);
                } else if k == d - 1 {
                    c.slice_mut(s![..ra, .., ..]).assign(&a.data);
                    c.slice_mut(s![ra.., .., ..]).assign(&b.data);
                } else {
                    c.slice_mut(s![..ra, .., ..ra2]).assign(&a.data);
                    c.slice_mut(s![ra.., .., ra2..]).assign(&b.data);
                }
                c
            })
            .collect();
        Self::from_arrays(cores)
    }

    pub fn sub(&self, other: &TTTensor) -> Result<TTTensor> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// Row vectors `G_1(p_1) ... G_k(p_k)` for each prefix of length `k`,
    /// stacked into a `prefixes.len() x r_k` matrix.
    pub(crate) fn left_interfaces(&self, prefixes: &[MultiIndex]) -> Array2<C64> {
        let k = prefixes.first().map_or(0, Vec::len);
        let r = if k == 0 { 1 } else { self.cores[k - 1].right_rank() };
        let mut out = Array2::from_elem((prefixes.len(), r), zero());
        for (row, p) in prefixes.iter().enumerate() {
            debug_assert_eq!(p.len(), k);
            if k == 0 {
                out[[row, 0]] = one();
                continue;
            }
            let mut v: Array1<C64> = self.cores[0].slice(p[0]).row(0).to_owned();
            for j in 1..k {
                v = v.dot(&self.cores[j].slice(p[j]));
            }
            out.row_mut(row).assign(&v);
        }
        out
    }

    /// Column vectors `G_{k+1}(s_1) ... G_d(s_{d-k})` for each suffix, stacked
    /// into an `r_k x suffixes.len()` matrix. `start` is the first mode of the
    /// suffixes.
    pub(crate) fn right_interfaces(&self, start: usize, suffixes: &[MultiIndex]) -> Array2<C64> {
        let d = self.ndim();
        let r = if start == d { 1 } else { self.cores[start].left_rank() };
        let mut out = Array2::from_elem((r, suffixes.len()), zero());
        for (col, s) in suffixes.iter().enumerate() {
            debug_assert_eq!(s.len(), d - start);
            if start == d {
                out[[0, col]] = one();
                continue;
            }
            let last = d - 1;
            let mut v: Array1<C64> = self.cores[last].slice(s[s.len() - 1]).column(0).to_owned();
            for j in (start..last).rev() {
                v = self.cores[j].slice(s[j - start]).dot(&v);
            }
            out.column_mut(col).assign(&v);
        }
        out
    }

    /// Entries `A(p, i, s)` for all prefixes `p` (length `mode`), all `i` in
    /// mode `mode`, and all suffixes `s`, as an array of shape
    /// `(prefixes.len(), n_mode, suffixes.len())`.
    pub(crate) fn block(&self, prefixes: &[MultiIndex], mode: usize, suffixes: &[MultiIndex]) -> Array3<C64> {
        let left = if mode == 0 {
            Array2::from_elem((prefixes.len(), 1), one())
        } else {
            self.left_interfaces(prefixes)
        };
        let right = self.right_interfaces(mode + 1, suffixes);
        let core = &self.cores[mode];
        let (rl, n, rr) = core.data.dim();
        let p = prefixes.len();
        let m = suffixes.len();
        let mut out = Array3::from_elem((p, n, m), zero());
        // work through the mode in chunks that stay in cache
        let chunk = (16_384 / (p * rr.max(m)).max(1)).clamp(1, n);
        let mut start = 0;
        while start < n {
            let end = (start + chunk).min(n);
            let c = end - start;
            let piece = core
                .data
                .slice(s![.., start..end, ..])
                .as_standard_layout()
                .into_owned()
                .into_shape_with_order((rl, c * rr))
                .expect("contiguous");
            let t = left.dot(&piece).into_shape_with_order((p * c, rr)).expect("contiguous");
            let v = t.dot(&right).into_shape_with_order((p, c, m)).expect("contiguous");
            out.slice_mut(s![.., start..end, ..]).assign(&v);
            start = end;
        }
        out
    }

}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dense_dot(a: &DenseTensor, b: &DenseTensor) -> C64 {
        a.data().iter().zip(b.data()).map(|(x, y)| x.conj() * y).sum()
    }

    #[test]
    fn constructor_checks_ranks() {
        let a = Array3::from_elem((1, 2, 2), one());
        let b = Array3::from_elem((3, 2, 1), one());
        assert!(TTTensor::from_arrays(vec![a.clone(), b]).is_err());
        let c = Array3::from_elem((2, 2, 2), one());
        assert!(TTTensor::from_arrays(vec![a, c]).is_err());
        assert!(TTTensor::from_arrays(vec![]).is_err());
    }

    #[test]
    fn ones_element_is_one() {
        let t = TTTensor::ones(&[3, 4, 5]).unwrap();
        assert_eq!(t.element(&[2, 3, 4]).unwrap(), one());
        assert!(t.element(&[3, 0, 0]).is_err());
    }

    #[test]
    fn single_core_is_a_vector() {
        let v: Vec<C64> = (0..4).map(|i| C64::new(i as f64, -1.0)).collect();
        let t = TTTensor::rank_one(std::slice::from_ref(&v)).unwrap();
        for i in 0..4 {
            assert_eq!(t.element(&[i]).unwrap(), v[i]);
        }
    }

    #[test]
    fn element_matches_dense_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = TTTensor::random(&[3, 4, 2, 5], &[2, 3, 2], true, &mut rng).unwrap();
        let dense = t.to_dense().unwrap();
        for flat in 0..dense.len() {
            let idx = crate::dense::unravel(dense.shape(), flat);
            let e = t.element(&idx).unwrap();
            assert!((e - dense.data()[flat]).norm() <= 1e-13 * (1.0 + e.norm()));
        }
    }

    #[test]
    fn dot_examples() {
        let t = TTTensor::ones(&[2, 2, 2]).unwrap();
        assert!((t.dot(&t).unwrap() - C64::new(8.0, 0.0)).norm() < 1e-14);
        let e0 = TTTensor::rank_one(&[vec![one(), zero()], vec![one(), one()]]).unwrap();
        let e1 = TTTensor::rank_one(&[vec![zero(), one()], vec![one(), one()]]).unwrap();
        assert_eq!(e0.dot(&e1).unwrap(), zero());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = TTTensor::random(&[3, 4, 5], &[2, 3], true, &mut rng).unwrap();
        let b = TTTensor::random(&[3, 4, 5], &[3, 2], true, &mut rng).unwrap();
        let reference = dense_dot(&a.to_dense().unwrap(), &b.to_dense().unwrap());
        assert!((a.dot(&b).unwrap() - reference).norm() <= 1e-12 * reference.norm().max(1.0));
        assert!(a.dot(&TTTensor::ones(&[3, 4]).unwrap()).is_err());
    }

    #[test]
    fn addition_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for shape in [vec![5usize], vec![3, 4], vec![2, 3, 4]] {
            let ranks_a: Vec<usize> = vec![2; shape.len() - 1];
            let ranks_b: Vec<usize> = vec![3; shape.len() - 1];
            let a = TTTensor::random(&shape, &ranks_a, true, &mut rng).unwrap();
            let b = TTTensor::random(&shape, &ranks_b, true, &mut rng).unwrap();
            let sum = a.sub(&b).unwrap().to_dense().unwrap();
            let reference = a
                .to_dense()
                .unwrap()
                .add(&b.to_dense().unwrap().scaled(C64::new(-1.0, 0.0)))
                .unwrap();
            assert!(sum.relative_error(&reference).unwrap() < 1e-13);
        }
    }

    #[test]
    fn block_matches_elements() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let t = TTTensor::random(&[3, 4, 5, 2], &[2, 3, 2], true, &mut rng).unwrap();
        let prefixes = vec![vec![0, 1], vec![2, 3]];
        let suffixes = vec![vec![1], vec![0]];
        let b = t.block(&prefixes, 2, &suffixes);
        for (pi, p) in prefixes.iter().enumerate() {
            for i in 0..5 {
                for (si, s) in suffixes.iter().enumerate() {
                    let idx = [p[0], p[1], i, s[0]];
                    assert!((b[[pi, i, si]] - t.element(&idx).unwrap()).norm() < 1e-13);
                }
            }
        }
        let first = t.block(&[vec![]], 0, &[vec![1, 2, 0]]);
        assert!((first[[0, 2, 0]] - t.element(&[2, 1, 2, 0]).unwrap()).norm() < 1e-13);
    }
}
