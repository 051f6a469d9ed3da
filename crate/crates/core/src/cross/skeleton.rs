//! Skeleton (pseudo-skeleton) cross approximation of matrices.

use ndarray::{Array2, Axis};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::maxvol::maxvol;
use super::CrossConfig;
use crate::error::{Error, Result};
use crate::linalg::{column_basis, inverse};
use crate::C64;

/// A matrix accessed through its rows, columns and single entries.
pub trait MatrixBlackBox: Sync {
    fn shape(&self) -> (usize, usize);

    fn element(&self, i: usize, j: usize) -> Result<C64>;

    /// Columns `cols`, shaped `nrows x cols.len()`.
    fn columns(&self, cols: &[usize]) -> Result<Array2<C64>> {
        let (n, _) = self.shape();
        let mut out = Array2::from_elem((n, cols.len()), C64::new(0.0, 0.0));
        for (b, &j) in cols.iter().enumerate() {
            for i in 0..n {
                out[[i, b]] = self.element(i, j)?;
            }
        }
        Ok(out)
    }

    /// Rows `rows`, shaped `rows.len() x ncols`.
    fn rows(&self, rows: &[usize]) -> Result<Array2<C64>> {
        let (_, m) = self.shape();
        let mut out = Array2::from_elem((rows.len(), m), C64::new(0.0, 0.0));
        for (a, &i) in rows.iter().enumerate() {
            for j in 0..m {
                out[[a, j]] = self.element(i, j)?;
            }
        }
        Ok(out)
    }
}

/// Explicit matrix as a black box.
pub struct DenseMatrix(pub Array2<C64>);

impl MatrixBlackBox for DenseMatrix {
    fn shape(&self) -> (usize, usize) {
        self.0.dim()
    }

    fn element(&self, i: usize, j: usize) -> Result<C64> {
        Ok(self.0[[i, j]])
    }

    fn columns(&self, cols: &[usize]) -> Result<Array2<C64>> {
        Ok(self.0.select(Axis(1), cols))
    }

    fn rows(&self, rows: &[usize]) -> Result<Array2<C64>> {
        Ok(self.0.select(Axis(0), rows))
    }
}

/// `A ~ U V^T` with `U: n x r` and `V: m x r`.
#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonFactors {
    pub u: Array2<C64>,
    pub v: Array2<C64>,
}

impl SkeletonFactors {
    pub fn new(u: Array2<C64>, v: Array2<C64>) -> Result<Self> {
        if u.ncols() != v.ncols() || u.ncols() == 0 {
            return Err(Error::invalid(format!(
                "factor ranks differ or vanish: {} vs {}",
                u.ncols(),
                v.ncols()
            )));
        }
        Ok(Self { u, v })
    }

    pub fn rank(&self) -> usize {
        self.u.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.u.nrows(), self.v.nrows())
    }

    pub fn to_dense(&self) -> Array2<C64> {
        self.u.dot(&self.v.t())
    }

    pub fn element(&self, i: usize, j: usize) -> C64 {
        self.u.row(i).iter().zip(self.v.row(j)).map(|(a, b)| a * b).sum()
    }

    /// `||U V^T||_F` without forming the product.
    pub fn norm(&self) -> f64 {
        let gu = self.u.t().mapv(|x| x.conj()).dot(&self.u);
        let gv = self.v.t().mapv(|x| x.conj()).dot(&self.v);
        // tr(U^H U V^T conj(V)) with V^T conj(V) = conj(V^H V)
        let mut s = C64::new(0.0, 0.0);
        for ((i, j), a) in gu.indexed_iter() {
            s += a * gv[[j, i]].conj();
        }
        s.re.max(0.0).sqrt()
    }

    /// Recompresses to relative accuracy `tol` via QR of both factors.
    pub fn truncate(&self, tol: f64) -> Result<SkeletonFactors> {
        use crate::linalg::{qr_thin, svd_thin, tail_rank};
        let (qu, ru) = qr_thin(&self.u.view())?;
        let (qv, rv) = qr_thin(&self.v.view())?;
        let core = ru.dot(&rv.t());
        let (a, s, bh) = svd_thin(&core.view())?;
        let total = s.iter().map(|x| x * x).sum::<f64>().sqrt();
        let r = tail_rank(s.as_slice().expect("contiguous"), tol * total);
        let mut us = qu.dot(&a.slice(ndarray::s![.., ..r]));
        for (j, mut c) in us.axis_iter_mut(Axis(1)).enumerate() {
            c.mapv_inplace(|x| x * s[j]);
        }
        let v = qv.dot(&bh.slice(ndarray::s![..r, ..]).t());
        SkeletonFactors::new(us, v)
    }
}

fn distinct_random<R: Rng>(rng: &mut R, bound: usize, base: &[usize], extra: usize) -> Vec<usize> {
    let mut out = base.to_vec();
    let target = (base.len() + extra).min(bound);
    let mut attempts = 0;
    while out.len() < target && attempts < 20 * (extra + 1) + bound {
        attempts += 1;
        let j = rng.gen_range(0..bound);
        if !out.contains(&j) {
            out.push(j);
        }
    }
    out
}

fn mismatch(fresh: &Array2<C64>, approx: &Array2<C64>) -> f64 {
    let diff: f64 = fresh.iter().zip(approx).map(|(a, b)| (a - b).norm_sqr()).sum();
    let norm: f64 = fresh.iter().map(|a| a.norm_sqr()).sum();
    if norm == 0.0 {
        if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (diff / norm).sqrt()
    }
}

/// Skeleton approximation `A ~ U V^T` from `O(r)` rows and columns.
pub fn skeleton_cross(a: &dyn MatrixBlackBox, cfg: &CrossConfig) -> Result<SkeletonFactors> {
    skeleton_cross_with_stats(a, cfg).map(|(f, _)| f)
}

/// Returns the factors together with `(evaluated entries, validation error)`.
pub fn skeleton_cross_with_stats(a: &dyn MatrixBlackBox, cfg: &CrossConfig) -> Result<(SkeletonFactors, (u64, f64))> {
    cfg.validate()?;
    let (n, m) = a.shape();
    if n == 0 || m == 0 {
        return Err(Error::invalid("empty matrix"));
    }
    let delta = cfg.tolerance;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut evaluations = 0u64;

    let samples: Vec<(usize, usize)> = (0..cfg.validation_samples)
        .map(|_| (rng.gen_range(0..n), rng.gen_range(0..m)))
        .collect();
    let values = samples.iter().map(|&(i, j)| a.element(i, j)).collect::<Result<Vec<_>>>()?;
    evaluations += samples.len() as u64;
    let total = (n * m) as f64;

    let svd_tol = delta / 2.0;
    let mut extra = cfg.rank_increment;
    let mut cols = distinct_random(&mut rng, m, &[], cfg.initial_rank.min(m));
    let mut prev: Option<SkeletonFactors> = None;
    let mut achieved = f64::INFINITY;

    for _ in 0..cfg.max_sweeps {
        let cols_ext = distinct_random(&mut rng, m, &cols, extra);
        let c = a.columns(&cols_ext)?;
        evaluations += c.len() as u64;
        let mut local = match &prev {
            Some(p) => mismatch(&c, &p.u.dot(&p.v.select(Axis(0), &cols_ext).t())),
            None => f64::INFINITY,
        };
        if c.iter().all(|x| *x == C64::new(0.0, 0.0)) && values.iter().all(|x| *x == C64::new(0.0, 0.0)) && prev.is_none() {
            let f = SkeletonFactors::new(
                Array2::from_elem((n, 1), C64::new(0.0, 0.0)),
                Array2::from_elem((m, 1), C64::new(0.0, 0.0)),
            )?;
            return Ok((f, (evaluations, 0.0)));
        }
        let cap = cfg.max_rank.min(n).min(cols_ext.len());
        let q = column_basis(&c.view(), svd_tol, cap)?;
        let rows = maxvol(&q.view())?;
        let u = q.dot(&inverse(&q.select(Axis(0), &rows).view())?);
        let rho = rows.len();

        let rows_ext = distinct_random(&mut rng, n, &rows, extra);
        let r = a.rows(&rows_ext)?;
        evaluations += r.len() as u64;
        let v = r.slice(ndarray::s![..rho, ..]).t().to_owned();
        let factors = SkeletonFactors::new(u, v)?;
        let approx_rows = factors.u.select(Axis(0), &rows_ext).dot(&factors.v.t());
        local = local.max(mismatch(&r, &approx_rows));

        let rms = factors.norm() / total.sqrt();
        let mse = samples
            .iter()
            .zip(&values)
            .map(|(&(i, j), v)| (factors.element(i, j) - v).norm_sqr())
            .sum::<f64>()
            / samples.len().max(1) as f64;
        let val = if rms == 0.0 { if mse == 0.0 { 0.0 } else { f64::INFINITY } } else { mse.sqrt() / rms };
        achieved = local.max(val / 3.0);
        if local <= delta && val <= 3.0 * delta {
            return Ok((factors, (evaluations, val)));
        }
        let saturated = rho == cols_ext.len() && rho < cfg.max_rank;
        if local <= delta && !saturated {
            extra = (extra * 2).min(cfg.max_rank);
        }
        // next columns from the rows just evaluated
        let rt = r.t().as_standard_layout().into_owned();
        let cap = cfg.max_rank.min(m).min(rows_ext.len());
        let qr = column_basis(&rt.view(), svd_tol, cap)?;
        cols = maxvol(&qr.view())?;
        prev = Some(factors);
    }
    Err(Error::ToleranceNotReached {
        target: delta,
        achieved,
        ranks: prev.map(|p| vec![1, p.rank(), 1]).unwrap_or_default(),
    })
}
