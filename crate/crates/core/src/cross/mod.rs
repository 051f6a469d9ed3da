//! Cross approximation: maxvol, two-dimensional skeleton cross and TT-cross
//! of black-box tensors.

mod maxvol;
mod skeleton;
mod tt_cross;

pub use maxvol::{dominance, maxvol, MAXVOL_TOLERANCE};
pub use skeleton::{skeleton_cross, skeleton_cross_with_stats, DenseMatrix, MatrixBlackBox, SkeletonFactors};
pub use tt_cross::{tt_cross, tt_cross_seeded, tt_cross_with_stats, CrossStats};

use ndarray::Array3;

use crate::dense::{check_index, MultiIndex};
use crate::error::{Error, Result};
use crate::tt::TTTensor;
use crate::C64;

/// A tensor known only through its entries.
///
/// Implementations must be deterministic: the same index always yields the
/// same value.
pub trait BlackBox: Sync {
    fn mode_sizes(&self) -> &[usize];

    fn element(&self, idx: &[usize]) -> Result<C64>;

    /// `A(prefix, i, suffix)` for all `i` in mode `mode`.
    fn fiber(&self, prefix: &[usize], mode: usize, suffix: &[usize]) -> Result<Vec<C64>> {
        let n = self.mode_sizes()[mode];
        let mut idx: Vec<usize> = prefix.iter().copied().chain(std::iter::once(0)).chain(suffix.iter().copied()).collect();
        (0..n)
            .map(|i| {
                idx[mode] = i;
                self.element(&idx)
            })
            .collect()
    }

    /// `A(p, i, s)` for every prefix `p` (length `mode`), every `i`, and every
    /// suffix `s`, shaped `(prefixes.len(), n_mode, suffixes.len())`.
    fn block(&self, prefixes: &[MultiIndex], mode: usize, suffixes: &[MultiIndex]) -> Result<Array3<C64>> {
        let n = self.mode_sizes()[mode];
        let mut out = Array3::from_elem((prefixes.len(), n, suffixes.len()), C64::new(0.0, 0.0));
        for (a, p) in prefixes.iter().enumerate() {
            for (b, s) in suffixes.iter().enumerate() {
                let f = self.fiber(p, mode, s)?;
                for (i, v) in f.into_iter().enumerate() {
                    out[[a, i, b]] = v;
                }
            }
        }
        Ok(out)
    }
}

/// Black box backed by a closure.
pub struct FnBlackBox<F> {
    sizes: Vec<usize>,
    f: F,
}

impl<F> FnBlackBox<F>
where
    F: Fn(&[usize]) -> C64 + Sync,
{
    pub fn new(sizes: Vec<usize>, f: F) -> Result<Self> {
        crate::dense::check_shape(&sizes)?;
        Ok(Self { sizes, f })
    }
}

impl<F> BlackBox for FnBlackBox<F>
where
    F: Fn(&[usize]) -> C64 + Sync,
{
    fn mode_sizes(&self) -> &[usize] {
        &self.sizes
    }

    fn element(&self, idx: &[usize]) -> Result<C64> {
        Ok((self.f)(idx))
    }
}

/// Elementwise product of two TT tensors, evaluated on demand.
pub struct HadamardBlackBox<'a> {
    a: &'a TTTensor,
    b: &'a TTTensor,
    sizes: Vec<usize>,
}

/// Black box whose entries are `a(i) * b(i)`.
pub fn hadamard_evaluator<'a>(a: &'a TTTensor, b: &'a TTTensor) -> Result<HadamardBlackBox<'a>> {
    if a.mode_sizes() != b.mode_sizes() {
        return Err(Error::invalid(format!(
            "mode sizes differ: {:?} vs {:?}",
            a.mode_sizes(),
            b.mode_sizes()
        )));
    }
    Ok(HadamardBlackBox {
        a,
        b,
        sizes: a.mode_sizes(),
    })
}

impl BlackBox for HadamardBlackBox<'_> {
    fn mode_sizes(&self) -> &[usize] {
        &self.sizes
    }

    fn element(&self, idx: &[usize]) -> Result<C64> {
        check_index(&self.sizes, idx)?;
        Ok(self.a.element_unchecked(idx) * self.b.element_unchecked(idx))
    }

    fn fiber(&self, prefix: &[usize], mode: usize, suffix: &[usize]) -> Result<Vec<C64>> {
        let b = self.block(&[prefix.to_vec()], mode, &[suffix.to_vec()])?;
        Ok(b.iter().copied().collect())
    }

    fn block(&self, prefixes: &[MultiIndex], mode: usize, suffixes: &[MultiIndex]) -> Result<Array3<C64>> {
        let mut x = self.a.block(prefixes, mode, suffixes);
        let y = self.b.block(prefixes, mode, suffixes);
        x.zip_mut_with(&y, |u, v| *u *= *v);
        Ok(x)
    }
}

/// Parameters of the cross approximation drivers.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossConfig {
    /// Target relative accuracy `delta`, `0 < delta < 1`.
    pub tolerance: f64,
    pub initial_rank: usize,
    pub max_rank: usize,
    /// Each sweep is one pass in one direction.
    pub max_sweeps: usize,
    pub validation_samples: usize,
    /// Random fibres added per step so that ranks can grow.
    pub rank_increment: usize,
    pub seed: u64,
}

pub const DEFAULT_SEED: u64 = 0x5eed_c0de;

impl Default for CrossConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-6,
            initial_rank: 2,
            max_rank: 200,
            max_sweeps: 40,
            validation_samples: 1000,
            rank_increment: 2,
            seed: DEFAULT_SEED,
        }
    }
}

impl CrossConfig {
    pub fn with_tolerance(tolerance: f64) -> Self {
        Self {
            tolerance,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(Error::invalid(format!(
                "cross tolerance must lie in (0, 1), got {}",
                self.tolerance
            )));
        }
        if self.initial_rank == 0 || self.max_rank < self.initial_rank {
            return Err(Error::invalid(format!(
                "need 1 <= initial rank ({}) <= max rank ({})",
                self.initial_rank, self.max_rank
            )));
        }
        if self.max_sweeps == 0 || self.rank_increment == 0 {
            return Err(Error::invalid("max sweeps and rank increment must be positive"));
        }
        Ok(())
    }
}
