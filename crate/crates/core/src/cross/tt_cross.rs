//! TT-cross: alternating sweeps over nested index sets with maxvol pivots.

use std::collections::HashSet;

use ndarray::{Array2, Array3, Axis};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::maxvol::maxvol;
use super::{BlackBox, CrossConfig};
use crate::dense::MultiIndex;
use crate::error::{Error, Result};
use crate::linalg::{column_basis_bounded, inverse};
use crate::tt::TTTensor;
use crate::C64;

/// Diagnostics of a TT-cross run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CrossStats {
    /// Number of black-box entries evaluated, validation samples included.
    pub evaluations: u64,
    pub sweeps: usize,
    /// Largest relative mismatch between freshly evaluated blocks and the
    /// previous approximation during the last sweep.
    pub fiber_error: f64,
    /// Sampled relative error of the result.
    pub validation_error: f64,
    pub ranks: Vec<usize>,
    /// Largest rank reached during the run.
    pub max_rank: usize,
    /// Full fibres on which the result interpolates the black box exactly:
    /// `(mode, index with that mode set to 0)`.
    pub interpolation_fibers: Vec<(usize, MultiIndex)>,
    /// Suffix index sets `J[0..=d]` at exit. Passing them to
    /// [`tt_cross_seeded`] restarts a nearby problem from these pivots.
    pub suffix_sets: Vec<Vec<MultiIndex>>,
}

#[derive(Clone, Copy, PartialEq)]
enum Sweep {
    LeftToRight,
    RightToLeft,
}

fn random_multi_index<R: Rng>(rng: &mut R, sizes: &[usize]) -> MultiIndex {
    sizes.iter().map(|&n| rng.gen_range(0..n)).collect()
}

/// Appends up to `extra` random distinct multi-indices over `sizes`.
fn enrich<R: Rng>(base: &[MultiIndex], extra: usize, sizes: &[usize], rng: &mut R) -> Vec<MultiIndex> {
    let capacity: f64 = sizes.iter().map(|&n| n as f64).product();
    let mut seen: HashSet<MultiIndex> = base.iter().cloned().collect();
    let mut out = base.to_vec();
    let target = (base.len() + extra).min(capacity.min(1e18) as usize);
    let mut attempts = 0;
    while out.len() < target && attempts < 20 * (extra + 1) {
        attempts += 1;
        let idx = random_multi_index(rng, sizes);
        if seen.insert(idx.clone()) {
            out.push(idx);
        }
    }
    out
}

/// Per-mode coordinates that occur in the current index sets.
fn pivot_coordinates(left: &[Vec<MultiIndex>], right: &[Vec<MultiIndex>], d: usize) -> Vec<Vec<usize>> {
    let mut coords: Vec<Vec<usize>> = vec![Vec::new(); d];
    for set in left {
        for idx in set {
            for (k, &i) in idx.iter().enumerate() {
                coords[k].push(i);
            }
        }
    }
    for (k0, set) in right.iter().enumerate() {
        for idx in set {
            for (j, &i) in idx.iter().enumerate() {
                coords[k0 + j].push(i);
            }
        }
    }
    for c in &mut coords {
        c.sort_unstable();
        c.dedup();
    }
    coords
}

/// Probability that `offset_draw` returns `j` for `|j| = 1 .. n-1`: the
/// magnitude is log-uniform on `[1, n)`, the sign is fair.
fn offset_probability(j: usize, n: usize) -> f64 {
    if j == 0 || j >= n {
        return 0.0;
    }
    let ln_n = (n as f64).ln();
    0.5 * (((j + 1) as f64).ln() - (j as f64).ln()) / ln_n
}

/// Random indices biased towards the pivots, with their sampling
/// probabilities. Each coordinate is, with equal odds, uniform, a pivot
/// coordinate, or a pivot coordinate moved by a log-uniform offset.
fn local_samples<R: Rng>(coords: &[Vec<usize>], sizes: &[usize], count: usize, rng: &mut R) -> Vec<(MultiIndex, f64)> {
    (0..count)
        .map(|_| {
            let mut q = 1.0;
            let idx = sizes
                .iter()
                .zip(coords)
                .map(|(&n, c)| {
                    let choice = if c.is_empty() || n < 3 { 0 } else { rng.gen_range(0..3) };
                    let x = match choice {
                        0 => rng.gen_range(0..n),
                        1 => c[rng.gen_range(0..c.len())],
                        _ => {
                            let base = c[rng.gen_range(0..c.len())] as i64;
                            let mag = ((rng.gen::<f64>() * (n as f64).ln()).exp().floor() as i64).clamp(1, n as i64 - 1);
                            let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
                            (base + sign * mag).rem_euclid(n as i64) as usize
                        }
                    };
                    q *= if c.is_empty() || n < 3 {
                        1.0 / n as f64
                    } else {
                        let mut near = 0.0;
                        let mut exact = 0.0;
                        for &b in c {
                            if b == x {
                                exact += 1.0;
                            }
                            let up = (x + n - b) % n;
                            near += offset_probability(up, n) + offset_probability(n - up, n);
                        }
                        let k = c.len() as f64;
                        (1.0 / n as f64 + exact / k + near / k) / 3.0
                    };
                    x
                })
                .collect();
            (idx, q)
        })
        .collect()
}

/// Appends the given prefixes (or suffixes) that are not yet present.
fn merge(base: Vec<MultiIndex>, extra: impl Iterator<Item = MultiIndex>) -> Vec<MultiIndex> {
    let mut seen: HashSet<MultiIndex> = base.iter().cloned().collect();
    let mut out = base;
    for idx in extra {
        if seen.insert(idx.clone()) {
            out.push(idx);
        }
    }
    out
}

fn relative_mismatch(fresh: &Array3<C64>, approx: &Array3<C64>) -> f64 {
    let mut diff = 0.0;
    let mut norm = 0.0;
    for (x, y) in fresh.iter().zip(approx) {
        diff += (x - y).norm_sqr();
        norm += x.norm_sqr();
    }
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

/// Interpolating factor `q q[rows]^-1` and the selected rows of the
/// truncated column space of `mat`.
fn skeleton_step(mat: &Array2<C64>, svd_tol: f64, min_rank: usize, max_rank: usize) -> Result<(Array2<C64>, Vec<usize>)> {
    let q = column_basis_bounded(&mat.view(), svd_tol, min_rank, max_rank)?;
    let rows = maxvol(&q.view())?;
    let sub = q.select(Axis(0), &rows);
    let factor = q.dot(&inverse(&sub.view())?);
    Ok((factor, rows))
}

fn seeds_fit(seed: &[Vec<MultiIndex>], sizes: &[usize]) -> bool {
    let d = sizes.len();
    seed.len() == d + 1
        && (1..d).all(|k| {
            !seed[k].is_empty()
                && seed[k]
                    .iter()
                    .all(|idx| idx.len() == d - k && idx.iter().zip(&sizes[k..]).all(|(i, n)| i < n))
        })
}

/// Relative accuracy used to truncate each unfolded block.
fn block_tolerance(delta: f64, d: usize) -> f64 {
    delta / (4.0 * (d as f64).sqrt())
}

fn validation_error(t: &TTTensor, samples: &[MultiIndex], values: &[C64], total: f64) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let mse = samples
        .iter()
        .zip(values)
        .map(|(idx, v)| (t.element_unchecked(idx) - v).norm_sqr())
        .sum::<f64>()
        / samples.len() as f64;
    let rms = t.norm() / total.sqrt();
    if rms == 0.0 {
        if mse == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        mse.sqrt() / rms
    }
}

/// Approximates a black-box tensor in the TT format.
pub fn tt_cross(bb: &dyn BlackBox, cfg: &CrossConfig) -> Result<TTTensor> {
    tt_cross_with_stats(bb, cfg, None).map(|(t, _)| t)
}

/// Like [`tt_cross`], also returning run statistics. `warm_start` replaces
/// `cfg.initial_rank` when given.
pub fn tt_cross_with_stats(
    bb: &dyn BlackBox,
    cfg: &CrossConfig,
    warm_start: Option<usize>,
) -> Result<(TTTensor, CrossStats)> {
    tt_cross_seeded(bb, cfg, warm_start, None)
}

/// Like [`tt_cross_with_stats`], starting from the suffix sets of an earlier
/// run when they fit the mode sizes.
pub fn tt_cross_seeded(
    bb: &dyn BlackBox,
    cfg: &CrossConfig,
    warm_start: Option<usize>,
    suffixes: Option<&[Vec<MultiIndex>]>,
) -> Result<(TTTensor, CrossStats)> {
    cfg.validate()?;
    let sizes = bb.mode_sizes().to_vec();
    crate::dense::check_shape(&sizes)?;
    let d = sizes.len();
    let delta = cfg.tolerance;
    let mut stats = CrossStats::default();

    if d == 1 {
        let block = bb.block(&[vec![]], 0, &[vec![]])?;
        stats.evaluations = block.len() as u64;
        stats.sweeps = 1;
        let t = TTTensor::from_arrays(vec![block])?;
        stats.ranks = t.ranks();
        stats.max_rank = 1;
        stats.interpolation_fibers = vec![(0, vec![0])];
        return Ok((t, stats));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let total: f64 = sizes.iter().map(|&n| n as f64).product();

    let samples: Vec<MultiIndex> = (0..cfg.validation_samples)
        .map(|_| random_multi_index(&mut rng, &sizes))
        .collect();
    let values = samples.iter().map(|s| bb.element(s)).collect::<Result<Vec<_>>>()?;
    stats.evaluations += samples.len() as u64;

    // prefix sets I[k] (length k) and suffix sets J[k] (modes k..d)
    let r0 = warm_start.unwrap_or(cfg.initial_rank).clamp(1, cfg.max_rank);
    let mut left: Vec<Vec<MultiIndex>> = vec![vec![vec![]]; d + 1];
    let mut right: Vec<Vec<MultiIndex>> = vec![vec![vec![]]; d + 1];
    for k in 1..d {
        right[k] = enrich(&[], r0, &sizes[k..], &mut rng);
    }
    if let Some(seed) = suffixes.filter(|s| seeds_fit(s, &sizes)) {
        for k in 1..d {
            right[k] = seed[k].iter().take(cfg.max_rank).cloned().collect();
        }
    }

    let mut svd_tol = block_tolerance(delta, d);
    let mut extra = cfg.rank_increment;
    let mut approx: Option<TTTensor> = None;
    let mut all_zero = true;
    let mut achieved = f64::INFINITY;
    let mut previous_val = f64::INFINITY;
    // worst-fitting local samples of the previous sweep
    let mut injected: Vec<MultiIndex> = Vec::new();

    for sweep in 0..cfg.max_sweeps {
        let direction = if sweep % 2 == 0 { Sweep::LeftToRight } else { Sweep::RightToLeft };
        let mut fiber_error: f64 = if approx.is_some() { 0.0 } else { f64::INFINITY };
        let mut cores: Vec<Option<Array3<C64>>> = vec![None; d];
        // bond ranks never drop below those of the previous sweep
        let floor = approx.as_ref().map_or(vec![1; d + 1], |t| t.ranks());
        let mut saturated = false;

        let mut observe = |block: &Array3<C64>, prefixes: &[MultiIndex], k: usize, suffixes: &[MultiIndex]| {
            stats.evaluations += block.len() as u64;
            if block.iter().any(|x| *x != C64::new(0.0, 0.0)) {
                all_zero = false;
            }
            if let Some(prev) = &approx {
                let old = prev.block(prefixes, k, suffixes);
                fiber_error = fiber_error.max(relative_mismatch(block, &old));
            }
        };

        match direction {
            Sweep::LeftToRight => {
                for k in 0..d - 1 {
                    let cols = merge(right[k + 1].clone(), injected.iter().map(|idx| idx[k + 1..].to_vec()));
                    let cols = enrich(&cols, extra, &sizes[k + 1..], &mut rng);
                    let block = bb.block(&left[k], k, &cols)?;
                    observe(&block, &left[k], k, &cols);
                    let (p, n, s) = block.dim();
                    let mat = block.into_shape_with_order((p * n, s))?;
                    let cap = cfg.max_rank.min(p * n).min(s);
                    let (factor, rows) = skeleton_step(&mat, svd_tol, floor[k + 1], cap)?;
                    let rho = rows.len();
                    saturated |= rho == s && rho < cfg.max_rank;
                    left[k + 1] = rows
                        .iter()
                        .map(|&row| {
                            let mut idx = left[k][row / n].clone();
                            idx.push(row % n);
                            idx
                        })
                        .collect();
                    cores[k] = Some(factor.into_shape_with_order((p, n, rho))?);
                }
                let block = bb.block(&left[d - 1], d - 1, &[vec![]])?;
                observe(&block, &left[d - 1], d - 1, &[vec![]]);
                cores[d - 1] = Some(block);
            }
            Sweep::RightToLeft => {
                for k in (1..d).rev() {
                    let rows_ext = merge(left[k].clone(), injected.iter().map(|idx| idx[..k].to_vec()));
                    let rows_ext = enrich(&rows_ext, extra, &sizes[..k], &mut rng);
                    let block = bb.block(&rows_ext, k, &right[k + 1])?;
                    observe(&block, &rows_ext, k, &right[k + 1]);
                    let (p, n, s) = block.dim();
                    let mat = block.into_shape_with_order((p, n * s))?;
                    let mat_t = mat.t().as_standard_layout().into_owned();
                    let cap = cfg.max_rank.min(p).min(n * s);
                    let (factor, cols) = skeleton_step(&mat_t, svd_tol, floor[k], cap)?;
                    let rho = cols.len();
                    saturated |= rho == p && rho < cfg.max_rank;
                    right[k] = cols
                        .iter()
                        .map(|&c| {
                            let mut idx = vec![c / s];
                            idx.extend_from_slice(&right[k + 1][c % s]);
                            idx
                        })
                        .collect();
                    // factor is (n s) x rho; the core is its transpose
                    let core = factor
                        .t()
                        .as_standard_layout()
                        .into_owned()
                        .into_shape_with_order((rho, n, s))?;
                    cores[k] = Some(core);
                }
                let block = bb.block(&[vec![]], 0, &right[1])?;
                observe(&block, &[vec![]], 0, &right[1]);
                cores[0] = Some(block);
            }
        }

        let tt = TTTensor::from_arrays(cores.into_iter().map(|c| c.expect("all cores set")).collect())?;
        stats.sweeps = sweep + 1;
        stats.max_rank = stats.max_rank.max(tt.max_rank());

        if all_zero && values.iter().all(|v| *v == C64::new(0.0, 0.0)) {
            let zero = TTTensor::zeros(&sizes)?;
            stats.ranks = zero.ranks();
            stats.fiber_error = 0.0;
            stats.validation_error = 0.0;
            return Ok((zero, stats));
        }

        let uniform_val = validation_error(&tt, &samples, &values, total);
        let coords = pivot_coordinates(&left, &right, d);
        let drawn = local_samples(&coords, &sizes, cfg.validation_samples, &mut rng);
        let mut local: Vec<MultiIndex> = Vec::with_capacity(drawn.len());
        let mut local_err: Vec<(f64, usize)> = Vec::with_capacity(drawn.len());
        let mut weighted = 0.0;
        for (i, (idx, q)) in drawn.into_iter().enumerate() {
            let e = (tt.element_unchecked(&idx) - bb.element(&idx)?).norm_sqr() / q;
            weighted += e;
            local_err.push((e, i));
            local.push(idx);
        }
        stats.evaluations += local.len() as u64;
        let tt_norm = tt.norm();
        let local_val = if local.is_empty() {
            0.0
        } else if tt_norm > 0.0 {
            (weighted / local.len() as f64).sqrt() / tt_norm
        } else if weighted > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        let val = uniform_val.max(local_val);
        stats.fiber_error = fiber_error;
        stats.validation_error = val;
        stats.ranks = tt.ranks();
        stats.interpolation_fibers = match direction {
            Sweep::LeftToRight => left[d - 1]
                .iter()
                .map(|p| {
                    let mut idx = p.clone();
                    idx.push(0);
                    (d - 1, idx)
                })
                .collect(),
            Sweep::RightToLeft => right[1]
                .iter()
                .map(|s| {
                    let mut idx = vec![0];
                    idx.extend_from_slice(s);
                    (0, idx)
                })
                .collect(),
        };
        stats.suffix_sets = right.clone();
        if fiber_error <= 2.0 * delta && fiber_error.hypot(val) <= 3.0 * delta {
            return Ok((tt, stats));
        }
        achieved = fiber_error.max(val);
        let cap = (2 * tt.max_rank()).max(cfg.rank_increment).min(cfg.max_rank.max(cfg.rank_increment));
        if fiber_error <= 2.0 * delta {
            // fibres agree but the sampled error does not: keep more of each
            // block and widen the search
            svd_tol = (0.25 * svd_tol).max(f64::EPSILON);
            if !saturated {
                extra = (extra * 2).min(cap);
            }
        } else if val > 0.5 * previous_val && !saturated {
            // slow progress: sample more fibres
            extra = (extra * 2).min(cap);
        }
        previous_val = val;
        local_err.sort_by(|a, b| b.0.total_cmp(&a.0));
        injected = local_err
            .iter()
            .take(extra)
            .filter(|(e, _)| *e > 0.0)
            .map(|&(_, i)| local[i].clone())
            .collect();
        approx = Some(tt);
    }
    Err(Error::ToleranceNotReached {
        target: delta,
        achieved,
        ranks: stats.ranks,
    })
}
