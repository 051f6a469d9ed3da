//! Cross-conv timing over doubling grids.
//!
//! Density and kernel are built once per grid and excluded from the times.
//! Each stage time is the minimum over the repeats.

use serde::Serialize;

use super::config::{DensityKind, KernelKind, RunConfig};
use super::report::ranks_label;
use crate::conv::{cross_conv_report, ConvOperands, StageTimings};
use crate::cross::CrossConfig;
use crate::error::{Error, Result};
use crate::kernels::{kernel_tt_with_stats, sample_function_tt_with, DensityFunction, GridSpec, KernelFunction};

/// Smallest grid of the sweep, `2^7`.
pub const MIN_EXP: u32 = 7;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub n: usize,
    pub d: usize,
    pub eps: f64,
    pub circulant: &'static str,
    pub pad_seconds: f64,
    pub fft_seconds: f64,
    pub cross_seconds: f64,
    pub inverse_seconds: f64,
    pub round_seconds: f64,
    pub total_seconds: f64,
    /// `total(n) / total(n / 2)` at the same eps; empty for the first grid.
    pub time_ratio: Option<f64>,
    pub product_ranks: String,
    pub result_ranks: String,
    pub validation_error: f64,
    pub evaluations: u64,
}

#[derive(Debug, Clone, Copy)]
pub struct BenchOptions {
    pub max_exp: u32,
    pub repeats: usize,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self { max_exp: 10, repeats: 1 }
    }
}

fn fastest(a: StageTimings, b: StageTimings) -> StageTimings {
    StageTimings {
        pad: a.pad.min(b.pad),
        fft: a.fft.min(b.fft),
        cross: a.cross.min(b.cross),
        inverse: a.inverse.min(b.inverse),
        round: a.round.min(b.round),
    }
}

pub fn run_bench(cfg: &RunConfig, opts: &BenchOptions) -> Result<Vec<BenchRecord>> {
    if opts.max_exp < MIN_EXP || opts.max_exp > 16 {
        return Err(Error::invalid(format!("max exponent must lie in [{MIN_EXP}, 16], got {}", opts.max_exp)));
    }
    if opts.repeats == 0 {
        return Err(Error::invalid("repeats must be positive"));
    }
    let density = match cfg.density {
        DensityKind::Slater => DensityFunction::Slater { zeta: cfg.zeta },
        DensityKind::Gaussian => DensityFunction::Gaussian { alpha: cfg.alpha },
    };
    let kernel = match cfg.kernel {
        KernelKind::Newton => KernelFunction::Newton,
        KernelKind::Yukawa => KernelFunction::Yukawa { kappa: cfg.kappa },
    };
    let mut records: Vec<BenchRecord> = Vec::new();
    for &eps in &cfg.eps {
        let mut previous: Option<f64> = None;
        for e in MIN_EXP..=opts.max_exp {
            let n = 1usize << e;
            let grid = GridSpec::new(cfg.half_width, n)?;
            let cross = CrossConfig {
                max_rank: cfg.max_rank,
                seed: cfg.seed,
                ..CrossConfig::with_tolerance(eps)
            };
            let f = sample_function_tt_with(&density, &grid, 3, &cross)?;
            let (g, _) = kernel_tt_with_stats(&kernel, &grid, 3, &cross)?;
            let mut ops = ConvOperands::new(f, g, eps);
            ops.cross = cross;
            ops.circulant = cfg.circulant.into();
            let mut rep = cross_conv_report(&ops)?;
            let mut times = rep.timings;
            for _ in 1..opts.repeats {
                let again = cross_conv_report(&ops)?;
                times = fastest(times, again.timings);
                rep = again;
            }
            let total = times.total();
            records.push(BenchRecord {
                n,
                d: 3,
                eps,
                circulant: cfg.circulant.label(),
                pad_seconds: times.pad,
                fft_seconds: times.fft,
                cross_seconds: times.cross,
                inverse_seconds: times.inverse,
                round_seconds: times.round,
                total_seconds: total,
                time_ratio: previous.map(|p| total / p),
                product_ranks: ranks_label(&rep.product_ranks),
                result_ranks: ranks_label(&rep.result.ranks()),
                validation_error: rep.cross.validation_error,
                evaluations: rep.cross.evaluations,
            });
            previous = Some(total);
        }
    }
    Ok(records)
}
