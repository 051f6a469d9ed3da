//! Potential of a model density on a uniform grid.

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use super::config::{DensityKind, KernelKind, RunConfig};
use super::report::ranks_label;
use crate::cross::CrossConfig;
use crate::error::Result;
use crate::kernels::{
    gaussian_newton_potential, max_target_error, potential_report, slater_newton_potential, DensityFunction, GridSpec,
    KernelFunction,
};
use crate::tt::io::{tt_read, tt_write};

/// Largest grid for which the error against the closed form is computed
/// over every node.
pub const MAX_CHECKED_N: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NewtonRecord {
    pub density: String,
    pub kernel: String,
    pub n: usize,
    #[serde(rename = "L")]
    pub half_width: f64,
    pub eps: f64,
    pub circulant: &'static str,
    pub density_ranks: String,
    pub kernel_ranks: String,
    pub product_ranks: String,
    pub result_ranks: String,
    /// Largest rank of the exact spectral product `r_f r_g`.
    pub rank_product: usize,
    pub evaluations: u64,
    pub sweeps: usize,
    pub validation_error: f64,
    /// Against the closed-form potential, when one is known and `n` is small
    /// enough.
    pub max_error: Option<f64>,
    pub conv_seconds: f64,
    pub total_seconds: f64,
}

#[derive(Debug, Clone, Default)]
pub struct NewtonOptions {
    /// Orbital whose square is the density, replacing `--density`.
    pub density_tt: Option<PathBuf>,
    /// Where to store the potential of the last grid.
    pub save_tt: Option<PathBuf>,
}

fn density_function(cfg: &RunConfig, opts: &NewtonOptions) -> Result<(String, DensityFunction)> {
    if let Some(path) = &opts.density_tt {
        let psi = tt_read(path)?;
        return Ok((format!("orbital:{}", path.display()), DensityFunction::Orbital(Arc::new(psi))));
    }
    Ok(match cfg.density {
        DensityKind::Slater => (format!("slater:{}", cfg.zeta), DensityFunction::Slater { zeta: cfg.zeta }),
        DensityKind::Gaussian => (format!("gaussian:{}", cfg.alpha), DensityFunction::Gaussian { alpha: cfg.alpha }),
    })
}

fn closed_form(cfg: &RunConfig, opts: &NewtonOptions) -> Option<Box<dyn Fn(&[f64; 3]) -> f64>> {
    if opts.density_tt.is_some() || cfg.kernel != KernelKind::Newton {
        return None;
    }
    let r = |x: &[f64; 3]| (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    Some(match cfg.density {
        DensityKind::Slater => {
            let zeta = cfg.zeta;
            Box::new(move |x| slater_newton_potential(zeta, r(x)))
        }
        DensityKind::Gaussian => {
            let alpha = cfg.alpha;
            Box::new(move |x| gaussian_newton_potential(alpha, r(x)))
        }
    })
}

pub fn run_newton(cfg: &RunConfig, opts: &NewtonOptions) -> Result<Vec<NewtonRecord>> {
    let (density_label, density) = density_function(cfg, opts)?;
    let (kernel_label, kernel) = match cfg.kernel {
        KernelKind::Newton => ("newton".to_string(), KernelFunction::Newton),
        KernelKind::Yukawa => (format!("yukawa:{}", cfg.kappa), KernelFunction::Yukawa { kappa: cfg.kappa }),
    };
    let exact = closed_form(cfg, opts);
    let mut records = Vec::new();
    let mut last = None;
    for &n in &cfg.n {
        for &eps in &cfg.eps {
            let grid = GridSpec::new(cfg.half_width, n)?;
            let cross = CrossConfig {
                max_rank: cfg.max_rank,
                seed: cfg.seed,
                ..CrossConfig::with_tolerance(eps)
            };
            let clock = Instant::now();
            let rep = potential_report(&kernel, &density, &grid, eps, &cross, cfg.circulant.into())?;
            let total_seconds = clock.elapsed().as_secs_f64();
            let max_error = match &exact {
                Some(v) if n <= MAX_CHECKED_N => Some(max_target_error(&rep.potential, &grid, v)?),
                _ => None,
            };
            let rank_product = rep
                .density_ranks
                .iter()
                .zip(&rep.kernel_ranks)
                .map(|(a, b)| a * b)
                .max()
                .unwrap_or(1);
            records.push(NewtonRecord {
                density: density_label.clone(),
                kernel: kernel_label.clone(),
                n,
                half_width: cfg.half_width,
                eps,
                circulant: cfg.circulant.label(),
                density_ranks: ranks_label(&rep.density_ranks),
                kernel_ranks: ranks_label(&rep.kernel_ranks),
                product_ranks: ranks_label(&rep.conv.product_ranks),
                result_ranks: ranks_label(&rep.potential.ranks()),
                rank_product,
                evaluations: rep.conv.cross.evaluations,
                sweeps: rep.conv.cross.sweeps,
                validation_error: rep.conv.cross.validation_error,
                max_error,
                conv_seconds: rep.conv.timings.total(),
                total_seconds,
            });
            last = Some(rep.potential);
        }
    }
    if let (Some(path), Some(t)) = (&opts.save_tt, &last) {
        tt_write(t, path)?;
    }
    Ok(records)
}
