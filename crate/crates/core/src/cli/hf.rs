//! Hartree-Fock runs over a list of grids.

use std::path::PathBuf;
use std::time::Instant;

use clap::ValueEnum;
use serde::Serialize;

use super::config::RunConfig;
use crate::cross::CrossConfig;
use crate::error::Result;
use crate::hf::{hf_solve_from, HfOptions, HfProblem, NucleiSpec, HELIUM_HF_LIMIT};
use crate::kernels::GridSpec;
use crate::tt::io::{tt_read, tt_write};

/// Hydrogen ground state.
pub const HYDROGEN_EXACT: f64 = -0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum System {
    #[default]
    Helium,
    Hydrogen,
}

impl System {
    fn nuclei(self) -> NucleiSpec {
        match self {
            System::Helium => NucleiSpec::helium(),
            System::Hydrogen => NucleiSpec::hydrogen(),
        }
    }

    fn reference(self) -> f64 {
        match self {
            System::Helium => HELIUM_HF_LIMIT,
            System::Hydrogen => HYDROGEN_EXACT,
        }
    }

    fn label(self) -> &'static str {
        match self {
            System::Helium => "helium",
            System::Hydrogen => "hydrogen",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HfRecord {
    pub system: &'static str,
    pub n: usize,
    #[serde(rename = "L")]
    pub half_width: f64,
    pub eps: f64,
    pub hartree: bool,
    pub energy: f64,
    pub reference: f64,
    pub abs_error: f64,
    pub rel_error: f64,
    pub iterations: usize,
    pub converged: bool,
    pub max_rank: usize,
    pub seconds: f64,
}

/// One line of the convergence log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HfLogRecord {
    pub n: usize,
    pub eps: f64,
    pub iteration: usize,
    pub energy: f64,
    pub delta: f64,
    pub ranks: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Default)]
pub struct HfRunOptions {
    pub system: System,
    pub hartree: bool,
    pub max_iter: Option<usize>,
    pub energy_tol: Option<f64>,
    pub init_tt: Option<PathBuf>,
    pub save_tt: Option<PathBuf>,
}

pub fn run_hf(cfg: &RunConfig, opts: &HfRunOptions) -> Result<(Vec<HfRecord>, Vec<HfLogRecord>)> {
    let start_psi = match &opts.init_tt {
        Some(p) => Some(tt_read(p)?),
        None => None,
    };
    let mut rows = Vec::new();
    let mut log = Vec::new();
    let mut last = None;
    for &n in &cfg.n {
        for &eps in &cfg.eps {
            let defaults = HfOptions::default();
            let options = HfOptions {
                eps,
                hartree: opts.hartree,
                max_iter: opts.max_iter.unwrap_or(defaults.max_iter),
                energy_tol: opts.energy_tol.unwrap_or(defaults.energy_tol),
                cross: CrossConfig {
                    max_rank: cfg.max_rank,
                    seed: cfg.seed,
                    ..defaults.cross.clone()
                },
                ..defaults
            };
            let clock = Instant::now();
            let problem = HfProblem::new(opts.system.nuclei(), GridSpec::new(cfg.half_width, n)?, options)?;
            let start = match &start_psi {
                Some(psi) => problem.state_from(psi.clone())?,
                None => problem.initial_state()?,
            };
            let sol = hf_solve_from(&problem, start)?;
            let seconds = clock.elapsed().as_secs_f64();
            let reference = opts.system.reference();
            let energy = sol.total_energy;
            rows.push(HfRecord {
                system: opts.system.label(),
                n,
                half_width: cfg.half_width,
                eps,
                hartree: opts.hartree,
                energy,
                reference,
                abs_error: (energy - reference).abs(),
                rel_error: ((energy - reference) / reference).abs(),
                iterations: sol.log.len(),
                converged: sol.converged,
                max_rank: sol.state.psi.max_rank(),
                seconds,
            });
            log.extend(sol.log.iter().map(|r| HfLogRecord {
                n,
                eps,
                iteration: r.iteration,
                energy: r.energy,
                delta: r.delta,
                ranks: super::report::ranks_label(&r.ranks),
                seconds: r.seconds,
            }));
            last = Some(sol.state.psi);
        }
    }
    if let (Some(path), Some(psi)) = (&opts.save_tt, &last) {
        tt_write(psi, path)?;
    }
    Ok((rows, log))
}
