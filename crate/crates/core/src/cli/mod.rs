//! The `crossconv` command line.
//!
//! Exit codes: 0 success, 1 usage, 2 numerical failure (including failed
//! verify cases), 3 I/O or file format.

pub mod bench;
pub mod config;
pub mod hf;
pub mod newton;
pub mod report;
pub mod verify;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::conv::Fault;
use crate::error::{Error, Result};
use config::{load_config_file, threads_from_env, CommonArgs, Defaults, RunConfig, DEFAULT_MEMORY_CAP};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "crossconv", version, about = "Low-rank convolution in the tensor-train format")]
pub struct Cli {
    /// TOML file with defaults for the common flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FaultArg {
    SkipRealPart,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compare cross-conv with direct summation on random operands.
    Verify {
        #[arg(long, value_enum)]
        inject_fault: Option<FaultArg>,
        /// Largest dense footprint in bytes.
        #[arg(long, default_value_t = DEFAULT_MEMORY_CAP)]
        memory_cap: u64,
    },
    /// Potential of a Slater or Gaussian density.
    Newton {
        /// Orbital in TTv1 format whose square replaces the model density.
        #[arg(long)]
        density_tt: Option<PathBuf>,
        /// Write the potential of the last run in TTv1 format.
        #[arg(long)]
        save_tt: Option<PathBuf>,
    },
    /// Stage timings on grids 2^7 .. 2^max_exp.
    Bench {
        #[arg(long, default_value_t = 10)]
        max_exp: u32,
        /// Each stage reports its fastest repeat.
        #[arg(long, default_value_t = 1)]
        repeats: usize,
    },
    /// Hartree-Fock ground state of helium or hydrogen.
    Hf {
        #[arg(long, value_enum, default_value_t = hf::System::Helium)]
        system: hf::System,
        /// Drop the electron-electron term.
        #[arg(long)]
        no_hartree: bool,
        #[arg(long)]
        max_iter: Option<usize>,
        #[arg(long)]
        energy_tol: Option<f64>,
        /// Starting orbital in TTv1 format.
        #[arg(long)]
        init_tt: Option<PathBuf>,
        /// Write the final orbital of the last run in TTv1 format.
        #[arg(long)]
        save_tt: Option<PathBuf>,
        /// Per-iteration log, in the report format.
        #[arg(long)]
        log: Option<PathBuf>,
    },
}

/// Exit code of an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) | Error::Format { .. } => EXIT_IO,
        Error::InvalidArgument(_) | Error::MemoryCap { .. } => EXIT_USAGE,
        _ if e.is_numerical() => EXIT_NUMERICAL,
        _ => EXIT_USAGE,
    }
}

fn defaults(command: &Command) -> Defaults {
    match command {
        Command::Verify { .. } => Defaults {
            n: vec![8, 16],
            d: vec![1, 2, 3],
            half_width: 10.0,
            eps: vec![1e-4, 1e-8],
        },
        Command::Newton { .. } | Command::Bench { .. } => Defaults {
            n: vec![256],
            d: vec![3],
            half_width: 10.0,
            eps: vec![1e-5],
        },
        Command::Hf { .. } => Defaults {
            n: vec![256],
            d: vec![3],
            half_width: 10.0,
            eps: vec![1e-6],
        },
    }
}

/// Runs a parsed command and returns its exit code.
pub fn run(cli: Cli) -> Result<i32> {
    let file = match &cli.config {
        Some(p) => load_config_file(p)?,
        None => CommonArgs::default(),
    };
    let cfg = RunConfig::resolve(cli.common.or(file), defaults(&cli.command))?;
    if let Some(t) = threads_from_env()? {
        // Fails only when a pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let out = cfg.out.as_deref();
    match cli.command {
        Command::Verify {
            inject_fault,
            memory_cap,
        } => {
            let opts = verify::VerifyOptions {
                fault: inject_fault.map(|FaultArg::SkipRealPart| Fault::SkipRealPart),
                memory_cap,
            };
            let records = verify::run_verify(&cfg, &opts)?;
            report::emit(&records, cfg.format, out)?;
            let failed = records.iter().filter(|r| !r.pass).count();
            if failed > 0 {
                eprintln!("verify: {failed} of {} cases exceed {}*eps", records.len(), verify::PASS_FACTOR);
                return Ok(EXIT_NUMERICAL);
            }
        }
        Command::Newton { density_tt, save_tt } => {
            let records = newton::run_newton(&cfg, &newton::NewtonOptions { density_tt, save_tt })?;
            report::emit(&records, cfg.format, out)?;
        }
        Command::Bench { max_exp, repeats } => {
            let records = bench::run_bench(&cfg, &bench::BenchOptions { max_exp, repeats })?;
            report::emit(&records, cfg.format, out)?;
        }
        Command::Hf {
            system,
            no_hartree,
            max_iter,
            energy_tol,
            init_tt,
            save_tt,
            log,
        } => {
            let opts = hf::HfRunOptions {
                system,
                hartree: !no_hartree,
                max_iter,
                energy_tol,
                init_tt,
                save_tt,
            };
            let (rows, iterations) = hf::run_hf(&cfg, &opts)?;
            if let Some(path) = &log {
                report::emit(&iterations, cfg.format, Some(path))?;
            }
            report::emit(&rows, cfg.format, out)?;
        }
    }
    Ok(EXIT_OK)
}

/// Entry point of the binary: parses `std::env::args` and returns the exit
/// code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_by_kind() {
        assert_eq!(exit_code(&Error::InvalidArgument("x".into())), EXIT_USAGE);
        assert_eq!(exit_code(&Error::MemoryCap { required: 2, cap: 1 }), EXIT_USAGE);
        assert_eq!(exit_code(&Error::Divergence("x".into())), EXIT_NUMERICAL);
        assert_eq!(
            exit_code(&Error::Format {
                offset: 0,
                message: "x".into()
            }),
            EXIT_IO
        );
    }

    #[test]
    fn flags_parse() {
        let cli = Cli::try_parse_from(["crossconv", "verify", "--n", "8,16", "--eps", "1e-4", "--circulant-size", "2n"]).unwrap();
        assert_eq!(cli.common.n, Some(vec![8, 16]));
        assert!(matches!(cli.command, Command::Verify { .. }));
        assert!(Cli::try_parse_from(["crossconv", "hf", "--system", "lithium"]).is_err());
        let cli = Cli::try_parse_from(["crossconv", "newton", "--L", "8", "--density", "gaussian"]).unwrap();
        assert_eq!(cli.common.half_width, Some(8.0));
    }
}
