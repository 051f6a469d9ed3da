//! Cross-conv against the direct-summation oracle over a parameter grid.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::RunConfig;
use super::report::ranks_label;
use crate::conv::{cross_conv, ConvOperands, Fault};
use crate::dense::{dense_convolve_naive, KernelTable};
use crate::error::{Error, Result};
use crate::tt::TTTensor;

/// A case passes when its relative error is at most this multiple of eps.
pub const PASS_FACTOR: f64 = 3.0;

/// Largest TT-rank of the random operands.
pub const OPERAND_RANK: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyRecord {
    pub case: usize,
    pub d: usize,
    pub n: usize,
    pub eps: f64,
    pub field: &'static str,
    pub circulant: &'static str,
    pub f_ranks: String,
    pub kernel_ranks: String,
    pub result_ranks: String,
    pub rel_error: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub fault: Option<Fault>,
    pub memory_cap: u64,
}

/// Bytes held by the dense oracle for one case: operand, kernel table and
/// result, complex entries.
pub fn dense_footprint(d: usize, n: usize) -> u64 {
    let nd = (n as f64).powi(d as i32);
    let md = ((2 * n - 1) as f64).powi(d as i32);
    let bytes = 16.0 * (2.0 * nd + md);
    if bytes >= u64::MAX as f64 {
        u64::MAX
    } else {
        bytes as u64
    }
}

fn random_ranks(rng: &mut ChaCha8Rng, d: usize) -> Vec<usize> {
    (1..d).map(|_| rng.gen_range(1..=OPERAND_RANK)).collect()
}

pub fn run_verify(cfg: &RunConfig, opts: &VerifyOptions) -> Result<Vec<VerifyRecord>> {
    cfg.validate_verify()?;
    for &d in &cfg.d {
        for &n in &cfg.n {
            let required = dense_footprint(d, n);
            if required > opts.memory_cap {
                return Err(Error::MemoryCap {
                    required,
                    cap: opts.memory_cap,
                });
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut records = Vec::new();
    for &d in &cfg.d {
        for &n in &cfg.n {
            for &eps in &cfg.eps {
                for complex in [false, true] {
                    let f_ranks = random_ranks(&mut rng, d);
                    let g_ranks = random_ranks(&mut rng, d);
                    let f = TTTensor::random(&vec![n; d], &f_ranks, complex, &mut rng)?;
                    let g = TTTensor::random(&vec![2 * n - 1; d], &g_ranks, complex, &mut rng)?;
                    let mut ops = ConvOperands::new(f.clone(), g.clone(), eps);
                    ops.cross.max_rank = cfg.max_rank;
                    ops.cross.seed = cfg.seed;
                    ops.circulant = cfg.circulant.into();
                    ops.fault = opts.fault;
                    let reference = dense_convolve_naive(&f.to_dense()?, &KernelTable::new(n, g.to_dense()?)?)?;
                    let (result_ranks, rel_error) = match cross_conv(&ops) {
                        Ok(w) => (ranks_label(&w.ranks()), w.to_dense()?.relative_error(&reference)?),
                        Err(Error::ToleranceNotReached { ranks, .. }) => (ranks_label(&ranks), f64::INFINITY),
                        Err(e) => return Err(e),
                    };
                    records.push(VerifyRecord {
                        case: records.len(),
                        d,
                        n,
                        eps,
                        field: if complex { "complex" } else { "real" },
                        circulant: cfg.circulant.label(),
                        f_ranks: ranks_label(&f.ranks()),
                        kernel_ranks: ranks_label(&g.ranks()),
                        result_ranks,
                        rel_error,
                        pass: rel_error <= PASS_FACTOR * eps,
                    });
                }
            }
        }
    }
    Ok(records)
}
