//! Closed-shell two-electron Hartree-Fock by integral iterations.
//!
//! The orbital lives on the cell centres of a three-dimensional grid. Each
//! iteration applies the Yukawa Green's function of `-Delta - 2E` to `V psi`
//! by TT convolution and updates the energy from the new orbital.
//!
//! Convolutions here use the unshifted kernel table with a cell-integrated
//! centre entry, so potentials and orbitals share one grid.

use std::f64::consts::PI;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use serde::Serialize;

use crate::conv::{cross_conv, cross_conv_report, ConvOperands};
use crate::cross::{hadamard_evaluator, tt_cross_seeded, tt_cross_with_stats, BlackBox, CrossConfig, CrossStats};
use crate::dense::MultiIndex;
use crate::error::{Error, Result};
use crate::kernels::{
    cell_average_coulomb, corrected_kernel_blackbox, sample_function_tt_with, DensityFunction, GridBlackBox, GridSpec,
    KernelFunction,
};
use crate::tt::TTTensor;
use crate::C64;

/// Hartree-Fock limit of the helium ground state, in Hartree.
pub const HELIUM_HF_LIMIT: f64 = -2.861_679;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Nucleus {
    pub charge: f64,
    /// Bohr, relative to the box centre.
    pub position: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NucleiSpec {
    nuclei: Vec<Nucleus>,
}

impl NucleiSpec {
    pub fn new(nuclei: Vec<Nucleus>) -> Result<Self> {
        if nuclei.is_empty() {
            return Err(Error::invalid("need at least one nucleus"));
        }
        for n in &nuclei {
            if !(n.charge > 0.0 && n.charge.is_finite()) {
                return Err(Error::invalid(format!("nuclear charge must be positive, got {}", n.charge)));
            }
            if n.position.iter().any(|x| !x.is_finite()) {
                return Err(Error::invalid("nuclear position must be finite"));
            }
        }
        Ok(Self { nuclei })
    }

    pub fn helium() -> Self {
        Self::atom(2.0)
    }

    pub fn hydrogen() -> Self {
        Self::atom(1.0)
    }

    pub fn atom(charge: f64) -> Self {
        Self {
            nuclei: vec![Nucleus {
                charge,
                position: [0.0; 3],
            }],
        }
    }

    /// Two protons on the first axis, `bond` bohr apart.
    pub fn hydrogen_molecule(bond: f64) -> Self {
        let p = |x| Nucleus {
            charge: 1.0,
            position: [x, 0.0, 0.0],
        };
        Self {
            nuclei: vec![p(-0.5 * bond), p(0.5 * bond)],
        }
    }

    pub fn nuclei(&self) -> &[Nucleus] {
        &self.nuclei
    }

    pub fn barycenter(&self) -> [f64; 3] {
        let q: f64 = self.nuclei.iter().map(|n| n.charge).sum();
        let mut c = [0.0; 3];
        for n in &self.nuclei {
            for k in 0..3 {
                c[k] += n.charge * n.position[k] / q;
            }
        }
        c
    }

    fn check_inside(&self, grid: &GridSpec) -> Result<()> {
        for n in &self.nuclei {
            if n.position.iter().any(|x| x.abs() >= grid.half_width()) {
                return Err(Error::invalid(format!(
                    "nucleus at {:?} lies outside the box of half width {}",
                    n.position,
                    grid.half_width()
                )));
            }
        }
        Ok(())
    }
}

/// Orbital, orbital energy and iteration count.
#[derive(Debug, Clone)]
pub struct HFState {
    /// Unit norm in the grid inner product `h^3 sum |psi|^2`.
    pub psi: TTTensor,
    pub energy: f64,
    pub grid: GridSpec,
    pub iteration: usize,
}

impl HFState {
    pub fn l2_norm(&self) -> f64 {
        self.psi.norm() * self.grid.h().powf(1.5)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HfOptions {
    pub eps: f64,
    pub max_iter: usize,
    pub energy_tol: f64,
    /// Include the electron-electron term. Off for one-electron checks.
    pub hartree: bool,
    pub initial_energy: f64,
    /// Exponent of the Gaussian start `exp(-a |x - c|^2)`.
    pub initial_exponent: f64,
    pub cross: CrossConfig,
}

impl Default for HfOptions {
    fn default() -> Self {
        Self {
            eps: 1e-6,
            max_iter: 60,
            energy_tol: 1e-6,
            hartree: true,
            initial_energy: -1.0,
            initial_exponent: 1.0,
            cross: CrossConfig::default(),
        }
    }
}

impl HfOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::invalid(format!("eps must lie in (0, 1), got {}", self.eps)));
        }
        if !(self.energy_tol > 0.0) || self.max_iter == 0 {
            return Err(Error::invalid("energy tolerance and iteration limit must be positive"));
        }
        if !(self.initial_energy < 0.0) {
            return Err(Error::invalid("initial energy must be negative"));
        }
        if !(self.initial_exponent > 0.0) {
            return Err(Error::invalid("initial exponent must be positive"));
        }
        Ok(())
    }

    fn cross_at(&self, tol: f64) -> CrossConfig {
        CrossConfig {
            tolerance: tol,
            ..self.cross.clone()
        }
    }
}

/// Fixed parts of a Hartree-Fock problem: nuclear potential and Newton
/// kernel on the grid.
pub struct HfProblem {
    pub nuclei: NucleiSpec,
    pub grid: GridSpec,
    pub options: HfOptions,
    nuclear: TTTensor,
    newton: Option<TTTensor>,
    pivots: Mutex<HashMap<Stage, Vec<Vec<MultiIndex>>>>,
}

/// Cross steps of an iteration whose pivots carry over to the next one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Stage {
    Density,
    Hartree,
    Yukawa,
    Convolution,
    Product,
    NewProduct,
}

impl HfProblem {
    pub fn new(nuclei: NucleiSpec, grid: GridSpec, options: HfOptions) -> Result<Self> {
        options.validate()?;
        nuclei.check_inside(&grid)?;
        let grid = grid.with_shift(false);
        let nuclear = nuclear_potential(&nuclei, &grid, &options.cross_at(options.eps))?;
        let newton = if options.hartree {
            Some(kernel_tt(&KernelFunction::Newton, &grid, &options.cross_at(options.eps))?)
        } else {
            None
        };
        Ok(Self {
            nuclei,
            grid,
            options,
            nuclear,
            newton,
            pivots: Mutex::new(HashMap::new()),
        })
    }

    pub fn nuclear_potential(&self) -> &TTTensor {
        &self.nuclear
    }

    /// Normalized Gaussian centred at the charge barycentre.
    pub fn initial_state(&self) -> Result<HFState> {
        let c = self.nuclei.barycenter();
        let a = self.options.initial_exponent;
        let y = self.grid.source_points();
        let factors: Vec<Vec<C64>> =
            (0..3).map(|k| y.iter().map(|v| C64::new((-a * (v - c[k]).powi(2)).exp(), 0.0)).collect()).collect();
        let psi = TTTensor::rank_one(&factors)?;
        Ok(HFState {
            psi: normalize(&psi, &self.grid)?,
            energy: self.options.initial_energy,
            grid: self.grid,
            iteration: 0,
        })
    }

    /// Starting state from a given orbital on this grid, normalized.
    pub fn state_from(&self, psi: TTTensor) -> Result<HFState> {
        let n = self.grid.n();
        if psi.mode_sizes() != vec![n; 3] {
            return Err(Error::invalid(format!(
                "orbital of shape {:?} does not live on a {n}^3 grid",
                psi.mode_sizes()
            )));
        }
        let psi = if psi.is_real() { psi } else { psi.real_part() };
        Ok(HFState {
            psi: normalize(&psi, &self.grid)?,
            energy: self.options.initial_energy,
            grid: self.grid,
            iteration: 0,
        })
    }

    /// Runs a cross step, restarting from the pivots this stage used last
    /// time.
    fn cross(&self, stage: Stage, bb: &dyn BlackBox, warm: Option<usize>) -> Result<(TTTensor, CrossStats)> {
        let seed = self.pivots.lock().expect("pivot cache").get(&stage).cloned();
        let out = tt_cross_seeded(bb, &self.options.cross_at(self.options.eps), warm, seed.as_deref())?;
        self.pivots.lock().expect("pivot cache").insert(stage, out.1.suffix_sets.clone());
        Ok(out)
    }

    fn convolve(&self, stage: Stage, f: TTTensor, kernel: TTTensor) -> Result<TTTensor> {
        let mut ops = ConvOperands::new(f, kernel, self.options.eps);
        ops.cross = self.options.cross_at(self.options.eps);
        ops.seed = self.pivots.lock().expect("pivot cache").get(&stage).cloned();
        let report = cross_conv_report(&ops)?;
        self.pivots.lock().expect("pivot cache").insert(stage, report.cross.suffix_sets);
        Ok(report.result)
    }

    fn product(&self, stage: Stage, a: &TTTensor, b: &TTTensor) -> Result<TTTensor> {
        let bb = hadamard_evaluator(a, b)?;
        let (t, _) = self.cross(stage, &bb, Some(a.max_rank().max(b.max_rank())))?;
        t.round(self.options.eps)
    }

    fn density(&self, psi: &TTTensor) -> Result<TTTensor> {
        self.product(Stage::Density, psi, psi)
    }

    fn hartree_from_density(&self, rho: &TTTensor) -> Result<TTTensor> {
        match &self.newton {
            Some(k) if rho.norm() > 0.0 => self.convolve(Stage::Hartree, rho.clone(), k.clone()),
            _ => TTTensor::zeros(&rho.mode_sizes()),
        }
    }

    /// `V_H = int |psi(y)|^2 / |x - y| dy` on the orbital grid.
    pub fn hartree_potential(&self, psi: &TTTensor) -> Result<TTTensor> {
        if self.newton.is_none() {
            return TTTensor::zeros(&psi.mode_sizes());
        }
        self.hartree_from_density(&self.density(psi)?)
    }

    /// Nuclear plus Hartree potential.
    pub fn total_potential(&self, psi: &TTTensor) -> Result<TTTensor> {
        if self.newton.is_none() {
            return Ok(self.nuclear.clone());
        }
        let vh = self.hartree_potential(psi)?;
        self.nuclear.add(&vh)?.round(0.1 * self.options.eps)
    }

    /// `h^3 <|psi|^2, V_H>`.
    pub fn coulomb_energy(&self, psi: &TTTensor) -> Result<f64> {
        let rho = self.density(psi)?;
        let vh = self.hartree_from_density(&rho)?;
        Ok(rho.dot(&vh)?.re * self.grid.h().powi(3))
    }
}

fn kernel_tt(k: &KernelFunction, grid: &GridSpec, cfg: &CrossConfig) -> Result<TTTensor> {
    let bb = corrected_kernel_blackbox(k, grid)?;
    tt_cross_with_stats(&bb, cfg, None).map(|(t, _)| t)
}

fn normalize(psi: &TTTensor, grid: &GridSpec) -> Result<TTTensor> {
    let norm = psi.norm() * grid.h().powf(1.5);
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::Divergence(format!("orbital norm is {norm}")));
    }
    Ok(psi.scale(C64::new(1.0 / norm, 0.0)))
}

/// `-sum Z / |x - R|` on the cell centres, averaged over each cell near a
/// nucleus.
pub fn nuclear_potential(nuclei: &NucleiSpec, grid: &GridSpec, cfg: &CrossConfig) -> Result<TTTensor> {
    let h = grid.h();
    let nuclei = nuclei.nuclei().to_vec();
    let bb = GridBlackBox::new(vec![grid.source_points(); 3], move |x: &[f64]| {
        -nuclei
            .iter()
            .map(|n| n.charge * cell_average_coulomb([x[0], x[1], x[2]], n.position, h))
            .sum::<f64>()
    })?;
    tt_cross_with_stats(&bb, cfg, None).map(|(t, _)| t)
}

/// Hartree potential of `psi` on the same grid.
pub fn hartree_potential(psi: &TTTensor, grid: &GridSpec, eps: f64) -> Result<TTTensor> {
    let grid = grid.with_shift(false);
    let opts = HfOptions {
        eps,
        ..HfOptions::default()
    };
    let cfg = opts.cross_at(eps);
    let rho = sample_function_tt_with(&DensityFunction::Orbital(Arc::new(psi.clone())), &grid, 3, &cfg)?;
    if rho.norm() == 0.0 {
        return TTTensor::zeros(&psi.mode_sizes());
    }
    let newton = kernel_tt(&KernelFunction::Newton, &grid, &cfg)?;
    let mut ops = ConvOperands::new(rho, newton, eps);
    ops.cross = cfg;
    cross_conv(&ops)
}

/// Intermediate tensors of one iteration.
pub struct StepOutput {
    pub state: HFState,
    pub potential: TTTensor,
    pub v_psi: TTTensor,
    /// Unnormalized new orbital.
    pub psi_hat: TTTensor,
    pub v_psi_hat: TTTensor,
}

/// One integral iteration with all intermediates.
pub fn hf_step(state: &HFState, problem: &HfProblem) -> Result<StepOutput> {
    if !(state.energy < 0.0) {
        return Err(Error::Divergence(format!("energy {} is not negative", state.energy)));
    }
    let potential = problem.total_potential(&state.psi)?;
    let v_psi = problem.product(Stage::Product, &potential, &state.psi)?;

    let kappa = (-2.0 * state.energy).sqrt();
    let kernel = corrected_kernel_blackbox(&KernelFunction::Yukawa { kappa }, &problem.grid)?;
    let (yukawa, _) = problem.cross(Stage::Yukawa, &kernel, None)?;
    let psi_hat = problem
        .convolve(Stage::Convolution, v_psi.clone(), yukawa)?
        .scale(C64::new(-2.0 / (4.0 * PI), 0.0));

    let v_psi_hat = problem.product(Stage::NewProduct, &potential, &psi_hat)?;
    let energy = energy_update(state.energy, &psi_hat, &v_psi, &v_psi_hat)?;
    if !(energy < 0.0) {
        return Err(Error::Divergence(format!("energy update gave {energy}")));
    }
    let psi = normalize(&psi_hat, &problem.grid)?;
    Ok(StepOutput {
        state: HFState {
            psi,
            energy,
            grid: problem.grid,
            iteration: state.iteration + 1,
        },
        potential,
        v_psi,
        psi_hat,
        v_psi_hat,
    })
}

/// `E + (psi_hat, V psi_hat - V psi) / |psi_hat|^2`.
pub fn energy_update(energy: f64, psi_hat: &TTTensor, v_psi: &TTTensor, v_psi_hat: &TTTensor) -> Result<f64> {
    let nn = psi_hat.dot(psi_hat)?.re;
    if nn == 0.0 {
        return Err(Error::Divergence("new orbital vanished".into()));
    }
    let num = psi_hat.dot(v_psi_hat)? - psi_hat.dot(v_psi)?;
    Ok(energy + num.re / nn)
}

pub fn hf_iterate(state: &HFState, problem: &HfProblem) -> Result<HFState> {
    hf_step(state, problem).map(|s| s.state)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub energy: f64,
    pub delta: f64,
    pub ranks: Vec<usize>,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct HfSolution {
    pub state: HFState,
    pub converged: bool,
    pub log: Vec<IterationRecord>,
    /// `h^3 <rho, V_H>`; zero without the Hartree term.
    pub coulomb_energy: f64,
    /// `2 E - J` with the Hartree term, the orbital energy without it.
    pub total_energy: f64,
}

pub fn hf_solve(nuclei: NucleiSpec, grid: GridSpec, options: HfOptions) -> Result<HfSolution> {
    let problem = HfProblem::new(nuclei, grid, options)?;
    let start = problem.initial_state()?;
    hf_solve_from(&problem, start)
}

/// Iterates until the energy changes by less than the tolerance or the
/// iteration limit is reached.
pub fn hf_solve_from(problem: &HfProblem, start: HFState) -> Result<HfSolution> {
    let opts = &problem.options;
    let mut state = start;
    let mut log = Vec::new();
    let mut converged = false;
    for _ in 0..opts.max_iter {
        let t0 = Instant::now();
        let next = hf_iterate(&state, problem)?;
        let delta = (next.energy - state.energy).abs();
        log.push(IterationRecord {
            iteration: next.iteration,
            energy: next.energy,
            delta,
            ranks: next.psi.ranks(),
            seconds: t0.elapsed().as_secs_f64(),
        });
        state = next;
        if delta < opts.energy_tol {
            converged = true;
            break;
        }
    }
    let (coulomb_energy, total_energy) = if opts.hartree {
        let j = problem.coulomb_energy(&state.psi)?;
        (j, 2.0 * state.energy - j)
    } else {
        (0.0, state.energy)
    };
    Ok(HfSolution {
        state,
        converged,
        log,
        coulomb_energy,
        total_energy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::DenseTensor;
    use crate::kernels::gaussian_newton_potential;

    fn dense_dot(a: &DenseTensor, b: &DenseTensor) -> f64 {
        a.data().iter().zip(b.data()).map(|(x, y)| (x.conj() * y).re).sum()
    }

    #[test]
    fn nuclei_validation() {
        assert!(NucleiSpec::new(vec![]).is_err());
        assert!(NucleiSpec::new(vec![Nucleus {
            charge: -1.0,
            position: [0.0; 3]
        }])
        .is_err());
        let h2 = NucleiSpec::hydrogen_molecule(1.4);
        assert_eq!(h2.barycenter(), [0.0; 3]);
        let grid = GridSpec::new(0.5, 8).unwrap();
        assert!(HfProblem::new(h2, grid, HfOptions::default()).is_err());
    }

    #[test]
    fn hartree_of_zero_orbital() {
        let grid = GridSpec::new(4.0, 8).unwrap();
        let v = hartree_potential(&TTTensor::zeros(&[8, 8, 8]).unwrap(), &grid, 1e-6).unwrap();
        assert_eq!(v.norm(), 0.0);
    }

    #[test]
    fn hartree_of_gaussian_orbital() {
        // psi^2 = c exp(-|x|^2) with unit mass gives V = c pi^{3/2} erf(r)/r.
        let grid = GridSpec::new(6.0, 48).unwrap().with_shift(false);
        let y = grid.source_points();
        let f: Vec<C64> = y.iter().map(|v| C64::new((-0.5 * v * v).exp(), 0.0)).collect();
        let psi = normalize(&TTTensor::rank_one(&[f.clone(), f.clone(), f]).unwrap(), &grid).unwrap();
        let h3 = grid.h().powi(3);
        let rho = psi.hadamard_exact(&psi).unwrap();
        let mass = rho.to_dense().unwrap().data().iter().map(|x| x.re).sum::<f64>() * h3;
        assert!((mass - 1.0).abs() < 1e-8);
        let c = psi.element(&[0, 0, 0]).unwrap().re.powi(2) / (-(3.0 * y[0] * y[0])).exp();
        let v = hartree_potential(&psi, &grid, 1e-8).unwrap();
        for idx in [[24, 24, 24], [30, 20, 24], [40, 24, 10]] {
            let r = (idx.iter().map(|&i| y[i] * y[i]).sum::<f64>()).sqrt();
            let exact = c * gaussian_newton_potential(1.0, r);
            let got = v.element(&idx).unwrap().re;
            assert!((got - exact).abs() < 1e-2 * exact, "{idx:?}: {got} vs {exact}");
        }
    }

    #[test]
    fn nuclear_potential_is_negative_and_symmetric() {
        let grid = GridSpec::new(5.0, 16).unwrap();
        let v = nuclear_potential(&NucleiSpec::helium(), &grid, &CrossConfig::with_tolerance(1e-8)).unwrap();
        let a = v.element(&[7, 7, 7]).unwrap().re;
        let b = v.element(&[8, 8, 8]).unwrap().re;
        assert!(a < 0.0);
        assert!((a - b).abs() < 1e-6 * a.abs());
        let far = v.element(&[0, 8, 8]).unwrap().re;
        let r = (grid.source_point(0).powi(2) + 2.0 * grid.source_point(8).powi(2)).sqrt();
        assert!((far + 2.0 / r).abs() < 1e-6);
    }

    #[test]
    fn energy_update_matches_dense_formula() {
        let grid = GridSpec::new(6.0, 12).unwrap();
        let opts = HfOptions {
            eps: 1e-10,
            ..HfOptions::default()
        };
        let problem = HfProblem::new(NucleiSpec::helium(), grid, opts).unwrap();
        let state = problem.initial_state().unwrap();
        let step = hf_step(&state, &problem).unwrap();
        let ph = step.psi_hat.to_dense().unwrap();
        let vph = step.v_psi_hat.to_dense().unwrap();
        let vp = step.v_psi.to_dense().unwrap();
        let expect = state.energy + (dense_dot(&ph, &vph) - dense_dot(&ph, &vp)) / dense_dot(&ph, &ph);
        assert!((step.state.energy - expect).abs() < 1e-10);
        // V psi is the elementwise product to the working accuracy
        let exact = step.potential.to_dense().unwrap().hadamard(&state.psi.to_dense().unwrap()).unwrap();
        assert!(vp.relative_error(&exact).unwrap() < 1e-8);
        assert!((step.state.l2_norm() - 1.0).abs() < 1e-10);
    }

    /// `(-Delta_h + k^2) u = f` with zero boundary values, by conjugate
    /// gradients on the seven-point stencil.
    fn dirichlet_solve(f: &[f64], n: usize, h: f64, k2: f64) -> Vec<f64> {
        let at = |i: usize, j: usize, l: usize| (i * n + j) * n + l;
        let apply = |u: &[f64]| {
            let mut out = vec![0.0; u.len()];
            for i in 0..n {
                for j in 0..n {
                    for l in 0..n {
                        let mut s = (6.0 / (h * h) + k2) * u[at(i, j, l)];
                        let mut nb = |a: Option<usize>, b: Option<usize>, c: Option<usize>| {
                            if let (Some(a), Some(b), Some(c)) = (a, b, c) {
                                if a < n && b < n && c < n {
                                    s -= u[at(a, b, c)] / (h * h);
                                }
                            }
                        };
                        nb(i.checked_sub(1), Some(j), Some(l));
                        nb(Some(i + 1), Some(j), Some(l));
                        nb(Some(i), j.checked_sub(1), Some(l));
                        nb(Some(i), Some(j + 1), Some(l));
                        nb(Some(i), Some(j), l.checked_sub(1));
                        nb(Some(i), Some(j), Some(l + 1));
                        out[at(i, j, l)] = s;
                    }
                }
            }
            out
        };
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let mut u = vec![0.0; f.len()];
        let mut r = f.to_vec();
        let mut p = r.clone();
        let mut rr = dot(&r, &r);
        for _ in 0..2000 {
            let ap = apply(&p);
            let alpha = rr / dot(&p, &ap);
            for i in 0..u.len() {
                u[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            let next = dot(&r, &r);
            if next.sqrt() < 1e-12 * dot(f, f).sqrt() {
                break;
            }
            for i in 0..p.len() {
                p[i] = r[i] + next / rr * p[i];
            }
            rr = next;
        }
        u
    }

    #[test]
    fn yukawa_convolution_inverts_shifted_laplacian() {
        let n = 24;
        let grid = GridSpec::new(4.0, n).unwrap().with_shift(false);
        let h = grid.h();
        let kappa = 1.2;
        let y = grid.source_points();
        let g: Vec<C64> = y.iter().map(|v| C64::new((-1.5 * v * v).exp(), 0.0)).collect();
        let f = TTTensor::rank_one(&[g.clone(), g.clone(), g]).unwrap();
        let k = kernel_tt(&KernelFunction::Yukawa { kappa }, &grid, &CrossConfig::with_tolerance(1e-8)).unwrap();
        let u = cross_conv(&ConvOperands::new(f.clone(), k, 1e-8))
            .unwrap()
            .scale(C64::new(1.0 / (4.0 * PI), 0.0))
            .to_dense()
            .unwrap();
        let fd: Vec<f64> = f.to_dense().unwrap().data().iter().map(|x| x.re).collect();
        let reference = dirichlet_solve(&fd, n, h, kappa * kappa);
        let reference = DenseTensor::from_real(vec![n; 3], reference).unwrap();
        let err = u.relative_error(&reference).unwrap();
        assert!(err < 0.1, "err {err}");
    }

    fn tight() -> HfOptions {
        HfOptions {
            eps: 1e-9,
            energy_tol: 1e-9,
            ..HfOptions::default()
        }
    }

    // Reference energies on coarse grids come from an independent dense
    // FFT implementation of the same discretization.

    #[test]
    fn hydrogen_on_coarse_grid() {
        let grid = GridSpec::new(8.0, 32).unwrap();
        let opts = HfOptions {
            hartree: false,
            ..tight()
        };
        let sol = hf_solve(NucleiSpec::hydrogen(), grid, opts).unwrap();
        assert!(sol.converged);
        assert!((sol.total_energy + 0.451_042_272_084_778_8).abs() < 1e-6, "E {}", sol.total_energy);
        assert!((sol.state.l2_norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn helium_on_coarse_grid_and_fixed_point() {
        let grid = GridSpec::new(6.0, 32).unwrap();
        let problem = HfProblem::new(NucleiSpec::helium(), grid, tight()).unwrap();
        let sol = hf_solve_from(&problem, problem.initial_state().unwrap()).unwrap();
        assert!(sol.converged);
        assert!((sol.total_energy + 2.441_824_010_076_159).abs() < 1e-6, "E {}", sol.total_energy);
        assert!((sol.state.energy + 0.788_037_948_149_303).abs() < 1e-6);
        let again = hf_iterate(&sol.state, &problem).unwrap();
        assert!((again.energy - sol.state.energy).abs() <= 5e-6);
        let deltas: Vec<f64> = sol.log.iter().map(|r| r.delta).collect();
        // The updates shrink over every three steps, not at every step.
        assert!(deltas[3..].windows(4).all(|w| w[3] < w[0]), "{deltas:?}");
        assert!(deltas[3..].windows(2).any(|w| w[1] > w[0]));
    }

    #[test]
    fn positive_energy_is_divergence() {
        let grid = GridSpec::new(4.0, 8).unwrap();
        let problem = HfProblem::new(NucleiSpec::hydrogen(), grid, HfOptions::default()).unwrap();
        let mut state = problem.initial_state().unwrap();
        state.energy = 0.1;
        assert!(matches!(hf_iterate(&state, &problem), Err(Error::Divergence(_))));
    }
}
