//! Grids, kernel tables and sampled functions on tensor-product grids.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use ndarray::Array3;

use crate::conv::{cross_conv_report, CirculantSize, ConvOperands, ConvReport};
use crate::cross::{tt_cross_with_stats, BlackBox, CrossConfig, CrossStats};
use crate::dense::{check_index, check_shape, MultiIndex};
use crate::error::{Error, Result};
use crate::tt::TTTensor;
use crate::C64;

/// Values below this are flushed to zero by the kernel evaluators.
pub const UNDERFLOW: f64 = 1e-300;

/// Uniform grid on `[-L, L]^d` with `n` cells per mode.
///
/// Sources sit at cell centres `y_i = -L + (i + 1/2) h`. With the shift flag
/// set, targets sit at `x_j = y_j + h/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    half_width: f64,
    n: usize,
    shift: bool,
}

impl GridSpec {
    /// Shifted grid, the default for singular kernels.
    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::invalid(format!("half width must be positive, got {half_width}")));
        }
        if n < 2 {
            return Err(Error::invalid(format!("need at least 2 points per mode, got {n}")));
        }
        Ok(Self {
            half_width,
            n,
            shift: true,
        })
    }

    pub fn with_shift(self, shift: bool) -> Self {
        Self { shift, ..self }
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn shift(&self) -> bool {
        self.shift
    }

    pub fn h(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn source_point(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 0.5) * self.h()
    }

    pub fn target_point(&self, j: usize) -> f64 {
        if self.shift {
            self.source_point(j) + 0.5 * self.h()
        } else {
            self.source_point(j)
        }
    }

    pub fn source_points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.source_point(i)).collect()
    }

    pub fn target_points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.target_point(j)).collect()
    }

    /// Index of the source point closest to `x`.
    pub fn nearest_source(&self, x: f64) -> usize {
        let t = (x + self.half_width) / self.h() - 0.5;
        (t.round().max(0.0) as usize).min(self.n - 1)
    }
}

/// Radially symmetric kernel `g(|x|)`.
#[derive(Clone)]
pub enum KernelFunction {
    /// `1/r`
    Newton,
    /// `exp(-kappa r)/r`, without the `1/(4 pi)` factor.
    Yukawa { kappa: f64 },
    /// A smooth radial function.
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for KernelFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelFunction::Newton => write!(f, "Newton"),
            KernelFunction::Yukawa { kappa } => write!(f, "Yukawa {{ kappa: {kappa} }}"),
            KernelFunction::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl KernelFunction {
    pub fn custom(g: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        KernelFunction::Custom(Arc::new(g))
    }

    pub fn validate(&self) -> Result<()> {
        if let KernelFunction::Yukawa { kappa } = self {
            if !(*kappa > 0.0 && kappa.is_finite()) {
                return Err(Error::invalid(format!("Yukawa decay must be positive, got {kappa}")));
            }
        }
        Ok(())
    }

    pub fn is_singular(&self) -> bool {
        !matches!(self, KernelFunction::Custom(_))
    }

    pub fn value(&self, r: f64) -> f64 {
        let v = match self {
            KernelFunction::Newton => 1.0 / r,
            KernelFunction::Yukawa { kappa } => (-kappa * r).exp() / r,
            KernelFunction::Custom(g) => g(r),
        };
        if v.abs() < UNDERFLOW {
            0.0
        } else {
            v
        }
    }

    /// Integral of the kernel over the cube of side `h` centred at the origin
    /// (`d = 3`).
    fn self_cell_integral(&self, h: f64) -> f64 {
        let newton = h * h * unit_cube_coulomb_integral();
        match self {
            KernelFunction::Newton => newton,
            // exp(-k r)/r = 1/r - k + k^2 r/2 - k^3 r^2/6 + ...
            KernelFunction::Yukawa { kappa } => {
                let k = *kappa;
                newton - k * h.powi(3) + 0.5 * k * k * h.powi(4) * UNIT_CUBE_MEAN_RADIUS
                    - k.powi(3) / 6.0 * h.powi(5) * 0.25
            }
            KernelFunction::Custom(g) => h.powi(3) * g(0.0),
        }
    }
}

/// Functions sampled on the source grid.
#[derive(Clone)]
pub enum DensityFunction {
    /// `exp(-zeta |y|)`
    Slater { zeta: f64 },
    /// `exp(-alpha |y|^2)`
    Gaussian { alpha: f64 },
    Constant(f64),
    /// `|psi|^2` of an orbital already given on the grid.
    Orbital(Arc<TTTensor>),
    Custom(Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>),
}

impl fmt::Debug for DensityFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DensityFunction::Slater { zeta } => write!(f, "Slater {{ zeta: {zeta} }}"),
            DensityFunction::Gaussian { alpha } => write!(f, "Gaussian {{ alpha: {alpha} }}"),
            DensityFunction::Constant(c) => write!(f, "Constant({c})"),
            DensityFunction::Orbital(t) => write!(f, "Orbital(ranks {:?})", t.ranks()),
            DensityFunction::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl DensityFunction {
    pub fn custom(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        DensityFunction::Custom(Arc::new(f))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DensityFunction::Slater { zeta: p } | DensityFunction::Gaussian { alpha: p } => {
                if !(*p > 0.0 && p.is_finite()) {
                    return Err(Error::invalid(format!("exponent must be positive, got {p}")));
                }
            }
            DensityFunction::Constant(c) if !c.is_finite() => {
                return Err(Error::invalid("constant must be finite"));
            }
            _ => {}
        }
        Ok(())
    }

    /// Value at a point; `None` for orbital densities.
    pub fn value(&self, x: &[f64]) -> Option<f64> {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        match self {
            DensityFunction::Slater { zeta } => Some((-zeta * r2.sqrt()).exp()),
            DensityFunction::Gaussian { alpha } => Some((-alpha * r2).exp()),
            DensityFunction::Constant(c) => Some(*c),
            DensityFunction::Orbital(_) => None,
            DensityFunction::Custom(f) => Some(f(x)),
        }
    }
}

/// Black box `f(c_0[i_0], ..., c_{d-1}[i_{d-1}])` over per-mode coordinates.
pub struct GridBlackBox<F> {
    sizes: Vec<usize>,
    coords: Vec<Vec<f64>>,
    f: F,
}

impl<F> GridBlackBox<F>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    pub fn new(coords: Vec<Vec<f64>>, f: F) -> Result<Self> {
        let sizes: Vec<usize> = coords.iter().map(Vec::len).collect();
        check_shape(&sizes)?;
        Ok(Self { sizes, coords, f })
    }

    fn point(&self, idx: &[usize], x: &mut [f64]) {
        for (k, &i) in idx.iter().enumerate() {
            x[k] = self.coords[k][i];
        }
    }
}

impl<F> BlackBox for GridBlackBox<F>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    fn mode_sizes(&self) -> &[usize] {
        &self.sizes
    }

    fn element(&self, idx: &[usize]) -> Result<C64> {
        check_index(&self.sizes, idx)?;
        let mut x = vec![0.0; idx.len()];
        self.point(idx, &mut x);
        Ok(C64::new((self.f)(&x), 0.0))
    }

    fn block(&self, prefixes: &[MultiIndex], mode: usize, suffixes: &[MultiIndex]) -> Result<Array3<C64>> {
        let n = self.sizes[mode];
        let d = self.sizes.len();
        let mut out = Array3::from_elem((prefixes.len(), n, suffixes.len()), C64::new(0.0, 0.0));
        let mut x = vec![0.0; d];
        for (a, p) in prefixes.iter().enumerate() {
            self.point(p, &mut x[..mode]);
            for (b, s) in suffixes.iter().enumerate() {
                for (k, &i) in s.iter().enumerate() {
                    x[mode + 1 + k] = self.coords[mode + 1 + k][i];
                }
                for i in 0..n {
                    x[mode] = self.coords[mode][i];
                    out[[a, i, b]] = C64::new((self.f)(&x), 0.0);
                }
            }
        }
        Ok(out)
    }
}

fn offsets(n: usize) -> impl Iterator<Item = f64> {
    (0..2 * n - 1).map(move |a| a as f64 - (n as f64 - 1.0))
}

/// Kernel table evaluated on demand: `h^d g(h |m + 1/2|)` at offset `m` in
/// `{-(n-1), ..., n-1}^d` (stored at index `m + n - 1`), so the singular point
/// is never sampled. Without the shift the table is `h^d g(h |m|)`.
pub fn nystrom_kernel_blackbox(
    k: &KernelFunction,
    grid: &GridSpec,
    d: usize,
) -> Result<GridBlackBox<impl Fn(&[f64]) -> f64 + Sync>> {
    k.validate()?;
    if d == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    if !grid.shift() && k.is_singular() {
        return Err(Error::Singularity(format!("{k:?} at zero offset on an unshifted grid")));
    }
    let h = grid.h();
    let s = if grid.shift() { 0.5 } else { 0.0 };
    let coords = vec![offsets(grid.n()).map(|m| h * (m + s)).collect(); d];
    let k = k.clone();
    let w = h.powi(d as i32);
    GridBlackBox::new(coords, move |x: &[f64]| {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        w * k.value(r)
    })
}

/// Unshifted three-dimensional kernel table whose zero-offset entry is the
/// integral of the kernel over one cell instead of a point sample.
pub fn corrected_kernel_blackbox(
    k: &KernelFunction,
    grid: &GridSpec,
) -> Result<GridBlackBox<impl Fn(&[f64]) -> f64 + Sync>> {
    k.validate()?;
    let h = grid.h();
    let coords = vec![offsets(grid.n()).map(|m| h * m).collect(); 3];
    let centre = k.self_cell_integral(h);
    let k = k.clone();
    let w = h.powi(3);
    GridBlackBox::new(coords, move |x: &[f64]| {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r == 0.0 {
            centre
        } else {
            w * k.value(r)
        }
    })
}

/// Cross configuration used by the constructors below.
pub fn cross_config(eps: f64) -> CrossConfig {
    CrossConfig::with_tolerance(eps)
}

/// TT approximation of the shifted Nyström kernel table.
pub fn kernel_tt(k: &KernelFunction, grid: &GridSpec, d: usize, eps: f64) -> Result<TTTensor> {
    kernel_tt_with_stats(k, grid, d, &cross_config(eps)).map(|(t, _)| t)
}

pub fn kernel_tt_with_stats(
    k: &KernelFunction,
    grid: &GridSpec,
    d: usize,
    cfg: &CrossConfig,
) -> Result<(TTTensor, CrossStats)> {
    let bb = nystrom_kernel_blackbox(k, grid, d)?;
    tt_cross_with_stats(&bb, cfg, None)
}

/// TT of `f(y_i)` on the source grid of dimension `d`.
pub fn sample_function_tt(f: &DensityFunction, grid: &GridSpec, d: usize, eps: f64) -> Result<TTTensor> {
    sample_function_tt_with(f, grid, d, &cross_config(eps))
}

pub fn sample_function_tt_with(f: &DensityFunction, grid: &GridSpec, d: usize, cfg: &CrossConfig) -> Result<TTTensor> {
    f.validate()?;
    if d == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    let y = grid.source_points();
    match f {
        DensityFunction::Gaussian { alpha } => {
            let factor: Vec<C64> = y.iter().map(|v| C64::new((-alpha * v * v).exp(), 0.0)).collect();
            TTTensor::rank_one(&vec![factor; d])
        }
        DensityFunction::Constant(c) => {
            let mut factors = vec![vec![C64::new(1.0, 0.0); grid.n()]; d];
            factors[0] = vec![C64::new(*c, 0.0); grid.n()];
            TTTensor::rank_one(&factors)
        }
        DensityFunction::Orbital(psi) => {
            if psi.mode_sizes() != vec![grid.n(); d] {
                return Err(Error::invalid(format!(
                    "orbital of shape {:?} does not live on a {}^{d} grid",
                    psi.mode_sizes(),
                    grid.n()
                )));
            }
            let conj = psi.conj();
            let bb = crate::cross::hadamard_evaluator(&conj, psi)?;
            let (t, _) = tt_cross_with_stats(&bb, cfg, Some(psi.max_rank()))?;
            Ok(t.real_part_if_close())
        }
        _ => {
            let f = f.clone();
            let bb = GridBlackBox::new(vec![y; d], move |x: &[f64]| f.value(x).unwrap_or(0.0))?;
            tt_cross_with_stats(&bb, cfg, None).map(|(t, _)| t)
        }
    }
}

/// Newton potential `V(x) = int f(y) / |x - y| dy` of a density on a
/// three-dimensional shifted grid, returned together with pipeline
/// diagnostics.
pub struct NewtonReport {
    /// Values at the targets `x_j`.
    pub potential: TTTensor,
    pub density_ranks: Vec<usize>,
    pub kernel_ranks: Vec<usize>,
    pub kernel_stats: CrossStats,
    pub conv: ConvReport,
}

pub fn newton_potential(f: &DensityFunction, grid: &GridSpec, eps: f64) -> Result<TTTensor> {
    newton_potential_report(f, grid, eps, &cross_config(eps)).map(|r| r.potential)
}

pub fn newton_potential_report(f: &DensityFunction, grid: &GridSpec, eps: f64, cfg: &CrossConfig) -> Result<NewtonReport> {
    newton_potential_embedded(f, grid, eps, cfg, CirculantSize::Odd)
}

/// [`newton_potential_report`] with a selectable circulant embedding.
pub fn newton_potential_embedded(
    f: &DensityFunction,
    grid: &GridSpec,
    eps: f64,
    cfg: &CrossConfig,
    circulant: CirculantSize,
) -> Result<NewtonReport> {
    potential_report(&KernelFunction::Newton, f, grid, eps, cfg, circulant)
}

/// Convolution of a density with a radial kernel on a three-dimensional
/// shifted grid.
pub fn potential_report(
    k: &KernelFunction,
    f: &DensityFunction,
    grid: &GridSpec,
    eps: f64,
    cfg: &CrossConfig,
    circulant: CirculantSize,
) -> Result<NewtonReport> {
    if !grid.shift() && k.is_singular() {
        return Err(Error::Singularity("singular kernel needs a shifted grid".into()));
    }
    let cfg = CrossConfig {
        tolerance: eps,
        ..cfg.clone()
    };
    let density = sample_function_tt_with(f, grid, 3, &cfg)?;
    let (kernel, kernel_stats) = kernel_tt_with_stats(k, grid, 3, &cfg)?;
    let mut ops = ConvOperands::new(density.clone(), kernel.clone(), eps);
    ops.cross = cfg;
    ops.circulant = circulant;
    let conv = cross_conv_report(&ops)?;
    Ok(NewtonReport {
        potential: conv.result.clone(),
        density_ranks: density.ranks(),
        kernel_ranks: kernel.ranks(),
        kernel_stats,
        conv,
    })
}

/// Newton potential of `exp(-zeta |x|)` at distance `r`.
pub fn slater_newton_potential(zeta: f64, r: f64) -> f64 {
    let c = 4.0 * PI / zeta.powi(3);
    let x = zeta * r;
    if x < 1e-4 {
        // 2 - e^{-x}(x + 2) = x - x^3/6 + x^4/12 - ...
        c * zeta * (1.0 - x * x / 6.0 + x.powi(3) / 12.0)
    } else {
        c * (2.0 - (-x).exp() * (x + 2.0)) / r
    }
}

/// Largest `|t(j) - v(x_j)|` over all target nodes of a three-dimensional
/// grid, computed one slab at a time.
pub fn max_target_error(t: &TTTensor, grid: &GridSpec, v: impl Fn(&[f64; 3]) -> f64) -> Result<f64> {
    let n = grid.n();
    if t.mode_sizes() != vec![n; 3] {
        return Err(Error::invalid(format!("tensor of shape {:?} is not {n}^3", t.mode_sizes())));
    }
    let x = grid.target_points();
    let cores = t.cores();
    let (r1, r2) = (cores[1].left_rank(), cores[1].right_rank());
    let g1 = cores[1].data().view().into_shape_with_order((r1, n * r2)).expect("standard layout core");
    let g2 = cores[2]
        .data()
        .view()
        .into_shape_with_order((r2, n))
        .expect("standard layout core");
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let head = cores[0].slice(i);
        let m = head.dot(&g1).into_shape_with_order((n, r2)).expect("contiguous");
        let slab = m.dot(&g2);
        for ((j, k), val) in slab.indexed_iter() {
            let exact = v(&[x[i], x[j], x[k]]);
            worst = worst.max((val.re - exact).abs().max(val.im.abs()));
        }
    }
    Ok(worst)
}

/// Newton potential of `exp(-alpha |x|^2)` at distance `r`.
pub fn gaussian_newton_potential(alpha: f64, r: f64) -> f64 {
    let c = (PI / alpha).powf(1.5);
    let s = alpha.sqrt();
    if r * s < 1e-8 {
        c * 2.0 * s / PI.sqrt()
    } else {
        c * libm::erf(s * r) / r
    }
}

/// `int 1/|x| dx` over the cube `[x0, x1] x [y0, y1] x [z0, z1]`.
pub fn box_coulomb_integral(x: [f64; 2], y: [f64; 2], z: [f64; 2]) -> f64 {
    let mut s = 0.0;
    for (a, sa) in [(x[1], 1.0), (x[0], -1.0)] {
        for (b, sb) in [(y[1], 1.0), (y[0], -1.0)] {
            for (c, sc) in [(z[1], 1.0), (z[0], -1.0)] {
                s += sa * sb * sc * coulomb_antiderivative(a, b, c);
            }
        }
    }
    s
}

/// A function whose mixed third derivative is `1/|x|`.
fn coulomb_antiderivative(x: f64, y: f64, z: f64) -> f64 {
    let r = (x * x + y * y + z * z).sqrt();
    let term = |a: f64, b: f64, c: f64| {
        let bc = b * c;
        let s = (b * b + c * c).sqrt();
        let t1 = if bc == 0.0 { 0.0 } else { bc * (a / s).asinh() };
        let t2 = if a == 0.0 { 0.0 } else { 0.5 * a * a * (bc / (a * r)).atan() };
        t1 - t2
    };
    term(x, y, z) + term(y, z, x) + term(z, x, y)
}

/// `int 1/|x|` over the unit cube centred at the origin.
pub fn unit_cube_coulomb_integral() -> f64 {
    box_coulomb_integral([-0.5, 0.5], [-0.5, 0.5], [-0.5, 0.5])
}

/// Mean of `|x|` over the unit cube centred at the origin.
const UNIT_CUBE_MEAN_RADIUS: f64 = 0.480_295_978_227_526_5;

/// Mean of `1/|x - c|` over the cube of side `h` centred at `x`. Beyond a few
/// cells the point value is used.
pub fn cell_average_coulomb(x: [f64; 3], c: [f64; 3], h: f64) -> f64 {
    let d = [x[0] - c[0], x[1] - c[1], x[2] - c[2]];
    let far = d.iter().any(|v| v.abs() > 6.5 * h);
    if far {
        return 1.0 / (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    }
    let e = |v: f64| [v - 0.5 * h, v + 0.5 * h];
    box_coulomb_integral(e(d[0]), e(d[1]), e(d[2])) / h.powi(3)
}

impl TTTensor {
    /// Drops imaginary parts when they are zero to rounding.
    pub(crate) fn real_part_if_close(self) -> TTTensor {
        let imag: f64 = self.cores().iter().flat_map(|c| c.data().iter()).map(|x| x.im.abs()).fold(0.0, f64::max);
        let scale: f64 = self.cores().iter().flat_map(|c| c.data().iter()).map(|x| x.norm()).fold(0.0, f64::max);
        if imag <= 1e-14 * scale {
            let cores = self.into_cores().into_iter().map(|c| c.into_data().mapv(|x| C64::new(x.re, 0.0))).collect();
            TTTensor::from_arrays(cores).expect("same shapes")
        } else {
            self
        }
    }
}
