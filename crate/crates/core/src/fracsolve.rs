//! Mild solutions of D^γ u = -A u + f(t, u) on diagonal spectra:
//! u(t) = ∫_{-∞}^t R_γ(t - s) f(s, u(s)) ds, truncated to [t - T, t].
//!
//! Mode k is convolved with r_γ(·; λ_k) by product integration against the
//! piecewise-linear interpolant of f on a uniform grid, so the weak
//! singularity at s = t is integrated exactly. The history runs from
//! s₀ = t₀ - T with f ≡ 0 before s₀, and every convolution is done by FFT.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fixedpoint::{picard_iterate, IterationReport, SolverConfig, DEFAULT_FRACTIONAL_TAIL};
use crate::funcspace::{bsp_norm, GridSignal, Signal, StepanovExponent, Window};
use crate::kernel::{
    log_grid, product_weights, s_gamma_constant, verify_kernel_bounds, FractionalKernelSpec, KernelBounds,
    SGammaConstant,
};
use crate::modal::{Field, Geometry, SpaceNorm};
use crate::nonlinearity::{Forcing, NonlinearitySpec};

/// Relative slack within which L·S_γ^q counts as equal to one.
pub const EQUALITY_TOLERANCE: f64 = 1e-9;

/// Largest extended grid the solver will allocate.
pub const MAX_NODES: usize = 1 << 22;

/// Which fixed-point theorem licenses the solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    /// ‖L‖_{BS^p} S_γ^q < 1: a strict contraction.
    Banach,
    /// ‖L‖_{BS^p} S_γ^q = 1 for a saturating term: no geometric rate.
    MeirKeeler,
}

/// Bound on the neglected history ∫_{-∞}^{t-T}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailBound {
    pub t_trunc: f64,
    /// Constant of r_γ(t) ≤ C t^{-γ-1} on [1, ∞), sup over modes.
    pub c_large: f64,
    /// Upper bound on Σ_{k ≥ ⌈T⌉} k^{-γ-1}.
    pub block_sum: f64,
    /// Bound on ‖f(·, u(·))‖_{BS^p} used in the estimate.
    pub forcing_bound: f64,
    /// True when `forcing_bound` holds for every u (saturating terms).
    pub a_priori: bool,
    pub bound: f64,
    pub tolerance: f64,
}

/// Σ_{k ≥ K} k^{-s} ≤ K^{-s} + K^{1-s}/(s - 1).
fn block_sum(k: f64, s: f64) -> f64 {
    k.powf(-s) + k.powf(1.0 - s) / (s - 1.0)
}

/// The norm check ‖F₀u‖_∞ ≤ (C_small·I + C_large·Σ) ‖f(·,u)‖_{BS^p}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundednessCheck {
    pub sup_norm: f64,
    pub forcing_bsp: f64,
    /// Right-hand side with the directly evaluated integral term.
    pub bound_direct: f64,
    /// Right-hand side with the alternative integral term.
    pub bound_printed: f64,
    pub margin_direct: f64,
    pub margin_printed: f64,
}

/// Hypothesis ledger of a fractional solve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FractionalConstants {
    pub route: Route,
    pub nonlinearity: &'static str,
    pub s_gamma: SGammaConstant,
    pub lipschitz_bsp: f64,
    /// ‖L‖_{BS^p}·S_γ^q with the direct integral term.
    pub product: f64,
    /// The same with the alternative integral term.
    pub product_printed: f64,
    /// 1 - product.
    pub margin: f64,
    pub kernel_bounds: KernelBounds,
    pub tail: TailBound,
    pub flags: Vec<String>,
    pub boundedness: Option<BoundednessCheck>,
}

struct ModeWeights {
    left: Vec<f64>,
    spectrum: Vec<Complex64>,
}

/// Discrete F₀ on a fixed extended grid: one FFT convolution per mode.
pub struct FractionalOperator {
    start: f64,
    h: f64,
    nodes: usize,
    fft_len: usize,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    weights: Vec<ModeWeights>,
}

impl std::fmt::Debug for FractionalOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FractionalOperator")
            .field("start", &self.start)
            .field("h", &self.h)
            .field("nodes", &self.nodes)
            .field("modes", &self.weights.len())
            .finish()
    }
}

impl FractionalOperator {
    /// Grid `start + j h`, j = 0..nodes.
    pub fn new(kernel: &FractionalKernelSpec, start: f64, h: f64, nodes: usize) -> Result<Self> {
        if nodes < 2 {
            return Err(Error::config("the extended grid needs at least two nodes"));
        }
        if nodes > MAX_NODES {
            return Err(Error::config(format!(
                "extended grid of {nodes} nodes exceeds the limit of {MAX_NODES}; raise h or shorten t_trunc"
            )));
        }
        let fft_len = (2 * nodes).next_power_of_two();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(fft_len);
        let ifft = planner.plan_fft_inverse(fft_len);
        let weights = kernel
            .spectrum()
            .par_iter()
            .map(|&lambda| {
                let (full, left) = product_weights(kernel.gamma(), lambda, h, nodes - 1)?;
                let mut spectrum = vec![Complex64::new(0.0, 0.0); fft_len];
                spectrum.iter_mut().zip(&full).for_each(|(c, &w)| c.re = w);
                fft.process(&mut spectrum);
                Ok(ModeWeights { left, spectrum })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            start,
            h,
            nodes,
            fft_len,
            fft,
            ifft,
            weights,
        })
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn modes(&self) -> usize {
        self.weights.len()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.nodes).map(|j| self.start + j as f64 * self.h).collect()
    }

    /// (F₀ f)_j = Σ_{i ≤ j} w_{j-i} f_i for node-major samples f (nodes × modes),
    /// with the half-cell correction at the start of the history.
    pub fn convolve(&self, f: &[f64]) -> Vec<f64> {
        let m = self.modes();
        assert_eq!(f.len(), self.nodes * m, "sample array does not match the grid");
        let columns: Vec<Vec<f64>> = self
            .weights
            .par_iter()
            .enumerate()
            .map(|(k, w)| {
                let mut buf = vec![Complex64::new(0.0, 0.0); self.fft_len];
                for (b, row) in buf.iter_mut().zip(f.chunks_exact(m)) {
                    b.re = row[k];
                }
                self.fft.process(&mut buf);
                buf.iter_mut().zip(&w.spectrum).for_each(|(b, s)| *b *= s);
                self.ifft.process(&mut buf);
                let scale = 1.0 / self.fft_len as f64;
                let f0 = f[k];
                (0..self.nodes).map(|j| buf[j].re * scale - w.left[j] * f0).collect()
            })
            .collect();
        let mut out = vec![0.0; self.nodes * m];
        for (k, col) in columns.iter().enumerate() {
            for (row, v) in out.chunks_exact_mut(m).zip(col) {
                row[k] = *v;
            }
        }
        out
    }
}

/// Grid layout shared by [`apply_f0`] and [`solve_fractional`].
struct Layout {
    start: f64,
    history: usize,
    nodes: usize,
}

fn layout(config: &SolverConfig, t_trunc: f64) -> Layout {
    let h = config.grid.h;
    let history = (t_trunc / h - 1e-9).ceil().max(1.0) as usize;
    Layout {
        start: config.grid.t0 - history as f64 * h,
        history,
        nodes: history + config.grid.steps() + 1,
    }
}

fn kernel_bounds(kernel: &FractionalKernelSpec) -> Result<KernelBounds> {
    verify_kernel_bounds(kernel, &log_grid(1e-4, 1e6, 161))
}

fn tail_bound(kernel: &FractionalKernelSpec, c_large: f64, t_trunc: f64, forcing: f64, a_priori: bool, tol: f64) -> TailBound {
    let sum = block_sum(t_trunc.ceil().max(1.0), kernel.gamma() + 1.0);
    TailBound {
        t_trunc,
        c_large,
        block_sum: sum,
        forcing_bound: forcing,
        a_priori,
        bound: c_large * sum * forcing,
        tolerance: tol,
    }
}

/// Smallest integer horizon whose tail bound meets `tol`.
fn choose_horizon(gamma: f64, c_large: f64, forcing: f64, tol: f64) -> f64 {
    let ok = |t: f64| c_large * block_sum(t, gamma + 1.0) * forcing <= tol;
    if ok(1.0) {
        return 1.0;
    }
    let mut hi = 2.0;
    while !ok(hi) && hi < 1e12 {
        hi *= 2.0;
    }
    let mut lo = hi / 2.0;
    while hi - lo > 1.0 {
        let mid = (0.5 * (lo + hi)).floor();
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn cell_step(window: Window) -> f64 {
    (window.length() / 20_000.0).max(1.0 / 32.0)
}

/// ‖f(·, u)‖_{BS^p} bound valid for every u, when the registry entry has one.
fn a_priori_forcing_bound(
    f: &NonlinearitySpec,
    geom: &Geometry,
    p: StepanovExponent,
    window: Window,
) -> Result<Option<f64>> {
    let step = cell_step(window);
    let zero = bsp_norm(&f.zero_response(geom), p, window, step)?.value;
    Ok(match f {
        NonlinearitySpec::Zero => Some(0.0),
        NonlinearitySpec::MkSaturating { .. } | NonlinearitySpec::MkSaturatingV2 { .. } => {
            let l = f.lipschitz_signal(geom)?.expect("saturating terms carry Lipschitz data");
            Some(bsp_norm(&l, p, window, step)?.value + zero)
        }
        NonlinearitySpec::Affine { a, .. } => {
            let a_norm = bsp_norm(a, p, window, step)?.value;
            (a_norm == 0.0).then_some(zero)
        }
        _ => None,
    })
}

fn states_from_signal(u: &Signal, times: &[f64], dim: usize) -> Result<Vec<f64>> {
    let sd = u.dim();
    if sd != dim && sd != 1 {
        return Err(Error::arg(format!("state signal has dimension {sd}, the problem needs {dim}")));
    }
    let mut out = vec![0.0; times.len() * dim];
    let mut tmp = vec![0.0; sd];
    for (row, &t) in out.chunks_exact_mut(dim).zip(times) {
        u.eval_into(t, &mut tmp)?;
        if sd == 1 {
            row.iter_mut().for_each(|r| *r = tmp[0]);
        } else {
            row.copy_from_slice(&tmp);
        }
    }
    Ok(out)
}

fn check_geometry(kernel: &FractionalKernelSpec, geom: &Geometry) -> Result<()> {
    if geom.dim() != kernel.modes() {
        return Err(Error::arg(format!(
            "the kernel has {} modes but the state space has dimension {}",
            kernel.modes(),
            geom.dim()
        )));
    }
    Ok(())
}

/// The discrete nonlinear map u ↦ F₀(f(·, u)) on the extended grid.
struct Problem<'a> {
    f: &'a NonlinearitySpec,
    geom: &'a Geometry,
    op: FractionalOperator,
    tab: crate::nonlinearity::Tabulated,
}

impl Problem<'_> {
    fn forcing_values(&self, u: &[f64]) -> Result<Vec<f64>> {
        let m = self.geom.dim();
        let mut out = vec![0.0; u.len()];
        let mut ws = self.geom.workspace();
        for (i, (o, x)) in out.chunks_exact_mut(m).zip(u.chunks_exact(m)).enumerate() {
            self.f.apply_tabulated(&self.tab, i, self.geom, x, o, &mut ws)?;
        }
        Ok(out)
    }

    fn image(&self, u: &[f64]) -> Result<Vec<f64>> {
        Ok(self.op.convolve(&self.forcing_values(u)?))
    }

    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let m = self.geom.dim();
        let mut ws = self.geom.workspace();
        a.chunks_exact(m)
            .zip(b.chunks_exact(m))
            .fold(0.0, |acc, (x, y)| acc.max(self.geom.distance(x, y, &mut ws)))
    }

    fn norms(&self, values: &[f64]) -> Vec<f64> {
        let m = self.geom.dim();
        let mut ws = self.geom.workspace();
        values.chunks_exact(m).map(|x| self.geom.norm(x, &mut ws)).collect()
    }
}

/// Result of [`apply_f0`].
#[derive(Debug, Clone)]
pub struct F0Output {
    /// Values on the extended grid [t₀ - T, t₁].
    pub extended: GridSignal,
    /// Values on [t₀, t₁].
    pub values: GridSignal,
    pub tail: TailBound,
}

fn truncation(
    f: &NonlinearitySpec,
    kernel: &FractionalKernelSpec,
    geom: &Geometry,
    p: StepanovExponent,
    config: &SolverConfig,
) -> Result<(f64, Option<f64>, KernelBounds, f64)> {
    let tol = config.tail_tolerance.unwrap_or(DEFAULT_FRACTIONAL_TAIL);
    let bounds = kernel_bounds(kernel)?;
    // The a priori bound must hold on the neglected history too, so the
    // window reaches well behind the grid.
    let probe_window = Window::new(config.grid.t0 - 100.0, config.grid.t1)?;
    let a_priori = a_priori_forcing_bound(f, geom, p, probe_window)?;
    let t_trunc = match (config.t_trunc, a_priori) {
        (Some(t), _) => t,
        (None, Some(b)) => choose_horizon(kernel.gamma(), bounds.c_large, b, tol),
        (None, None) => {
            return Err(Error::config(format!(
                "{} has no a priori bound on ‖f(·,u)‖; set t_trunc explicitly",
                f.tag()
            )))
        }
    };
    Ok((t_trunc, a_priori, bounds, tol))
}

/// Evaluates F₀u on the configured grid with the history cut at t₀ - T.
pub fn apply_f0(
    u: &Signal,
    f: &NonlinearitySpec,
    kernel: &FractionalKernelSpec,
    geom: &Geometry,
    p: StepanovExponent,
    config: &SolverConfig,
) -> Result<F0Output> {
    config.validate()?;
    check_geometry(kernel, geom)?;
    let (t_trunc, a_priori, bounds, tol) = truncation(f, kernel, geom, p, config)?;
    let lay = layout(config, t_trunc);
    let h = config.grid.h;
    let op = FractionalOperator::new(kernel, lay.start, h, lay.nodes)?;
    let times = op.times();
    let states = states_from_signal(u, &times, geom.dim())?;
    let problem = Problem {
        f,
        geom,
        tab: f.tabulate(geom, &times)?,
        op,
    };
    let fv = problem.forcing_values(&states)?;
    let (forcing, exact) = match a_priori {
        Some(b) => (b, true),
        None => (grid_bsp(&problem.norms(&fv), lay.start, h, p)?, false),
    };
    let tail = tail_bound(kernel, bounds.c_large, t_trunc, forcing, exact, tol);
    if tail.bound > tol {
        return Err(Error::config(format!(
            "t_trunc = {t_trunc} leaves a tail bound of {:.3e} above the tolerance {tol:.3e}",
            tail.bound
        )));
    }
    let out = problem.op.convolve(&fv);
    let m = geom.dim();
    Ok(F0Output {
        values: GridSignal::new(config.grid.t0, h, m, out[lay.history * m..].to_vec())?,
        extended: GridSignal::new(lay.start, h, m, out)?,
        tail,
    })
}

/// ‖·‖_{BS^p} of node values, read as a piecewise-linear signal.
fn grid_bsp(norms: &[f64], start: f64, h: f64, p: StepanovExponent) -> Result<f64> {
    let end = start + (norms.len() - 1) as f64 * h;
    if end - start < 2.0 {
        return Ok(norms.iter().fold(0.0, |m: f64, v| m.max(*v)));
    }
    let s = Signal::Grid(GridSignal::scalar(start, h, norms.to_vec())?);
    let w = Window::new(start, end - 1.0)?;
    Ok(bsp_norm(&s, p, w, cell_step(w).max(h))?.value)
}

/// Output of [`solve_fractional`].
#[derive(Debug, Clone)]
pub struct FractionalSolution {
    /// The fixed point on [t₀, t₁].
    pub solution: GridSignal,
    /// The fixed point on the extended grid.
    pub extended: GridSignal,
    pub report: IterationReport,
    pub constants: FractionalConstants,
}

/// Checks the contraction hypothesis, picks the route, and iterates F₀.
/// `initial` defaults to zero; a scalar signal fills every mode.
pub fn solve_fractional(
    f: &NonlinearitySpec,
    kernel: &FractionalKernelSpec,
    geom: &Geometry,
    p: StepanovExponent,
    config: &SolverConfig,
    initial: Option<&Signal>,
) -> Result<FractionalSolution> {
    config.validate()?;
    check_geometry(kernel, geom)?;
    let s_gamma = s_gamma_constant(kernel.gamma(), p)?;
    let (t_trunc, a_priori, bounds, tol) = truncation(f, kernel, geom, p, config)?;
    let lay = layout(config, t_trunc);
    let h = config.grid.h;
    f.validate(geom, (lay.start, config.grid.t1))?;

    let l = f.lipschitz_signal(geom)?.ok_or_else(|| {
        Error::arg(format!(
            "{} has no global Lipschitz bound, so the contraction hypothesis cannot be checked",
            f.tag()
        ))
    })?;
    let l_window = Window::new(lay.start, config.grid.t1.max(lay.start + 1.0))?;
    let lipschitz_bsp = bsp_norm(&l, p, l_window, cell_step(l_window))?.value;
    let product = lipschitz_bsp * s_gamma.total;
    let product_printed = lipschitz_bsp * s_gamma.total_printed;
    let margin = 1.0 - product;
    let mut flags = Vec::new();
    let route = if product < 1.0 - EQUALITY_TOLERANCE {
        Route::Banach
    } else if product <= 1.0 + EQUALITY_TOLERANCE && f.is_meir_keeler() {
        flags.push("equality case: Meir-Keeler route, no geometric rate guaranteed".to_string());
        Route::MeirKeeler
    } else {
        let reason = if product <= 1.0 + EQUALITY_TOLERANCE {
            format!("‖L‖_BS^{p} · S_γ^q = 1 is admissible only for saturating terms, not {}", f.tag())
        } else {
            format!("‖L‖_BS^{p} · S_γ^q = {product:.12} exceeds 1 for {}", f.tag())
        };
        return Err(Error::Refused { reason, margin });
    };

    let op = FractionalOperator::new(kernel, lay.start, h, lay.nodes)?;
    let times = op.times();
    let problem = Problem {
        f,
        geom,
        tab: f.tabulate(geom, &times)?,
        op,
    };
    let u0 = match initial {
        Some(s) => states_from_signal(s, &times, geom.dim())?,
        None => vec![0.0; lay.nodes * geom.dim()],
    };
    let (u, report) = picard_iterate(
        |u: &Vec<f64>| problem.image(u),
        u0,
        |a, b| problem.distance(a, b),
        config.tolerance,
        config.max_iterations,
    )?;

    let fv = problem.forcing_values(&u)?;
    let forcing_bsp = grid_bsp(&problem.norms(&fv), lay.start, h, p)?;
    let tail = match a_priori {
        Some(b) => tail_bound(kernel, bounds.c_large, t_trunc, b, true, tol),
        None => tail_bound(kernel, bounds.c_large, t_trunc, forcing_bsp, false, tol),
    };
    if tail.bound > tol {
        return Err(Error::config(format!(
            "t_trunc = {t_trunc} leaves a tail bound of {:.3e} above the tolerance {tol:.3e}",
            tail.bound
        )));
    }
    if route == Route::MeirKeeler {
        if let Some(r) = report.max_ratio_after_burn_in() {
            flags.push(format!("largest observed contraction ratio {r:.6}"));
        }
    }
    let m = geom.dim();
    let sup_norm = problem.norms(&u[lay.history * m..]).into_iter().fold(0.0, f64::max);
    let bound_direct = (bounds.c_small * s_gamma.integral_direct + bounds.c_large * s_gamma.series) * forcing_bsp;
    let bound_printed = (bounds.c_small * s_gamma.integral_printed + bounds.c_large * s_gamma.series) * forcing_bsp;
    let boundedness = Some(BoundednessCheck {
        sup_norm,
        forcing_bsp,
        bound_direct,
        bound_printed,
        margin_direct: bound_direct - sup_norm,
        margin_printed: bound_printed - sup_norm,
    });
    Ok(FractionalSolution {
        solution: GridSignal::new(config.grid.t0, h, m, u[lay.history * m..].to_vec())?,
        extended: GridSignal::new(lay.start, h, m, u)?,
        report,
        constants: FractionalConstants {
            route,
            nonlinearity: f.tag(),
            s_gamma,
            lipschitz_bsp,
            product,
            product_printed,
            margin,
            kernel_bounds: bounds,
            tail,
            flags,
            boundedness,
        },
    })
}

/// Inputs of the fractional Poisson heat model on (0, π) with m ≡ 1:
/// D^γ u = Δu + K(t) R/(1 + ‖u‖) + H(t, x), Dirichlet boundary.
#[derive(Debug, Clone)]
pub struct HeatParams {
    pub gamma: f64,
    pub modes: usize,
    pub k: Signal,
    /// Sine amplitudes of R.
    pub r: Vec<f64>,
    pub h: Vec<Forcing>,
    pub p: StepanovExponent,
    /// Spatial output points; defaults to 33 equispaced points on [0, π].
    pub xs: Option<Vec<f64>>,
}

/// Output of [`heat_model_run`].
#[derive(Debug, Clone)]
pub struct HeatRun {
    pub field: Field,
    pub solve: FractionalSolution,
    /// ‖K‖_{BS^p} ‖R‖ S_γ^q, equal to one under the model's normalisation.
    pub normalisation: f64,
}

/// Spectral truncation of the heat model with λ_k = k².
pub fn heat_model_run(params: &HeatParams, config: &SolverConfig) -> Result<HeatRun> {
    let kernel = FractionalKernelSpec::dirichlet_interval(params.gamma, params.modes)?;
    let geom = Geometry::modal(params.modes, SpaceNorm::L2)?;
    let f = NonlinearitySpec::MkSaturating {
        k: params.k.clone(),
        r: params.r.clone(),
        forcing: params.h.clone(),
    };
    let solve = solve_fractional(&f, &kernel, &geom, params.p, config, None)?;
    let xs = params.xs.clone().unwrap_or_else(|| Field::default_points(33));
    let field = Field::from_grid(&geom, &solve.solution, &xs);
    let normalisation = solve.constants.product;
    Ok(HeatRun {
        field,
        solve,
        normalisation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixedpoint::TimeGrid;

    fn config(t0: f64, t1: f64, h: f64) -> SolverConfig {
        SolverConfig::new(TimeGrid::new(t0, t1, h).unwrap())
    }

    fn p2() -> StepanovExponent {
        StepanovExponent::new(2.0).unwrap()
    }

    fn pure_forcing(s: Signal) -> NonlinearitySpec {
        NonlinearitySpec::Affine {
            a: Signal::Constant(0.0),
            forcing: vec![Forcing::scalar(s)],
        }
    }

    #[test]
    fn convolution_matches_direct_sum() {
        let kernel = FractionalKernelSpec::new(0.6, vec![1.5, 3.0]).unwrap();
        let n = 40;
        let op = FractionalOperator::new(&kernel, 0.0, 0.1, n).unwrap();
        let f: Vec<f64> = (0..2 * n).map(|i| ((i * 7) % 11) as f64 / 11.0 - 0.3).collect();
        let fast = op.convolve(&f);
        for (k, &lambda) in kernel.spectrum().iter().enumerate() {
            let (full, left) = product_weights(0.6, lambda, 0.1, n - 1).unwrap();
            for j in 0..n {
                let direct: f64 = (0..=j).map(|i| full[j - i] * f[2 * i + k]).sum::<f64>() - left[j] * f[k];
                assert!((fast[2 * j + k] - direct).abs() < 1e-13, "mode {k} node {j}");
            }
        }
    }

    #[test]
    fn zero_forcing_gives_zero() {
        let kernel = FractionalKernelSpec::new(0.75, vec![1.0]).unwrap();
        let mut c = config(0.0, 5.0, 0.1);
        c.t_trunc = Some(5.0);
        let out = apply_f0(&Signal::Constant(0.3), &NonlinearitySpec::Zero, &kernel, &Geometry::Scalar, p2(), &c).unwrap();
        assert!(out.values.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn truncated_constant_response_is_the_mass() {
        // With f ≡ 1 and history T the exact value is the kernel mass on [0, t - s₀].
        let kernel = FractionalKernelSpec::new(0.75, vec![2.0]).unwrap();
        let mut c = config(0.0, 2.0, 0.05);
        c.t_trunc = Some(10.0);
        c.tail_tolerance = Some(1.0);
        let out = apply_f0(&Signal::Constant(0.0), &pure_forcing(Signal::Constant(1.0)), &kernel, &Geometry::Scalar, p2(), &c).unwrap();
        for (i, v) in out.values.values().iter().enumerate() {
            let t = 10.0 + i as f64 * 0.05;
            let mass = (1.0 - crate::kernel::mittag_leffler(0.75, 1.0, -2.0 * t.powf(0.75)).unwrap()) / 2.0;
            assert!((v - mass).abs() < 1e-12, "{v} vs {mass}");
        }
    }

    #[test]
    fn linearity_in_the_forcing() {
        let kernel = FractionalKernelSpec::new(0.8, vec![1.0, 4.0]).unwrap();
        let geom = Geometry::modal(2, SpaceNorm::L2).unwrap();
        let mut c = config(0.0, 3.0, 0.05);
        c.t_trunc = Some(20.0);
        c.tail_tolerance = Some(1.0);
        let make = |scale: f64| NonlinearitySpec::Affine {
            a: Signal::Constant(0.0),
            forcing: vec![Forcing::new(Signal::cosine(scale, 1.3), vec![1.0, -0.5])],
        };
        let zero = Signal::Constant(0.0);
        let one = apply_f0(&zero, &make(1.0), &kernel, &geom, p2(), &c).unwrap();
        let three = apply_f0(&zero, &make(-3.0), &kernel, &geom, p2(), &c).unwrap();
        for (a, b) in one.values.values().iter().zip(three.values.values()) {
            assert!((-3.0 * a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn horizon_choice_meets_the_tolerance() {
        let t = choose_horizon(0.75, 0.05, 1.0, 1e-4);
        assert!(0.05 * block_sum(t, 1.75) <= 1e-4);
        assert!(0.05 * block_sum(t - 1.0, 1.75) > 1e-4);
        assert_eq!(choose_horizon(0.75, 0.05, 0.0, 1e-4), 1.0);
    }

    #[test]
    fn refusal_above_one_and_route_selection() {
        let kernel = FractionalKernelSpec::new(0.75, vec![1.0]).unwrap();
        let s = s_gamma_constant(0.75, p2()).unwrap().total;
        let mut c = config(0.0, 2.0, 0.05);
        c.t_trunc = Some(50.0);
        c.tail_tolerance = Some(1.0);
        let mk = |m: f64| NonlinearitySpec::MkSaturating {
            k: Signal::Constant(m / s),
            r: vec![1.0],
            forcing: vec![],
        };
        let err = solve_fractional(&mk(1.05), &kernel, &Geometry::Scalar, p2(), &c, None).unwrap_err();
        assert!(err.is_refusal());
        let ok = solve_fractional(&mk(0.5), &kernel, &Geometry::Scalar, p2(), &c, None).unwrap();
        assert_eq!(ok.constants.route, Route::Banach);
        assert!(ok.report.converged);
        let eq = solve_fractional(&mk(1.0), &kernel, &Geometry::Scalar, p2(), &c, None).unwrap();
        assert_eq!(eq.constants.route, Route::MeirKeeler);
        assert!(!eq.constants.flags.is_empty());
        let affine = NonlinearitySpec::Affine {
            a: Signal::Constant(1.0 / s),
            forcing: vec![],
        };
        assert!(solve_fractional(&affine, &kernel, &Geometry::Scalar, p2(), &c, None)
            .unwrap_err()
            .is_refusal());
    }

    #[test]
    fn zero_nonlinearity_solves_in_one_step() {
        let kernel = FractionalKernelSpec::new(0.75, vec![1.0]).unwrap();
        let c = config(0.0, 1.0, 0.1);
        let out = solve_fractional(&NonlinearitySpec::Zero, &kernel, &Geometry::Scalar, p2(), &c, None).unwrap();
        assert_eq!(out.report.iterations, 1);
        assert!(out.solution.values().iter().all(|v| *v == 0.0));
    }
}
