//! Diagonal evolution families with an exponential dichotomy, their Green
//! functions, and the ball-constrained fixed-point solve of
//! u(t) = ∫_ℝ G(t, s) f(s, u(s)) ds.
//!
//! Mode k evolves by u_k' = -(ν_k + a(t)) u_k, so
//! U_k(t, s) = exp(-ν_k (t - s) - ∫_s^t a). Stable modes use
//! G_k(t, s) = U_k(t, s) for s ≤ t, unstable ones G_k(t, s) = -U_k(t, s)
//! for s > t. Convolutions are recursive: one decay factor and a Gauss rule
//! per cell.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fixedpoint::{picard_iterate_observed, IterationReport, SolverConfig};
use crate::funcspace::{bsp_norm, GridSignal, Signal, StepanovExponent, Window};
use crate::modal::{Field, Geometry, SpaceNorm};
use crate::nonlinearity::{Forcing, NonlinearitySpec};
use crate::quadrature::{gl8, GaussLegendre};

/// c_p of the existence theorems: 2N(2/(qδ))^{1/q} e^{δ/2}/(e^{δ/2} - 1)
/// for p > 1 and 2N e^δ/(e^δ - 1) for p = 1.
pub fn theorem_constants(n: f64, delta: f64, p: StepanovExponent) -> Result<f64> {
    if !(n > 0.0 && delta > 0.0) {
        return Err(Error::arg(format!("N and δ must be positive, got N = {n}, δ = {delta}")));
    }
    Ok(match p.q() {
        None => 2.0 * n * delta.exp() / delta.exp_m1(),
        Some(q) => {
            let half = 0.5 * delta;
            2.0 * n * (2.0 / (q * delta)).powf(1.0 / q) * half.exp() / half.exp_m1()
        }
    })
}

/// The generator family.
#[derive(Debug, Clone)]
pub enum FamilyKind {
    /// Constant rates ν_k; a negative rate is an unstable mode.
    Autonomous { rates: Vec<f64> },
    /// A(t) = Δ - a(t) on (0, π): rates λ_k + a(t).
    ScalarShifted { spectrum: Vec<f64>, a: Signal },
}

/// Dichotomy data (N, δ) with a fixed diagonal projection.
#[derive(Debug, Clone)]
pub struct DichotomySpec {
    pub n: f64,
    pub delta: f64,
    pub kind: FamilyKind,
    /// `unstable[k]` puts mode k in the range of Q = I - P.
    pub unstable: Vec<bool>,
}

impl DichotomySpec {
    /// Autonomous family; modes with negative rate are unstable.
    pub fn autonomous(rates: Vec<f64>, n: f64, delta: f64) -> Result<Self> {
        let unstable = rates.iter().map(|&r| r < 0.0).collect();
        let spec = Self {
            n,
            delta,
            kind: FamilyKind::Autonomous { rates },
            unstable,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// All-stable family with rates λ_k + a(t).
    pub fn scalar_shifted(spectrum: Vec<f64>, a: Signal, n: f64, delta: f64) -> Result<Self> {
        let spec = Self {
            n,
            delta,
            unstable: vec![false; spectrum.len()],
            kind: FamilyKind::ScalarShifted { spectrum, a },
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_split(mut self, unstable: Vec<bool>) -> Result<Self> {
        self.unstable = unstable;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n > 0.0 && self.delta > 0.0) {
            return Err(Error::arg(format!(
                "dichotomy needs N, δ > 0, got N = {}, δ = {}",
                self.n, self.delta
            )));
        }
        let rates = self.rates();
        if rates.is_empty() {
            return Err(Error::arg("the family needs at least one mode"));
        }
        if rates.iter().any(|r| !r.is_finite()) {
            return Err(Error::arg("mode rates must be finite"));
        }
        if self.unstable.len() != rates.len() {
            return Err(Error::arg(format!(
                "split lists {} modes, the family has {}",
                self.unstable.len(),
                rates.len()
            )));
        }
        Ok(())
    }

    pub fn modes(&self) -> usize {
        self.rates().len()
    }

    fn rates(&self) -> &[f64] {
        match &self.kind {
            FamilyKind::Autonomous { rates } => rates,
            FamilyKind::ScalarShifted { spectrum, .. } => spectrum,
        }
    }

    pub fn has_unstable(&self) -> bool {
        self.unstable.iter().any(|&u| u)
    }

    /// Realises the family on [lo, hi], caching ∫ a.
    pub fn family(&self, lo: f64, hi: f64) -> Result<EvolutionFamily> {
        self.validate()?;
        let shift = match &self.kind {
            FamilyKind::Autonomous { .. } => None,
            FamilyKind::ScalarShifted { a, .. } => Some(Antiderivative::new(a, lo, hi)?),
        };
        Ok(EvolutionFamily {
            rates: self.rates().to_vec(),
            unstable: self.unstable.clone(),
            shift,
            n: self.n,
            delta: self.delta,
        })
    }
}

/// Cumulative ∫_{lo}^t a on a fine grid, completed by an 8-point rule.
#[derive(Debug, Clone)]
struct Antiderivative {
    a: Signal,
    lo: f64,
    hi: f64,
    step: f64,
    values: Vec<f64>,
}

const ANTIDERIVATIVE_STEP: f64 = 1.0 / 64.0;

impl Antiderivative {
    fn new(a: &Signal, lo: f64, hi: f64) -> Result<Self> {
        if !(hi > lo) {
            return Err(Error::arg(format!("empty family range [{lo}, {hi}]")));
        }
        let cells = ((hi - lo) / ANTIDERIVATIVE_STEP).ceil() as usize;
        let step = (hi - lo) / cells as f64;
        let increments: Vec<f64> = (0..cells)
            .into_par_iter()
            .map(|i| cell_integral(a, lo + i as f64 * step, lo + (i + 1) as f64 * step))
            .collect::<Result<_>>()?;
        let mut values = Vec::with_capacity(cells + 1);
        let mut acc = 0.0;
        values.push(0.0);
        for d in increments {
            acc += d;
            values.push(acc);
        }
        Ok(Self {
            a: a.clone(),
            lo,
            hi,
            step,
            values,
        })
    }

    fn eval(&self, t: f64) -> Result<f64> {
        let slack = 1e-9 * (self.hi - self.lo).max(1.0);
        if t < self.lo - slack || t > self.hi + slack {
            return Err(Error::Domain {
                t,
                start: self.lo,
                end: self.hi,
            });
        }
        let i = (((t - self.lo) / self.step).floor().max(0.0) as usize).min(self.values.len() - 1);
        let ti = self.lo + i as f64 * self.step;
        if t == ti {
            return Ok(self.values[i]);
        }
        Ok(self.values[i] + cell_integral(&self.a, ti, t)?)
    }
}

fn cell_integral(a: &Signal, lo: f64, hi: f64) -> Result<f64> {
    let mut acc = 0.0;
    for (x, w) in gl8().mapped(lo, hi) {
        acc += w * a.value(x)?;
    }
    Ok(acc)
}

/// An evolution family realised on a time range.
#[derive(Debug, Clone)]
pub struct EvolutionFamily {
    rates: Vec<f64>,
    unstable: Vec<bool>,
    shift: Option<Antiderivative>,
    n: f64,
    delta: f64,
}

/// Worst case of |G_k(t,s)| / (N e^{-δ|t-s|}) over a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GreenBoundCheck {
    pub worst_ratio: f64,
    pub mode: usize,
    pub t: f64,
    pub s: f64,
    pub passed: bool,
}

impl EvolutionFamily {
    pub fn modes(&self) -> usize {
        self.rates.len()
    }

    fn exponent(&self, k: usize, t: f64, s: f64) -> Result<f64> {
        let shift = match &self.shift {
            Some(a) => a.eval(t)? - a.eval(s)?,
            None => 0.0,
        };
        Ok(-self.rates[k] * (t - s) - shift)
    }

    /// U_k(t, s) for any ordering of t and s.
    pub fn propagator(&self, k: usize, t: f64, s: f64) -> Result<f64> {
        Ok(self.exponent(k, t, s)?.exp())
    }

    /// G_k(t, s).
    pub fn green(&self, k: usize, t: f64, s: f64) -> Result<f64> {
        Ok(match (self.unstable[k], s <= t) {
            (false, true) => self.propagator(k, t, s)?,
            (true, false) => -self.propagator(k, t, s)?,
            _ => 0.0,
        })
    }

    pub fn check_green_bound(&self, grid: &[f64]) -> Result<GreenBoundCheck> {
        let mut worst = GreenBoundCheck {
            worst_ratio: 0.0,
            mode: 0,
            t: f64::NAN,
            s: f64::NAN,
            passed: true,
        };
        for k in 0..self.modes() {
            for &t in grid {
                for &s in grid {
                    let g = self.green(k, t, s)?.abs();
                    let ratio = g / (self.n * (-self.delta * (t - s).abs()).exp());
                    if ratio > worst.worst_ratio {
                        worst = GreenBoundCheck {
                            worst_ratio: ratio,
                            mode: k,
                            t,
                            s,
                            passed: true,
                        };
                    }
                }
            }
        }
        worst.passed = worst.worst_ratio <= 1.0 + 1e-12;
        Ok(worst)
    }

    /// max |U_k(t,s) U_k(s,r) - U_k(t,r)| over t ≥ s ≥ r in the grid.
    pub fn cocycle_defect(&self, grid: &[f64]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for k in 0..self.modes() {
            for &t in grid {
                for &s in grid.iter().filter(|&&s| s <= t) {
                    for &r in grid.iter().filter(|&&r| r <= s) {
                        let lhs = self.propagator(k, t, s)? * self.propagator(k, s, r)?;
                        worst = worst.max((lhs - self.propagator(k, t, r)?).abs());
                    }
                }
            }
        }
        Ok(worst)
    }
}

/// U_k(t, s) of `spec`. A stable mode is only propagated forward.
pub fn evolution_propagator(spec: &DichotomySpec, k: usize, t: f64, s: f64) -> Result<f64> {
    if k >= spec.modes() {
        return Err(Error::arg(format!("mode {k} out of range for {} modes", spec.modes())));
    }
    if t < s && !spec.unstable[k] {
        return Err(Error::arg(format!(
            "mode {k} is stable and cannot be propagated backwards from {s} to {t}; use green_apply"
        )));
    }
    let (lo, hi) = (t.min(s), t.max(s));
    spec.family(lo, hi.max(lo + ANTIDERIVATIVE_STEP))?.propagator(k, t, s)
}

/// Discrete Green convolution on `start + j h`, j = 0..nodes.
#[derive(Debug, Clone)]
pub struct EvolutionOperator {
    start: f64,
    h: f64,
    nodes: usize,
    order: usize,
    modes: usize,
    unstable: Vec<bool>,
    /// Per mode: cell decay factors.
    decay: Vec<Vec<f64>>,
    /// Per mode: cells × order Gauss weights times propagator values.
    kern: Vec<Vec<f64>>,
    /// Cubic interpolation stencils from nodes to Gauss points.
    stencils: Vec<(usize, [f64; 4])>,
}

impl EvolutionOperator {
    pub fn new(family: &EvolutionFamily, start: f64, h: f64, nodes: usize, order: usize) -> Result<Self> {
        if nodes < 2 {
            return Err(Error::config("the evolution grid needs at least two nodes"));
        }
        let rule = GaussLegendre::new(order);
        let cells = nodes - 1;
        let t = |j: usize| start + j as f64 * h;
        let per_mode: Vec<(Vec<f64>, Vec<f64>)> = (0..family.modes())
            .into_par_iter()
            .map(|k| {
                let mut decay = Vec::with_capacity(cells);
                let mut kern = Vec::with_capacity(cells * order);
                for n in 0..cells {
                    let (a, b) = (t(n), t(n + 1));
                    let anchor = if family.unstable[k] { a } else { b };
                    decay.push(if family.unstable[k] {
                        family.propagator(k, a, b)?
                    } else {
                        family.propagator(k, b, a)?
                    });
                    for (s, w) in rule.mapped(a, b) {
                        kern.push(w * family.propagator(k, anchor, s)?);
                    }
                }
                Ok((decay, kern))
            })
            .collect::<Result<_>>()?;
        let stencils = rule
            .nodes()
            .iter()
            .map(|x| 0.5 * (x + 1.0))
            .collect::<Vec<_>>();
        let stencils = (0..cells)
            .flat_map(|n| stencils.iter().map(move |&theta| cubic_stencil(n, theta, nodes)))
            .collect();
        let (decay, kern) = per_mode.into_iter().unzip();
        Ok(Self {
            start,
            h,
            nodes,
            order,
            modes: family.modes(),
            unstable: family.unstable.clone(),
            decay,
            kern,
            stencils,
        })
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.nodes).map(|j| self.start + j as f64 * self.h).collect()
    }

    /// Gauss points, cell by cell.
    pub fn quadrature_times(&self) -> Vec<f64> {
        let rule = GaussLegendre::new(self.order);
        (0..self.nodes - 1)
            .flat_map(|n| {
                let a = self.start + n as f64 * self.h;
                rule.mapped(a, a + self.h).map(|(s, _)| s).collect::<Vec<_>>()
            })
            .collect()
    }

    /// Node values of ∫ G(t, s) h(s) ds from samples of h at the Gauss points
    /// (points × modes, point-major), zero outside the grid.
    pub fn apply(&self, hq: &[f64]) -> Vec<f64> {
        let m = self.modes;
        let cells = self.nodes - 1;
        assert_eq!(hq.len(), cells * self.order * m, "samples do not match the Gauss points");
        let cols: Vec<Vec<f64>> = (0..m)
            .into_par_iter()
            .map(|k| {
                let mut v = vec![0.0; self.nodes];
                let src = |n: usize| -> f64 {
                    (0..self.order)
                        .map(|i| self.kern[k][n * self.order + i] * hq[(n * self.order + i) * m + k])
                        .sum()
                };
                if self.unstable[k] {
                    for n in (0..cells).rev() {
                        v[n] = self.decay[k][n] * v[n + 1] - src(n);
                    }
                } else {
                    for n in 0..cells {
                        v[n + 1] = self.decay[k][n] * v[n] + src(n);
                    }
                }
                v
            })
            .collect();
        let mut out = vec![0.0; self.nodes * m];
        for (k, col) in cols.iter().enumerate() {
            for (row, v) in out.chunks_exact_mut(m).zip(col) {
                row[k] = *v;
            }
        }
        out
    }

    /// Interpolates node samples (nodes × modes) to the Gauss points.
    pub fn to_quadrature(&self, values: &[f64]) -> Vec<f64> {
        let m = self.modes;
        let mut out = vec![0.0; self.stencils.len() * m];
        for (row, (j0, w)) in out.chunks_exact_mut(m).zip(&self.stencils) {
            for (i, wi) in w.iter().enumerate() {
                if *wi != 0.0 {
                    let src = &values[(j0 + i) * m..(j0 + i + 1) * m];
                    row.iter_mut().zip(src).for_each(|(o, s)| *o += wi * s);
                }
            }
        }
        out
    }
}

/// Lagrange weights on four consecutive nodes for the point n + θ.
fn cubic_stencil(n: usize, theta: f64, nodes: usize) -> (usize, [f64; 4]) {
    if nodes < 4 {
        let mut w = [0.0; 4];
        w[0] = 1.0 - theta;
        w[1] = theta;
        return (n, w);
    }
    let j0 = n.saturating_sub(1).min(nodes - 4);
    let x = (n - j0) as f64 + theta;
    let mut w = [0.0; 4];
    for (i, wi) in w.iter_mut().enumerate() {
        let mut l = 1.0;
        for j in 0..4 {
            if j != i {
                l *= (x - j as f64) / (i as f64 - j as f64);
            }
        }
        *wi = l;
    }
    (j0, w)
}

/// Exponential tail N e^{-δT} ‖h‖_{BS¹} / (1 - e^{-δ}) of the truncated ∫_ℝ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpTail {
    pub t_trunc: f64,
    pub forcing_bound: f64,
    pub bound: f64,
    pub tolerance: f64,
}

fn exp_tail(spec: &DichotomySpec, t_trunc: f64, forcing: f64, tolerance: f64) -> ExpTail {
    ExpTail {
        t_trunc,
        forcing_bound: forcing,
        bound: spec.n * (-spec.delta * t_trunc).exp() * forcing / -(-spec.delta).exp_m1(),
        tolerance,
    }
}

fn horizon(spec: &DichotomySpec, forcing: f64, tolerance: f64) -> f64 {
    let scale = spec.n * forcing / (-(-spec.delta).exp_m1() * tolerance);
    if scale <= 1.0 {
        1.0
    } else {
        (scale.ln() / spec.delta).max(1.0)
    }
}

fn cell_step(window: Window) -> f64 {
    (window.length() / 20_000.0).max(1.0 / 32.0)
}

struct Layout {
    start: f64,
    history: usize,
    nodes: usize,
}

fn layout(config: &SolverConfig, t_trunc: f64, two_sided: bool) -> Layout {
    let h = config.grid.h;
    let history = (t_trunc / h - 1e-9).ceil().max(1.0) as usize;
    let future = if two_sided { history } else { 0 };
    Layout {
        start: config.grid.t0 - history as f64 * h,
        history,
        nodes: history + config.grid.steps() + 1 + future,
    }
}

fn resolve_horizon(spec: &DichotomySpec, config: &SolverConfig, forcing: f64) -> Result<ExpTail> {
    let tol = config.tail_tolerance.unwrap_or(config.tolerance / 10.0);
    let t = config.t_trunc.unwrap_or_else(|| horizon(spec, forcing, tol));
    let tail = exp_tail(spec, t, forcing, tol);
    if tail.bound > tol * (1.0 + 1e-9) {
        return Err(Error::config(format!(
            "t_trunc = {t} leaves a tail bound of {:.3e} above the tolerance {tol:.3e}",
            tail.bound
        )));
    }
    Ok(tail)
}

/// Output of [`green_apply`].
#[derive(Debug, Clone)]
pub struct GreenOutput {
    pub values: GridSignal,
    pub tail: ExpTail,
}

/// ∫ G(t, s) h(s) ds on the configured grid. `h` holds mode coefficients
/// (a scalar signal drives every mode).
pub fn green_apply(h: &Signal, spec: &DichotomySpec, config: &SolverConfig) -> Result<GreenOutput> {
    config.validate()?;
    spec.validate()?;
    let m = spec.modes();
    if h.dim() != m && h.dim() != 1 {
        return Err(Error::arg(format!("forcing has dimension {}, the family has {m} modes", h.dim())));
    }
    let (t0, t1) = (config.grid.t0, config.grid.t1);
    let probe = Window::new(t0 - 100.0, t1 + 100.0)?;
    let norm = bsp_norm(h, StepanovExponent::new(1.0)?, probe, cell_step(probe))?.value;
    let tail = resolve_horizon(spec, config, norm)?;
    let lay = layout(config, tail.t_trunc, spec.has_unstable());
    let end = lay.start + (lay.nodes - 1) as f64 * config.grid.h;
    h.check_domain(lay.start, end)
        .map_err(|e| Error::config(format!("forcing must cover [{}, {end}]: {e}", lay.start)))?;
    let family = spec.family(lay.start, end)?;
    let op = EvolutionOperator::new(&family, lay.start, config.grid.h, lay.nodes, config.quadrature_order)?;
    let times = op.quadrature_times();
    let mut hq = vec![0.0; times.len() * m];
    let mut tmp = vec![0.0; h.dim()];
    for (row, &s) in hq.chunks_exact_mut(m).zip(&times) {
        h.eval_into(s, &mut tmp)?;
        if tmp.len() == 1 {
            row.iter_mut().for_each(|r| *r = tmp[0]);
        } else {
            row.copy_from_slice(&tmp);
        }
    }
    let out = op.apply(&hq);
    let steps = config.grid.steps();
    Ok(GreenOutput {
        values: GridSignal::new(t0, config.grid.h, m, out[lay.history * m..(lay.history + steps + 1) * m].to_vec())?,
        tail,
    })
}

/// Margins of the existence hypotheses: ρ > c_p ‖f(·,0)‖_{BS^p} and
/// ‖L_ρ‖_{BS^p} ≤ 1/c_p - ‖f(·,0)‖_{BS^p}/ρ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvolutionHypotheses {
    pub p: f64,
    pub n: f64,
    pub delta: f64,
    pub c_p: f64,
    pub rho: f64,
    pub zero_bsp: f64,
    pub lipschitz_bsp: f64,
    /// ρ - c_p ‖f(·,0)‖.
    pub radius_margin: f64,
    /// 1/c_p - ‖f(·,0)‖/ρ - ‖L_ρ‖.
    pub lipschitz_margin: f64,
    /// c_p ‖L_ρ‖, the contraction constant of the proof.
    pub contraction_bound: f64,
}

impl EvolutionHypotheses {
    fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.radius_margin > 0.0) {
            out.push(format!(
                "ρ > c_p‖f(·,0)‖_BS^p fails: ρ = {}, c_p‖f(·,0)‖ = {} (margin {:.6e})",
                self.rho,
                self.c_p * self.zero_bsp,
                self.radius_margin
            ));
        }
        if self.lipschitz_margin < 0.0 {
            out.push(format!(
                "‖L_ρ‖_BS^p ≤ 1/c_p − ‖f(·,0)‖/ρ fails: {} > {} (margin {:.6e})",
                self.lipschitz_bsp,
                1.0 / self.c_p - self.zero_bsp / self.rho,
                self.lipschitz_margin
            ));
        }
        out
    }
}

/// Output of [`solve_semilinear_evolution`].
#[derive(Debug, Clone)]
pub struct EvolutionSolution {
    pub solution: GridSignal,
    pub extended: GridSignal,
    pub report: IterationReport,
    pub hypotheses: EvolutionHypotheses,
    pub tail: ExpTail,
    /// Largest ‖u_n‖_∞ over all iterates.
    pub max_iterate_norm: f64,
}

/// Relative slack of the ball check.
const BALL_SLACK: f64 = 1e-9;

/// Picard iteration of u ↦ ∫ G f(·, u) from zero inside the ball of radius ρ.
pub fn solve_semilinear_evolution(
    f: &NonlinearitySpec,
    spec: &DichotomySpec,
    geom: &Geometry,
    rho: f64,
    p: StepanovExponent,
    config: &SolverConfig,
) -> Result<EvolutionSolution> {
    config.validate()?;
    spec.validate()?;
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::arg(format!("ball radius must be positive, got {rho}")));
    }
    let m = spec.modes();
    if geom.dim() != m {
        return Err(Error::arg(format!("the family has {m} modes but the state space has dimension {}", geom.dim())));
    }
    let (t0, t1) = (config.grid.t0, config.grid.t1);
    let probe = Window::new(t0 - 100.0, t1 + 100.0)?;
    let step = cell_step(probe);
    let l_rho = f.ball_lipschitz_signal(geom, rho)?.ok_or_else(|| {
        Error::arg(format!(
            "{} has no Lipschitz bound on balls in this state space",
            f.tag()
        ))
    })?;
    let zero_bsp = bsp_norm(&f.zero_response(geom), p, probe, step)?.value;
    let lipschitz_bsp = bsp_norm(&l_rho, p, probe, step)?.value;
    let c_p = theorem_constants(spec.n, spec.delta, p)?;
    let hypotheses = EvolutionHypotheses {
        p: p.p(),
        n: spec.n,
        delta: spec.delta,
        c_p,
        rho,
        zero_bsp,
        lipschitz_bsp,
        radius_margin: rho - c_p * zero_bsp,
        lipschitz_margin: 1.0 / c_p - zero_bsp / rho - lipschitz_bsp,
        contraction_bound: c_p * lipschitz_bsp,
    };
    let failures = hypotheses.failures();
    if !failures.is_empty() {
        return Err(Error::Refused {
            reason: failures.join("; "),
            margin: hypotheses.radius_margin.min(hypotheses.lipschitz_margin),
        });
    }
    f.validate(geom, (probe.start, probe.end))?;

    // Inside the ball ‖f(·,u)‖_{BS^p} ≤ ‖f(·,0)‖ + ρ‖L_ρ‖, which bounds the BS¹ norm.
    let tail = resolve_horizon(spec, config, zero_bsp + rho * lipschitz_bsp)?;
    let lay = layout(config, tail.t_trunc, spec.has_unstable());
    let h = config.grid.h;
    let end = lay.start + (lay.nodes - 1) as f64 * h;
    let family = spec.family(lay.start, end)?;
    let op = EvolutionOperator::new(&family, lay.start, h, lay.nodes, config.quadrature_order)?;
    let times = op.times();
    let tab = f.tabulate(geom, &times)?;

    let node_norms = |u: &[f64]| -> f64 {
        let mut ws = geom.workspace();
        u.chunks_exact(m).fold(0.0, |acc, x| acc.max(geom.norm(x, &mut ws)))
    };
    let map = |u: &Vec<f64>| -> Result<Vec<f64>> {
        let mut fv = vec![0.0; u.len()];
        let mut ws = geom.workspace();
        for (i, (o, x)) in fv.chunks_exact_mut(m).zip(u.chunks_exact(m)).enumerate() {
            f.apply_tabulated(&tab, i, geom, x, o, &mut ws)?;
        }
        Ok(op.apply(&op.to_quadrature(&fv)))
    };
    let distance = |a: &Vec<f64>, b: &Vec<f64>| -> f64 {
        let mut ws = geom.workspace();
        a.chunks_exact(m)
            .zip(b.chunks_exact(m))
            .fold(0.0, |acc, (x, y)| acc.max(geom.distance(x, y, &mut ws)))
    };
    let mut max_iterate_norm: f64 = 0.0;
    let (u, report) = picard_iterate_observed(
        map,
        vec![0.0; lay.nodes * m],
        distance,
        config.tolerance,
        config.max_iterations,
        |n, u| {
            let norm = node_norms(u);
            max_iterate_norm = max_iterate_norm.max(norm);
            if norm > rho * (1.0 + BALL_SLACK) {
                return Err(Error::Invariant(format!("iterate {n} left the ball: ‖u‖ = {norm} > ρ = {rho}")));
            }
            Ok(())
        },
    )?;
    let steps = config.grid.steps();
    Ok(EvolutionSolution {
        solution: GridSignal::new(t0, h, m, u[lay.history * m..(lay.history + steps + 1) * m].to_vec())?,
        extended: GridSignal::new(lay.start, h, m, u)?,
        report,
        hypotheses,
        tail,
        max_iterate_norm,
    })
}

/// Inputs of the reaction-diffusion scenario
/// v_t = Δv - a(t)v + b(t)v² + C(t, x) on (0, π), Dirichlet boundary.
#[derive(Debug, Clone)]
pub struct LotkaVolterraParams {
    pub a: Signal,
    pub b: Signal,
    pub c: Vec<Forcing>,
    pub modes: usize,
    pub rho: f64,
    /// Dichotomy exponent; defaults to min(a₀ + λ₁ - 10⁻⁶, (ω² - 1)/(2ω)).
    pub delta: Option<f64>,
    /// Spatial output points; defaults to 65 equispaced points on [0, π].
    pub xs: Option<Vec<f64>>,
}

/// The scenario's own hypothesis |b|_{BS¹} ≤ (e^δ - 1)/(2e^δ) - ‖C‖_{BS¹}/ρ
/// together with the dichotomy it rests on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LotkaVolterraBound {
    pub a_inf: f64,
    pub omega: f64,
    pub n: f64,
    pub delta: f64,
    pub b_bs1: f64,
    pub c_bs1: f64,
    pub rho: f64,
    pub b_bound: f64,
    pub b_margin: f64,
    /// sup |v(t, x)| over the output field.
    pub field_sup: f64,
    pub within_ball: bool,
}

/// Output of [`lotka_volterra_run`].
#[derive(Debug, Clone)]
pub struct LotkaVolterraRun {
    pub field: Field,
    pub solve: EvolutionSolution,
    pub bound: LotkaVolterraBound,
}

/// Solves the spectral truncation with rates k² + a(t) in the sup norm.
pub fn lotka_volterra_run(params: &LotkaVolterraParams, config: &SolverConfig) -> Result<LotkaVolterraRun> {
    config.validate()?;
    let (t0, t1) = (config.grid.t0, config.grid.t1);
    let probe = Window::new(t0 - 100.0, t1 + 100.0)?;
    let samples = ((probe.length() + 1.0) / 0.01).ceil() as usize;
    let mut a_inf = f64::INFINITY;
    for i in 0..=samples {
        a_inf = a_inf.min(params.a.value(probe.start + i as f64 * 0.01)?);
    }
    if !(a_inf > 0.0) {
        return Err(Error::arg(format!("a must be bounded below by a positive a₀, found inf a = {a_inf}")));
    }
    let omega = a_inf + 1.0;
    if omega <= 1.0 {
        return Err(Error::Refused {
            reason: format!("ω = a₀ + λ₁ = {omega} does not exceed 1"),
            margin: omega - 1.0,
        });
    }
    let delta = params
        .delta
        .unwrap_or_else(|| (a_inf + 1.0 - 1e-6).min((omega * omega - 1.0) / (2.0 * omega)));
    let spectrum: Vec<f64> = (1..=params.modes).map(|k| (k * k) as f64).collect();
    let spec = DichotomySpec::scalar_shifted(spectrum, params.a.clone(), 1.0, delta)?;
    let geom = Geometry::modal(params.modes, SpaceNorm::Sup)?;
    let f = NonlinearitySpec::Quadratic {
        b: params.b.clone(),
        forcing: params.c.clone(),
    };
    let step = cell_step(probe);
    let one = StepanovExponent::new(1.0)?;
    let b_bs1 = bsp_norm(&params.b, one, probe, step)?.value;
    let c_only = NonlinearitySpec::Affine {
        a: Signal::Constant(0.0),
        forcing: params.c.clone(),
    };
    let c_bs1 = bsp_norm(&c_only.zero_response(&geom), one, probe, step)?.value;
    let b_bound = -(-delta).exp_m1() / 2.0 - c_bs1 / params.rho;
    let b_margin = b_bound - b_bs1;
    if b_margin < 0.0 {
        return Err(Error::Refused {
            reason: format!(
                "|b|_BS¹ = {b_bs1} exceeds (e^δ−1)/(2e^δ) − ‖C‖_BS¹/ρ = {b_bound} (δ = {delta})"
            ),
            margin: b_margin,
        });
    }
    let solve = solve_semilinear_evolution(&f, &spec, &geom, params.rho, one, config)?;
    let xs = params.xs.clone().unwrap_or_else(|| Field::default_points(65));
    let field = Field::from_grid(&geom, &solve.solution, &xs);
    let field_sup = field.sup_abs();
    Ok(LotkaVolterraRun {
        bound: LotkaVolterraBound {
            a_inf,
            omega,
            n: 1.0,
            delta,
            b_bs1,
            c_bs1,
            rho: params.rho,
            b_bound,
            b_margin,
            field_sup,
            within_ball: field_sup <= params.rho,
        },
        field,
        solve,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixedpoint::TimeGrid;
    use std::f64::consts::{E, PI};

    fn one() -> StepanovExponent {
        StepanovExponent::new(1.0).unwrap()
    }

    #[test]
    fn constants_match_the_formulas() {
        let c1 = theorem_constants(1.0, 1.0, one()).unwrap();
        assert!((c1 - 2.0 * E / (E - 1.0)).abs() < 1e-12);
        let c2 = theorem_constants(1.0, 1.0, StepanovExponent::new(2.0).unwrap()).unwrap();
        let e = 0.5f64.exp();
        assert!((c2 - 2.0 * e / (e - 1.0)).abs() < 1e-12);
        let p3 = StepanovExponent::new(3.0).unwrap();
        assert!((theorem_constants(2.0, 0.7, p3).unwrap() - 2.0 * theorem_constants(1.0, 0.7, p3).unwrap()).abs() < 1e-12);
        assert!(theorem_constants(0.0, 1.0, one()).is_err());
    }

    #[test]
    fn propagator_examples() {
        let auto = DichotomySpec::autonomous(vec![1.0], 1.0, 1.0).unwrap();
        assert!((evolution_propagator(&auto, 0, 1.0, 0.0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(evolution_propagator(&auto, 0, 3.0, 3.0).unwrap(), 1.0);
        assert!(evolution_propagator(&auto, 0, 0.0, 1.0).is_err());
        let shifted = DichotomySpec::scalar_shifted(vec![1.0], Signal::Constant(1.0).plus(Signal::sine(0.5, 1.0)), 1.0, 1.0).unwrap();
        let u = evolution_propagator(&shifted, 0, 2.0 * PI, 0.0).unwrap();
        assert!((u / (-4.0 * PI).exp() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn cubic_stencils_reproduce_cubics() {
        let nodes = 10;
        let f = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x - 0.1 * x * x * x;
        for n in 0..nodes - 1 {
            for theta in [0.1, 0.5, 0.9] {
                let (j0, w) = cubic_stencil(n, theta, nodes);
                let v: f64 = (0..4).map(|i| w[i] * f((j0 + i) as f64)).sum();
                assert!((v - f(n as f64 + theta)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn two_sided_green_on_a_mixed_split() {
        let spec = DichotomySpec::autonomous(vec![2.0, -1.5], 1.0, 1.5).unwrap();
        let mut c = SolverConfig::new(TimeGrid::new(0.0, 5.0, 0.05).unwrap());
        c.tolerance = 1e-8;
        let out = green_apply(&Signal::Constant(1.0), &spec, &c).unwrap();
        for i in 0..out.values.len() {
            let row = out.values.sample(i);
            assert!((row[0] - 0.5).abs() < 1e-8);
            assert!((row[1] + 1.0 / 1.5).abs() < 1e-8);
        }
        let fam = spec.family(-2.0, 2.0).unwrap();
        let grid: Vec<f64> = (0..9).map(|i| -2.0 + 0.5 * i as f64).collect();
        assert!(fam.check_green_bound(&grid).unwrap().passed);
    }

    #[test]
    fn scalar_quadratic_root() {
        let (lambda, a0, c0, beta) = (1.0, 1.0, 0.1, 0.2);
        let spec = DichotomySpec::scalar_shifted(vec![lambda], Signal::Constant(a0), 1.0, 1.9).unwrap();
        let f = NonlinearitySpec::Quadratic {
            b: Signal::Constant(beta),
            forcing: vec![Forcing::scalar(Signal::Constant(c0))],
        };
        let mut c = SolverConfig::new(TimeGrid::new(0.0, 5.0, 0.1).unwrap());
        c.tolerance = 1e-11;
        let out = solve_semilinear_evolution(&f, &spec, &Geometry::Scalar, 0.4, one(), &c).unwrap();
        let d = lambda + a0;
        let root = (d - (d * d - 4.0 * beta * c0).sqrt()) / (2.0 * beta);
        assert!(out.report.converged);
        assert!(out.max_iterate_norm <= 0.4);
        for v in out.solution.values() {
            assert!((v - root).abs() < 1e-8, "{v} vs {root}");
        }
    }

    #[test]
    fn violated_hypotheses_are_refused() {
        let spec = DichotomySpec::scalar_shifted(vec![1.0], Signal::Constant(1.0), 1.0, 1.9).unwrap();
        let f = NonlinearitySpec::Quadratic {
            b: Signal::Constant(2.0),
            forcing: vec![Forcing::scalar(Signal::Constant(0.1))],
        };
        let c = SolverConfig::new(TimeGrid::new(0.0, 1.0, 0.1).unwrap());
        let err = solve_semilinear_evolution(&f, &spec, &Geometry::Scalar, 0.4, one(), &c).unwrap_err();
        assert!(err.is_refusal(), "{err}");
    }
}
