//! Stepanov norms, Bochner slices, translation defects and the related
//! almost-periodicity diagnostics.
//!
//! Every supremum over ℝ is approximated by a maximum over a finite window of
//! cell origins; reports always carry the window and grid they were taken on.

mod signal;

use std::collections::VecDeque;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{ergodic_curve, MeasureDensity};
use crate::nonlinearity::NonlinearitySpec;
use crate::quadrature::gl8;

pub use signal::{bump, CustomSignal, GridSignal, Harmonic, Signal, PSI1_DENOMINATOR_FLOOR};

/// Stepanov exponent p ∈ [1, ∞) with its conjugate q (q = ∞ at p = 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct StepanovExponent {
    p: f64,
}

impl StepanovExponent {
    pub fn new(p: f64) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::arg(format!("Stepanov exponent must lie in [1, ∞), got {p}")));
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Conjugate exponent; `None` stands for q = ∞.
    pub fn q(&self) -> Option<f64> {
        if self.p == 1.0 {
            None
        } else {
            Some(self.p / (self.p - 1.0))
        }
    }

    pub fn q_or_infinity(&self) -> f64 {
        self.q().unwrap_or(f64::INFINITY)
    }
}

impl TryFrom<f64> for StepanovExponent {
    type Error = Error;
    fn try_from(p: f64) -> Result<Self> {
        Self::new(p)
    }
}

impl From<StepanovExponent> for f64 {
    fn from(e: StepanovExponent) -> f64 {
        e.p
    }
}

impl fmt::Display for StepanovExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.p)
    }
}

/// A window `[start, end]` of cell origins standing in for ℝ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub start: f64,
    pub end: f64,
}

impl Window {
    /// A window of length at least one.
    pub fn new(start: f64, end: f64) -> Result<Self> {
        if !(start.is_finite() && end.is_finite()) {
            return Err(Error::arg("window endpoints must be finite"));
        }
        if end - start < 1.0 {
            return Err(Error::arg(format!("window [{start}, {end}] is shorter than one")));
        }
        Ok(Self { start, end })
    }

    pub fn length(&self) -> f64 {
        self.end - self.start
    }

    /// Uniform grid with spacing at most `step`, both ends included.
    fn grid(&self, step: f64) -> Vec<f64> {
        let n = ((self.length() / step).ceil() as usize).max(1);
        let h = self.length() / n as f64;
        (0..=n).map(|i| self.start + i as f64 * h).collect()
    }
}

/// Default spacing of cell origins in window maxima.
pub const DEFAULT_CELL_STEP: f64 = 1.0 / 32.0;

/// Number of equal panels per unit cell; each carries an 8-point rule, 64 nodes in all.
const CELL_PANELS: usize = 8;

fn lp_power(v: f64, p: f64) -> f64 {
    let a = v.abs();
    if p == 1.0 {
        a
    } else if p == 2.0 {
        a * a
    } else {
        a.powf(p)
    }
}

/// Illinois regula falsi for the sign change of `g` in `[lo, hi]`, with a
/// bisection step whenever the secant point lands outside the bracket.
fn bracket_root<G: Fn(f64) -> Result<f64>>(g: &G, mut lo: f64, mut hi: f64, mut glo: f64) -> Result<f64> {
    let mut ghi = g(hi)?;
    if ghi == 0.0 {
        return Ok(hi);
    }
    let mut side = 0i8;
    for _ in 0..100 {
        if hi - lo <= 1e-14 * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        let mut x = (lo * ghi - hi * glo) / (ghi - glo);
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        let gx = g(x)?;
        if gx == 0.0 {
            return Ok(x);
        }
        if (gx > 0.0) == (glo > 0.0) {
            lo = x;
            glo = gx;
            if side == -1 {
                ghi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            ghi = gx;
            if side == 1 {
                glo *= 0.5;
            }
            side = 1;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// ∫_a^b |g(s)|^p ds by composite 8-point Gauss–Legendre on eight equal
/// panels, further split at `breaks` and, for signed integrands with p not
/// an even integer, at the sign changes of `g`.
pub(crate) fn lp_integral<G>(g: &G, a: f64, b: f64, breaks: &[f64], p: f64, signed: bool) -> Result<f64>
where
    G: Fn(f64) -> Result<f64>,
{
    let smooth_power = p.fract() == 0.0 && (p as u64) % 2 == 0;
    let detect = signed && !smooth_power;
    let mut edges: Vec<f64> = (0..=CELL_PANELS)
        .map(|k| a + (b - a) * k as f64 / CELL_PANELS as f64)
        .collect();
    edges.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    edges.sort_by(f64::total_cmp);
    edges.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * (1.0 + y.abs()));

    let rule = gl8();
    let mut total = 0.0;
    let mut pieces = Vec::with_capacity(4);
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        pieces.clear();
        if detect {
            const PROBES: usize = 4;
            let mut prev_s = lo;
            let mut prev_v = g(lo)?;
            let mut start = lo;
            for j in 1..=PROBES {
                let s = lo + (hi - lo) * j as f64 / PROBES as f64;
                let v = g(s)?;
                if v == 0.0 && s < hi {
                    // A probe sitting on a zero is itself the split point.
                    pieces.push((start, s));
                    start = s;
                } else if prev_v != 0.0 && v != 0.0 && (prev_v > 0.0) != (v > 0.0) {
                    let root = bracket_root(g, prev_s, s, prev_v)?;
                    pieces.push((start, root));
                    start = root;
                }
                prev_s = s;
                prev_v = v;
            }
            pieces.push((start, hi));
        } else {
            pieces.push((lo, hi));
        }
        for &(u, v) in &pieces {
            for (x, wt) in rule.mapped(u, v) {
                total += wt * lp_power(g(x)?, p);
            }
        }
    }
    Ok(total)
}

fn scalar_or_norm(signal: &Signal) -> impl Fn(f64) -> Result<f64> + '_ {
    let scalar = signal.is_scalar();
    move |s| if scalar { signal.value(s) } else { signal.norm_at(s) }
}

/// (∫_t^{t+1} ‖f(s)‖^p ds)^{1/p}.
pub fn cell_norm(signal: &Signal, t: f64, p: StepanovExponent) -> Result<f64> {
    let g = scalar_or_norm(signal);
    let kinks = signal.kinks(t, t + 1.0);
    let v = lp_integral(&g, t, t + 1.0, &kinks, p.p(), signal.is_scalar())?;
    Ok(v.powf(1.0 / p.p()))
}

/// (∫_t^{t+1} ‖f(s+τ) − f(s)‖^p ds)^{1/p}.
pub fn cell_translation_norm(signal: &Signal, tau: f64, t: f64, p: StepanovExponent) -> Result<f64> {
    let mut kinks = signal.kinks(t, t + 1.0);
    kinks.extend(signal.kinks(t + tau, t + 1.0 + tau).into_iter().map(|k| k - tau));
    let v = if signal.is_scalar() {
        let g = |s: f64| Ok(signal.value(s + tau)? - signal.value(s)?);
        lp_integral(&g, t, t + 1.0, &kinks, p.p(), true)?
    } else {
        let d = signal.dim();
        let g = |s: f64| {
            let mut a = vec![0.0; d];
            let mut b = vec![0.0; d];
            signal.eval_into(s + tau, &mut a)?;
            signal.eval_into(s, &mut b)?;
            Ok(a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
        };
        lp_integral(&g, t, t + 1.0, &kinks, p.p(), false)?
    };
    Ok(v.powf(1.0 / p.p()))
}

/// Samples of s ↦ f(t + s) on the uniform `m`-point grid of [0, 1], one row
/// of length [`Signal::dim`] per sample.
pub fn bochner_slice(signal: &Signal, t: f64, m: usize) -> Result<Vec<Vec<f64>>> {
    if m < 2 {
        return Err(Error::arg(format!("a Bochner slice needs at least 2 samples, got {m}")));
    }
    signal.check_domain(t, t + 1.0)?;
    (0..m)
        .map(|j| {
            let mut row = vec![0.0; signal.dim()];
            signal.eval_into(t + j as f64 / (m - 1) as f64, &mut row)?;
            Ok(row)
        })
        .collect()
}

/// A window maximum of cell quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowMax {
    pub value: f64,
    /// Cell origin attaining the maximum.
    pub argmax: f64,
    pub window: Window,
    pub step: f64,
}

fn window_max<F>(window: Window, step: f64, cell: F) -> Result<WindowMax>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    if !(step > 0.0) {
        return Err(Error::arg(format!("cell step must be positive, got {step}")));
    }
    let grid = window.grid(step);
    let values: Vec<f64> = grid.par_iter().map(|&t| cell(t)).collect::<Result<_>>()?;
    let (i, &value) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("window grid is never empty");
    Ok(WindowMax {
        value,
        argmax: grid[i],
        window,
        step: window.length() / (grid.len() - 1) as f64,
    })
}

/// Window approximation of ‖f‖_{BS^p} = sup_t (∫_t^{t+1} ‖f‖^p)^{1/p}.
pub fn bsp_norm(signal: &Signal, p: StepanovExponent, window: Window, step: f64) -> Result<WindowMax> {
    signal.check_domain(window.start, window.end + 1.0)?;
    window_max(window, step, |t| cell_norm(signal, t, p))
}

/// Window approximation of sup_t (∫_t^{t+1} ‖f(s+τ) − f(s)‖^p ds)^{1/p}.
pub fn translation_defect(
    signal: &Signal,
    tau: f64,
    p: StepanovExponent,
    window: Window,
    step: f64,
) -> Result<WindowMax> {
    signal.check_domain(window.start.min(window.start + tau), (window.end + 1.0).max(window.end + 1.0 + tau))?;
    window_max(window, step, |t| cell_translation_norm(signal, tau, t, p))
}

/// Grid parameters of a translation-number scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    /// Spacing of candidate τ; rounded so that a unit cell holds a whole number of steps.
    pub tau_step: f64,
    /// Spacing of cell origins in the window.
    pub cell_step: f64,
    /// Clusters of hits refined by golden-section search on the quadrature defect.
    pub max_refined: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            tau_step: 0.01,
            cell_step: 0.05,
            max_refined: 64,
        }
    }
}

/// A maximal run of consecutive grid hits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HitCluster {
    pub first: f64,
    pub last: f64,
    /// Grid τ with the smallest sampled defect.
    pub best_tau: f64,
    pub best_scan_defect: f64,
    /// Golden-section refinement of `best_tau` against the quadrature defect.
    pub refined: Option<RefinedTau>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RefinedTau {
    pub tau: f64,
    pub defect: f64,
}

/// Result of [`find_translation_numbers`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TranslationScan {
    pub epsilon: f64,
    pub p: f64,
    pub search_length: f64,
    pub window: Window,
    pub tau_step: f64,
    /// Every grid τ whose sampled defect is at most ε.
    pub hits: Vec<f64>,
    pub clusters: Vec<HitCluster>,
    /// Largest distance between consecutive hits, the empirical inclusion length.
    pub largest_gap: Option<f64>,
}

impl TranslationScan {
    pub fn is_empty(&self) -> bool {
        self.hits.is_empty()
    }
}

/// Scans τ ∈ [0, L] for ε-translation numbers.
///
/// Defects on the τ grid come from trapezoidal sums over samples of f spaced
/// like the τ grid; clusters of hits are then refined with the quadrature
/// defect. An empty result says nothing about almost periodicity.
pub fn find_translation_numbers(
    signal: &Signal,
    epsilon: f64,
    p: StepanovExponent,
    search_length: f64,
    window: Window,
    opts: ScanOptions,
) -> Result<TranslationScan> {
    if !(epsilon > 0.0) {
        return Err(Error::arg(format!("ε must be positive, got {epsilon}")));
    }
    if !(search_length >= 1.0 && search_length.is_finite()) {
        return Err(Error::arg(format!("search length must be at least 1, got {search_length}")));
    }
    if !(opts.tau_step > 0.0 && opts.tau_step <= 0.5) || !(opts.cell_step > 0.0) {
        return Err(Error::arg("scan steps must be positive and τ step at most 1/2"));
    }
    let per_unit = (1.0 / opts.tau_step).round() as usize;
    let ds = 1.0 / per_unit as f64;
    let stride = ((opts.cell_step / ds).round() as usize).max(1);
    let cells = (window.length() / ds).round() as usize / stride;
    let span = cells * stride + per_unit;
    let shifts = (search_length / ds).floor() as usize;
    let total = span + shifts + 1;
    signal.check_domain(window.start, window.start + (total - 1) as f64 * ds)?;

    let d = signal.dim();
    let mut samples = vec![0.0; total * d];
    samples
        .par_chunks_mut(d)
        .enumerate()
        .try_for_each(|(j, row)| signal.eval_into(window.start + j as f64 * ds, row))?;

    let pp = p.p();
    let defects: Vec<f64> = (0..=shifts)
        .into_par_iter()
        .map_init(
            || vec![0.0; span + 1],
            |prefix, k| {
                // prefix[j] = trapezoidal ∫ from sample 0 to sample j
                let mut prev = 0.0;
                for j in 0..=span {
                    let a = &samples[(j + k) * d..(j + k + 1) * d];
                    let b = &samples[j * d..(j + 1) * d];
                    let diff = if d == 1 {
                        a[0] - b[0]
                    } else {
                        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
                    };
                    let cur = lp_power(diff, pp);
                    prefix[j] = if j == 0 { 0.0 } else { prefix[j - 1] + 0.5 * (prev + cur) * ds };
                    prev = cur;
                }
                (0..=cells)
                    .map(|i| {
                        let s = i * stride;
                        (prefix[s + per_unit] - prefix[s]).max(0.0)
                    })
                    .fold(0.0f64, f64::max)
                    .powf(1.0 / pp)
            },
        )
        .collect();

    let hits_idx: Vec<usize> = (0..=shifts).filter(|&k| defects[k] <= epsilon).collect();
    let hits: Vec<f64> = hits_idx.iter().map(|&k| k as f64 * ds).collect();
    let largest_gap = hits.windows(2).map(|w| w[1] - w[0]).reduce(f64::max);

    let mut runs: Vec<(usize, usize)> = Vec::new();
    for &k in &hits_idx {
        match runs.last_mut() {
            Some((_, last)) if *last + 1 == k => *last = k,
            _ => runs.push((k, k)),
        }
    }
    let clusters = runs
        .iter()
        .enumerate()
        .map(|(n, &(first, last))| {
            let best = (first..=last)
                .min_by(|&a, &b| defects[a].total_cmp(&defects[b]))
                .unwrap_or(first);
            let refined = if n < opts.max_refined {
                let lo = (best as f64 - 1.0).max(0.0) * ds;
                let hi = ((best + 1) as f64 * ds).min(shifts as f64 * ds);
                Some(refine_tau(signal, p, window, opts.cell_step, lo, hi)?)
            } else {
                None
            };
            Ok(HitCluster {
                first: first as f64 * ds,
                last: last as f64 * ds,
                best_tau: best as f64 * ds,
                best_scan_defect: defects[best],
                refined,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(TranslationScan {
        epsilon,
        p: pp,
        search_length,
        window,
        tau_step: ds,
        hits,
        clusters,
        largest_gap,
    })
}

/// Golden-section descent of the quadrature defect over `[lo, hi]`.
fn refine_tau(signal: &Signal, p: StepanovExponent, window: Window, step: f64, lo: f64, hi: f64) -> Result<RefinedTau> {
    let defect = |tau: f64| translation_defect(signal, tau, p, window, step).map(|w| w.value);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (defect(c)?, defect(d)?);
    for _ in 0..30 {
        if b - a < 1e-7 {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = defect(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = defect(d)?;
        }
    }
    // The interval ends are candidates too: the minimum may sit on the boundary.
    let mut best = if fc <= fd { (c, fc) } else { (d, fd) };
    for x in [lo, hi] {
        let fx = defect(x)?;
        if fx < best.1 {
            best = (x, fx);
        }
    }
    Ok(RefinedTau {
        tau: best.0,
        defect: best.1,
    })
}

/// One row of [`uniform_continuity_modulus`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModulusEntry {
    pub delta: f64,
    pub modulus: f64,
}

/// Upper limit on the number of samples a modulus scan may allocate.
const MAX_MODULUS_SAMPLES: usize = 50_000_000;

/// For each δ, the largest ‖f(t) − f(t′)‖ over sample pairs in the window with
/// |t − t′| ≤ δ. Samples are spaced `step`, by default a quarter of the smallest δ.
pub fn uniform_continuity_modulus(
    signal: &Signal,
    window: (f64, f64),
    deltas: &[f64],
    step: Option<f64>,
) -> Result<Vec<ModulusEntry>> {
    let (a, b) = window;
    if !(b > a) || !a.is_finite() || !b.is_finite() {
        return Err(Error::arg(format!("empty window [{a}, {b}]")));
    }
    if deltas.iter().any(|&d| !(d > 0.0)) {
        return Err(Error::arg("every δ must be positive"));
    }
    let Some(min_delta) = deltas.iter().copied().reduce(f64::min) else {
        return Ok(Vec::new());
    };
    let step = step.unwrap_or(min_delta / 4.0);
    if !(step > 0.0) {
        return Err(Error::arg("sampling step must be positive"));
    }
    let n = ((b - a) / step).ceil() as usize + 1;
    if n > MAX_MODULUS_SAMPLES {
        return Err(Error::arg(format!("{n} samples exceed the modulus scan limit")));
    }
    signal.check_domain(a, b)?;
    let h = (b - a) / (n - 1) as f64;
    let d = signal.dim();
    let mut samples = vec![0.0; n * d];
    samples
        .par_chunks_mut(d)
        .enumerate()
        .try_for_each(|(j, row)| signal.eval_into(a + j as f64 * h, row))?;

    deltas
        .par_iter()
        .map(|&delta| {
            let k = ((delta / h) * (1.0 + 1e-12)).floor() as usize;
            let modulus = if k == 0 {
                0.0
            } else if d == 1 {
                sliding_range(&samples, k + 1)
            } else {
                let mut best = 0.0f64;
                for i in 0..n {
                    for j in (i + 1)..n.min(i + k + 1) {
                        let dist = samples[i * d..(i + 1) * d]
                            .iter()
                            .zip(&samples[j * d..(j + 1) * d])
                            .map(|(x, y)| (x - y) * (x - y))
                            .sum::<f64>()
                            .sqrt();
                        best = best.max(dist);
                    }
                }
                best
            };
            Ok(ModulusEntry { delta, modulus })
        })
        .collect()
}

/// max over windows of `len` consecutive samples of (max − min).
fn sliding_range(xs: &[f64], len: usize) -> f64 {
    let mut hi: VecDeque<usize> = VecDeque::new();
    let mut lo: VecDeque<usize> = VecDeque::new();
    let mut best = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        while hi.back().is_some_and(|&j| xs[j] <= x) {
            hi.pop_back();
        }
        hi.push_back(i);
        while lo.back().is_some_and(|&j| xs[j] >= x) {
            lo.pop_back();
        }
        lo.push_back(i);
        if i >= len {
            let gone = i - len;
            if hi.front() == Some(&gone) {
                hi.pop_front();
            }
            if lo.front() == Some(&gone) {
                lo.pop_front();
            }
        }
        best = best.max(xs[hi[0]] - xs[lo[0]]);
    }
    best
}

/// Ergodic means of s ↦ f(s, x(s)) − f(s, x₁(s)) along an r-ladder, for scalar
/// signals and a scalar nonlinearity.
pub fn composition_ergodic_check(
    f: &NonlinearitySpec,
    x: &Signal,
    x1: &Signal,
    density: &MeasureDensity,
    p: StepanovExponent,
    ladder: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if !(x.is_scalar() && x1.is_scalar()) {
        return Err(Error::arg("composition check needs scalar signals"));
    }
    let reach = ladder.iter().copied().fold(0.0f64, f64::max) + 1.0;
    let mut kinks = x.kinks(-reach, reach);
    kinks.extend(x1.kinks(-reach, reach));
    let (f, x, x1) = (f.clone(), x.clone(), x1.clone());
    let remainder = Signal::custom_with_kinks(
        "composition remainder",
        move |s| Ok(f.eval_scalar(s, x.value(s)?)? - f.eval_scalar(s, x1.value(s)?)?),
        kinks,
    );
    ergodic_curve(&remainder, density, p, ladder)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn p(v: f64) -> StepanovExponent {
        StepanovExponent::new(v).unwrap()
    }

    #[test]
    fn exponent_and_conjugate() {
        assert_eq!(p(1.0).q(), None);
        assert_eq!(p(2.0).q(), Some(2.0));
        assert!((p(3.0).q().unwrap() - 1.5).abs() < 1e-15);
        assert!(StepanovExponent::new(0.5).is_err());
        assert!(StepanovExponent::new(f64::INFINITY).is_err());
    }

    #[test]
    fn windows_are_at_least_one_long() {
        assert!(Window::new(0.0, 0.5).is_err());
        assert_eq!(Window::new(0.0, 1.0).unwrap().grid(0.5), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn bochner_slices() {
        let c = bochner_slice(&Signal::Constant(3.0), 7.0, 5).unwrap();
        assert_eq!(c, vec![vec![3.0]; 5]);
        let s = bochner_slice(&Signal::sine(1.0, 1.0), 0.0, 3).unwrap();
        assert_eq!(s, vec![vec![0.0], vec![0.5f64.sin()], vec![1f64.sin()]]);
        assert!(bochner_slice(&Signal::Constant(1.0), 0.0, 1).is_err());
        let g = Signal::Grid(GridSignal::scalar(0.0, 0.1, vec![0.0; 11]).unwrap());
        assert!(matches!(bochner_slice(&g, 0.5, 4), Err(Error::Domain { .. })));
    }

    #[test]
    fn bochner_shift_identity() {
        // φ(t + τ, s − τ) = φ(t, s) with τ = 0.25: on the 5-point grid the
        // slice at t + τ is the slice at t moved one sample left.
        let f = Signal::sine(1.0, 1.0);
        let (t, tau, m) = (0.4, 0.25, 5);
        let a = bochner_slice(&f, t, m).unwrap();
        let b = bochner_slice(&f, t + tau, m).unwrap();
        for j in 1..m {
            assert!((b[j - 1][0] - a[j][0]).abs() < 1e-15);
        }
    }

    #[test]
    fn stepanov_norm_of_sine_wave() {
        let f = Signal::sine(1.0, 2.0 * PI);
        for w in [Window::new(0.0, 1.0).unwrap(), Window::new(-3.3, 5.1).unwrap(), Window::new(-3.0, 5.0).unwrap()] {
            let n = bsp_norm(&f, p(1.0), w, DEFAULT_CELL_STEP).unwrap();
            assert!((n.value - 2.0 / PI).abs() < 1e-12, "{}", n.value);
        }
        let n2 = bsp_norm(&f, p(2.0), Window::new(0.0, 1.0).unwrap(), 0.1).unwrap();
        assert!((n2.value - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn stepanov_norm_of_constants_and_arctan() {
        let n = bsp_norm(&Signal::Constant(-2.5), p(2.0), Window::new(-4.0, 4.0).unwrap(), 0.5).unwrap();
        assert!((n.value - 2.5).abs() < 1e-13);
        let n = bsp_norm(&Signal::ArctanShift, p(1.0), Window::new(-50.0, 50.0).unwrap(), 0.25).unwrap();
        assert_eq!(n.argmax, -50.0);
        assert!(n.value > PI / 2.0 && n.value < PI);
        // ∫_{-50}^{-49} (π/2 − arctan s) ds in closed form
        let anti = |s: f64| PI / 2.0 * s - (s * s.atan() - 0.5 * (1.0 + s * s).ln());
        assert!((n.value - (anti(-49.0) - anti(-50.0))).abs() < 1e-12);
    }

    #[test]
    fn sign_changes_are_split_for_odd_powers() {
        // |sin 2πs| over a cell with interior zeros, at an awkward origin.
        let f = Signal::sine(1.0, 2.0 * PI);
        let v = cell_norm(&f, 0.123, p(1.0)).unwrap();
        assert!((v - 2.0 / PI).abs() < 1e-13);
        let v = cell_norm(&f, 0.123, p(3.0)).unwrap();
        // ∫|sin 2πs|³ over a period = 4/(3π)
        assert!((v - (4.0 / (3.0 * PI)).cbrt()).abs() < 1e-12);
    }

    #[test]
    fn spike_cells_are_resolved() {
        // Only the n = 1 bump at t = 3 (unit mass) lies in [2.5, 3.5].
        let s = Signal::spike_train(4, 100.0).unwrap();
        // The bump is flat to all orders at its edges, so 64 nodes give ~1e-6.
        let v = cell_norm(&s, 2.5, p(1.0)).unwrap();
        assert!((v - 1.0).abs() < 1e-5, "{v}");
        // Around 81 the bumps of n = 1..4 overlap, masses 1, 1/4, 1/9, 1/16.
        let v = cell_norm(&s, 80.5, p(1.0)).unwrap();
        let want = 1.0 + 0.25 + 1.0 / 9.0 + 1.0 / 16.0;
        assert!((v - want).abs() < 1e-5, "{v}");
    }

    #[test]
    fn translation_defect_of_periodic_signals() {
        let f = Signal::sine(1.0, 1.0);
        let w = Window::new(-10.0, 10.0).unwrap();
        for k in 0..=3 {
            let d = translation_defect(&f, 2.0 * PI * k as f64, p(2.0), w, 0.1).unwrap();
            assert!(d.value < 1e-12, "k={k}: {}", d.value);
        }
        let d = translation_defect(&f, PI, p(2.0), w, 0.1).unwrap();
        assert!(d.value > 1.5);
    }

    #[test]
    fn sliding_range_matches_brute_force() {
        let xs: Vec<f64> = (0..200).map(|i| ((i * 37 % 101) as f64).sin()).collect();
        for len in [1, 2, 5, 17, 200] {
            let mut want = 0.0f64;
            for i in 0..xs.len() {
                for j in i..(i + len).min(xs.len()) {
                    want = want.max((xs[i] - xs[j]).abs());
                }
            }
            assert_eq!(sliding_range(&xs, len), want, "len={len}");
        }
    }

    #[test]
    fn modulus_of_sine_and_constant() {
        let m = uniform_continuity_modulus(&Signal::Constant(1.0), (0.0, 10.0), &[0.1, 1.0], None).unwrap();
        assert!(m.iter().all(|e| e.modulus == 0.0));
        let m = uniform_continuity_modulus(&Signal::sine(1.0, 1.0), (-100.0, 100.0), &[0.1], None).unwrap();
        assert!(m[0].modulus <= 0.1 && m[0].modulus > 0.099);
        assert!(uniform_continuity_modulus(&Signal::Constant(1.0), (1.0, 1.0), &[0.1], None).is_err());
    }

    #[test]
    fn constant_scan_hits_every_grid_point() {
        let s = find_translation_numbers(
            &Signal::Constant(2.0),
            0.1,
            p(1.0),
            5.0,
            Window::new(0.0, 2.0).unwrap(),
            ScanOptions {
                tau_step: 0.01,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(s.hits.len(), 501);
        assert!((s.largest_gap.unwrap() - 0.01).abs() < 1e-12);
        assert_eq!(s.clusters.len(), 1);
    }

    #[test]
    fn sine_scan_clusters_near_multiples_of_two_pi() {
        let s = find_translation_numbers(
            &Signal::sine(1.0, 1.0),
            0.05,
            p(2.0),
            20.0,
            Window::new(-10.0, 10.0).unwrap(),
            ScanOptions::default(),
        )
        .unwrap();
        assert!(s.largest_gap.unwrap() < 7.0);
        let centres: Vec<f64> = s.clusters.iter().map(|c| c.refined.unwrap().tau).collect();
        for want in [2.0 * PI, 4.0 * PI, 6.0 * PI] {
            assert!(centres.iter().any(|c| (c - want).abs() < 1e-4), "{centres:?}");
        }
        assert!(find_translation_numbers(
            &Signal::Constant(0.0),
            0.0,
            p(1.0),
            2.0,
            Window::new(0.0, 1.0).unwrap(),
            ScanOptions::default()
        )
        .is_err());
    }
}
