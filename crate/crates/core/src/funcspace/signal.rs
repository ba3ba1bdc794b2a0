//! Time signals: closed-form registry entries and uniformly sampled grids.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::path::Path;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::quadrature::{adaptive, AdaptiveOptions};

/// Smallest admissible value of `2 + cos αt + cos βt` in [`Signal::Psi1`].
pub const PSI1_DENOMINATOR_FLOOR: f64 = 1e-12;

/// One term `amplitude · sin(omega·t + phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Harmonic {
    pub amplitude: f64,
    pub omega: f64,
    pub phase: f64,
}

impl Harmonic {
    pub fn sin(amplitude: f64, omega: f64) -> Self {
        Self {
            amplitude,
            omega,
            phase: 0.0,
        }
    }

    pub fn cos(amplitude: f64, omega: f64) -> Self {
        Self {
            amplitude,
            omega,
            phase: FRAC_PI_2,
        }
    }

    fn eval(&self, t: f64) -> f64 {
        self.amplitude * (self.omega * t + self.phase).sin()
    }
}

/// Uniformly sampled vector signal with linear interpolation between samples.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSignal {
    start: f64,
    step: f64,
    dim: usize,
    /// Row-major `len × dim` samples.
    values: Vec<f64>,
}

impl GridSignal {
    pub fn new(start: f64, step: f64, dim: usize, values: Vec<f64>) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::arg(format!("grid step must be positive, got {step}")));
        }
        if !start.is_finite() {
            return Err(Error::arg("grid start must be finite"));
        }
        if dim == 0 {
            return Err(Error::arg("grid dimension must be at least 1"));
        }
        if values.len() < 2 * dim || values.len() % dim != 0 {
            return Err(Error::arg(format!(
                "grid needs at least two samples of dimension {dim}, got {} values",
                values.len()
            )));
        }
        Ok(Self {
            start,
            step,
            dim,
            values,
        })
    }

    /// Scalar grid from samples.
    pub fn scalar(start: f64, step: f64, values: Vec<f64>) -> Result<Self> {
        Self::new(start, step, 1, values)
    }

    /// Parses a two-column `t value` sample file; the time column must be uniform.
    pub fn parse_samples(text: &str) -> Result<Self> {
        let mut ts = Vec::new();
        let mut vs = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()).collect();
            if cols.len() != 2 {
                return Err(Error::config(format!("line {}: expected `t value`", no + 1)));
            }
            let mut nums = [0.0; 2];
            for (slot, s) in nums.iter_mut().zip(&cols) {
                *slot = s
                    .parse()
                    .map_err(|_| Error::config(format!("line {}: `{s}` is not a number", no + 1)))?;
            }
            ts.push(nums[0]);
            vs.push(nums[1]);
        }
        if ts.len() < 2 {
            return Err(Error::config("sample file needs at least two samples"));
        }
        let step = (ts[ts.len() - 1] - ts[0]) / (ts.len() - 1) as f64;
        for (i, &t) in ts.iter().enumerate() {
            let want = ts[0] + i as f64 * step;
            if (t - want).abs() > 1e-9 * step.abs().max(1.0) {
                return Err(Error::config(format!(
                    "sample times are not uniform: t = {t} where {want} was expected"
                )));
            }
        }
        Self::scalar(ts[0], step, vs)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
        Self::parse_samples(&text)
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn end(&self) -> f64 {
        self.start + (self.len() - 1) as f64 * self.step
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    fn eval_into(&self, t: f64, out: &mut [f64]) -> Result<()> {
        let end = self.end();
        // Allow rounding noise at the edges.
        let slack = 1e-9 * self.step;
        if !(t >= self.start - slack && t <= end + slack) {
            return Err(Error::Domain {
                t,
                start: self.start,
                end,
            });
        }
        let x = ((t - self.start) / self.step).clamp(0.0, (self.len() - 1) as f64);
        let i = (x.floor() as usize).min(self.len() - 2);
        let w = x - i as f64;
        let (a, b) = (self.sample(i), self.sample(i + 1));
        for (o, (&u, &v)) in out.iter_mut().zip(a.iter().zip(b)) {
            *o = u + w * (v - u);
        }
        Ok(())
    }
}

type CustomFn = dyn Fn(f64) -> Result<f64> + Send + Sync;

/// User-supplied scalar signal.
#[derive(Clone)]
pub struct CustomSignal {
    name: String,
    f: Arc<CustomFn>,
    kinks: Vec<f64>,
}

impl fmt::Debug for CustomSignal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomSignal").field("name", &self.name).finish()
    }
}

/// A real or vector-valued function of time.
#[derive(Debug, Clone)]
pub enum Signal {
    Constant(f64),
    /// `offset + Σ harmonics`; a single term gives the plain sine.
    QuasiPeriodic { offset: f64, terms: Vec<Harmonic> },
    /// Ψ₁(t) = sin(1/(2 + cos αt + cos βt)).
    Psi1 { alpha: f64, beta: f64 },
    /// Φ₂(t) = arctan t − π/2.
    ArctanShift,
    /// Φ₁(t) = Σ_{n ≤ depth} Σ_{i ∈ 3ⁿ(2ℤ+1), |i| ≤ radius} H(n²(t − i)).
    SpikeTrain { depth: u32, radius: f64 },
    Grid(GridSignal),
    Sum(Vec<Signal>),
    Scaled(f64, Box<Signal>),
    /// `t ↦ f(t + shift)`.
    Shifted(f64, Box<Signal>),
    Custom(CustomSignal),
}

impl Signal {
    pub fn sine(amplitude: f64, omega: f64) -> Self {
        Self::QuasiPeriodic {
            offset: 0.0,
            terms: vec![Harmonic::sin(amplitude, omega)],
        }
    }

    pub fn cosine(amplitude: f64, omega: f64) -> Self {
        Self::QuasiPeriodic {
            offset: 0.0,
            terms: vec![Harmonic::cos(amplitude, omega)],
        }
    }

    pub fn psi1(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite() && alpha != 0.0 && beta != 0.0) {
            return Err(Error::arg("Ψ₁ frequencies must be finite and nonzero"));
        }
        Ok(Self::Psi1 { alpha, beta })
    }

    pub fn spike_train(depth: u32, radius: f64) -> Result<Self> {
        if depth == 0 || depth > 12 {
            return Err(Error::arg(format!("spike-train depth must be in 1..=12, got {depth}")));
        }
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(Error::arg("spike-train radius must be finite and nonnegative"));
        }
        Ok(Self::SpikeTrain { depth, radius })
    }

    pub fn custom<F>(name: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> Result<f64> + Send + Sync + 'static,
    {
        Self::Custom(CustomSignal {
            name: name.into(),
            f: Arc::new(f),
            kinks: Vec::new(),
        })
    }

    /// Custom signal with known nonsmooth points, which the cell quadrature splits at.
    pub fn custom_with_kinks<F>(name: impl Into<String>, f: F, kinks: Vec<f64>) -> Self
    where
        F: Fn(f64) -> Result<f64> + Send + Sync + 'static,
    {
        let mut kinks = kinks;
        kinks.sort_by(f64::total_cmp);
        Self::Custom(CustomSignal {
            name: name.into(),
            f: Arc::new(f),
            kinks,
        })
    }

    pub fn shifted(self, tau: f64) -> Self {
        Self::Shifted(tau, Box::new(self))
    }

    pub fn scaled(self, c: f64) -> Self {
        Self::Scaled(c, Box::new(self))
    }

    pub fn plus(self, other: Signal) -> Self {
        match self {
            Self::Sum(mut v) => {
                v.push(other);
                Self::Sum(v)
            }
            s => Self::Sum(vec![s, other]),
        }
    }

    /// Short registry-style name.
    pub fn tag(&self) -> String {
        match self {
            Self::Constant(c) => format!("constant({c})"),
            Self::QuasiPeriodic { terms, .. } if terms.len() == 1 => "sin".into(),
            Self::QuasiPeriodic { .. } => "quasi-periodic".into(),
            Self::Psi1 { alpha, beta } => format!("psi1({alpha},{beta})"),
            Self::ArctanShift => "arctan-shift".into(),
            Self::SpikeTrain { depth, radius } => format!("spike-train({depth},{radius})"),
            Self::Grid(g) => format!("grid({} samples)", g.len()),
            Self::Sum(v) => v.iter().map(Self::tag).collect::<Vec<_>>().join("+"),
            Self::Scaled(c, s) => format!("{c}*{}", s.tag()),
            Self::Shifted(tau, s) => format!("{}(.+{tau})", s.tag()),
            Self::Custom(c) => c.name.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Grid(g) => g.dim,
            Self::Sum(v) => v.first().map_or(1, Self::dim),
            Self::Scaled(_, s) | Self::Shifted(_, s) => s.dim(),
            _ => 1,
        }
    }

    pub fn is_scalar(&self) -> bool {
        self.dim() == 1
    }

    /// Interval of definition; `None` means all of ℝ.
    pub fn domain(&self) -> Option<(f64, f64)> {
        match self {
            Self::Grid(g) => Some((g.start, g.end())),
            Self::Sum(v) => v.iter().filter_map(Self::domain).reduce(|a, b| (a.0.max(b.0), a.1.min(b.1))),
            Self::Scaled(_, s) => s.domain(),
            Self::Shifted(tau, s) => s.domain().map(|(a, b)| (a - tau, b - tau)),
            _ => None,
        }
    }

    /// Errors unless the signal is defined on `[a, b]`.
    pub fn check_domain(&self, a: f64, b: f64) -> Result<()> {
        if let Some((lo, hi)) = self.domain() {
            let slack = 1e-9 * (hi - lo).abs().max(1.0);
            if a < lo - slack {
                return Err(Error::Domain { t: a, start: lo, end: hi });
            }
            if b > hi + slack {
                return Err(Error::Domain { t: b, start: lo, end: hi });
            }
        }
        Ok(())
    }

    /// Writes f(t) into `out` (length [`Signal::dim`]).
    pub fn eval_into(&self, t: f64, out: &mut [f64]) -> Result<()> {
        debug_assert_eq!(out.len(), self.dim());
        match self {
            Self::Grid(g) => g.eval_into(t, out),
            Self::Sum(v) => {
                out.iter_mut().for_each(|o| *o = 0.0);
                let mut tmp = vec![0.0; out.len()];
                for s in v {
                    s.eval_into(t, &mut tmp)?;
                    out.iter_mut().zip(&tmp).for_each(|(o, x)| *o += x);
                }
                Ok(())
            }
            Self::Scaled(c, s) => {
                s.eval_into(t, out)?;
                out.iter_mut().for_each(|o| *o *= c);
                Ok(())
            }
            Self::Shifted(tau, s) => s.eval_into(t + tau, out),
            _ => {
                out[0] = self.value(t)?;
                Ok(())
            }
        }
    }

    /// f(t) for scalar signals.
    pub fn value(&self, t: f64) -> Result<f64> {
        Ok(match self {
            Self::Constant(c) => *c,
            Self::QuasiPeriodic { offset, terms } => offset + terms.iter().map(|h| h.eval(t)).sum::<f64>(),
            Self::Psi1 { alpha, beta } => {
                let den = 2.0 + (alpha * t).cos() + (beta * t).cos();
                if den < PSI1_DENOMINATOR_FLOOR {
                    return Err(Error::Range(format!(
                        "Ψ₁ denominator {den:e} below the floor at t = {t}"
                    )));
                }
                (1.0 / den).sin()
            }
            Self::ArctanShift => t.atan() - FRAC_PI_2,
            Self::SpikeTrain { depth, radius } => spike_train(t, *depth, *radius),
            Self::Grid(g) => {
                if g.dim != 1 {
                    return Err(Error::arg("scalar evaluation of a vector grid signal"));
                }
                let mut out = [0.0];
                g.eval_into(t, &mut out)?;
                out[0]
            }
            Self::Sum(v) => {
                let mut acc = 0.0;
                for s in v {
                    acc += s.value(t)?;
                }
                acc
            }
            Self::Scaled(c, s) => c * s.value(t)?,
            Self::Shifted(tau, s) => s.value(t + tau)?,
            Self::Custom(c) => (c.f)(t)?,
        })
    }

    /// Euclidean norm ‖f(t)‖.
    pub fn norm_at(&self, t: f64) -> Result<f64> {
        if self.is_scalar() {
            return Ok(self.value(t)?.abs());
        }
        let mut out = vec![0.0; self.dim()];
        self.eval_into(t, &mut out)?;
        Ok(out.iter().map(|x| x * x).sum::<f64>().sqrt())
    }

    /// Points in `[a, b]` where the signal is nonsmooth or has a narrow
    /// feature that quadrature must resolve.
    pub fn kinks(&self, a: f64, b: f64) -> Vec<f64> {
        let mut out = Vec::new();
        self.collect_kinks(a, b, &mut out);
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    fn collect_kinks(&self, a: f64, b: f64, out: &mut Vec<f64>) {
        match self {
            Self::SpikeTrain { depth, radius } => {
                for n in 1..=*depth {
                    let period = 3f64.powi(n as i32);
                    let half = 0.5 / (n * n) as f64;
                    // centres i = period·(2m + 1) with [i - half, i + half] meeting [a, b]
                    let m_lo = (((a - half) / period - 1.0) / 2.0).ceil() as i64;
                    let m_hi = (((b + half) / period - 1.0) / 2.0).floor() as i64;
                    for m in m_lo..=m_hi {
                        let i = period * (2 * m + 1) as f64;
                        if i.abs() > *radius {
                            continue;
                        }
                        for e in [i - half, i, i + half] {
                            if e > a && e < b {
                                out.push(e);
                            }
                        }
                    }
                }
            }
            Self::Grid(g) => {
                if g.step >= 1.0 / 64.0 {
                    let k0 = ((a - g.start) / g.step).ceil().max(0.0) as usize;
                    let mut k = k0;
                    while k < g.len() {
                        let t = g.start + k as f64 * g.step;
                        if t >= b {
                            break;
                        }
                        if t > a {
                            out.push(t);
                        }
                        k += 1;
                    }
                }
            }
            Self::Sum(v) => v.iter().for_each(|s| s.collect_kinks(a, b, out)),
            Self::Scaled(_, s) => s.collect_kinks(a, b, out),
            Self::Shifted(tau, s) => {
                let start = out.len();
                s.collect_kinks(a + tau, b + tau, out);
                out[start..].iter_mut().for_each(|k| *k -= tau);
            }
            Self::Custom(c) => out.extend(c.kinks.iter().copied().filter(|&k| k > a && k < b)),
            _ => {}
        }
    }
}

impl From<GridSignal> for Signal {
    fn from(g: GridSignal) -> Self {
        Signal::Grid(g)
    }
}

/// The standard bump b(s) = exp(1 − 1/(1 − 4s²)) on (−½, ½), with b(0) = 1.
fn raw_bump(s: f64) -> f64 {
    let u = 1.0 - 4.0 * s * s;
    if u <= 0.0 {
        0.0
    } else {
        (1.0 - 1.0 / u).exp()
    }
}

/// Coefficient B of H(s) = b(s)(1 + 4B s²), fixed by ∫H = 1.
fn bump_coefficient() -> f64 {
    static B: OnceLock<f64> = OnceLock::new();
    *B.get_or_init(|| {
        let opts = AdaptiveOptions {
            abs_tol: 1e-15,
            rel_tol: 0.0,
            max_segments: 2000,
        };
        let i0 = adaptive(raw_bump, -0.5, 0.5, &[0.0], opts).value;
        let i2 = adaptive(|s| raw_bump(s) * 4.0 * s * s, -0.5, 0.5, &[0.0], opts).value;
        (1.0 - i0) / i2
    })
}

/// Smooth nonnegative bump supported in (−½, ½) with H(0) = 1 and unit mass.
pub fn bump(s: f64) -> f64 {
    let b = raw_bump(s);
    if b == 0.0 {
        return 0.0;
    }
    b * (1.0 + bump_coefficient() * 4.0 * s * s)
}

fn spike_train(t: f64, depth: u32, radius: f64) -> f64 {
    let mut acc = 0.0;
    for n in 1..=depth {
        let period = 3f64.powi(n as i32);
        let m = ((t / period - 1.0) / 2.0).round();
        let i = period * (2.0 * m + 1.0);
        if i.abs() > radius {
            continue;
        }
        let n2 = (n * n) as f64;
        acc += bump(n2 * (t - i));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_normalisation() {
        assert_eq!(bump(0.0), 1.0);
        assert_eq!(bump(0.5), 0.0);
        assert_eq!(bump(-0.7), 0.0);
        let mass = adaptive(bump, -0.5, 0.5, &[0.0], AdaptiveOptions { abs_tol: 1e-14, ..Default::default() });
        assert!((mass.value - 1.0).abs() < 1e-12);
        for k in 0..100 {
            assert!(bump(-0.5 + k as f64 / 100.0) >= 0.0);
        }
    }

    #[test]
    fn spike_train_grows_at_nested_centres() {
        let s = Signal::spike_train(4, 1000.0).unwrap();
        // 81 = 3⁴·1 lies in P₁..P₄.
        assert!((s.value(81.0).unwrap() - 4.0).abs() < 1e-12);
        assert!((s.value(3.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((s.value(9.0).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(s.value(0.0).unwrap(), 0.0);
        assert_eq!(s.value(6.0).unwrap(), 0.0);
        let k = s.kinks(80.0, 82.0);
        assert!(k.contains(&81.0) && k.contains(&80.5) && k.contains(&(81.0 + 1.0 / 32.0)));
    }

    #[test]
    fn grid_interpolates_and_checks_domain() {
        let g = GridSignal::scalar(0.0, 0.5, vec![0.0, 1.0, 4.0]).unwrap();
        let s = Signal::Grid(g);
        assert_eq!(s.value(0.25).unwrap(), 0.5);
        assert_eq!(s.value(1.0).unwrap(), 4.0);
        assert!(matches!(s.value(1.5), Err(Error::Domain { .. })));
        assert_eq!(s.domain(), Some((0.0, 1.0)));
        assert!(GridSignal::scalar(0.0, 0.0, vec![1.0, 2.0]).is_err());
        assert!(GridSignal::new(0.0, 1.0, 2, vec![1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn sample_files_need_uniform_steps() {
        let g = GridSignal::parse_samples("0 1\n0.5 2\n1.0 3\n").unwrap();
        assert_eq!(g.len(), 3);
        assert!((g.step() - 0.5).abs() < 1e-15);
        assert!(GridSignal::parse_samples("0 1\n0.5 2\n1.1 3\n").is_err());
        let e = GridSignal::parse_samples("0 1\nfoo 2\n").unwrap_err();
        assert!(e.to_string().contains("line 2"));
    }

    #[test]
    fn combinators() {
        let s = Signal::sine(1.0, 1.0).plus(Signal::Constant(2.0)).scaled(3.0).shifted(0.5);
        let t = 0.3f64;
        assert!((s.value(t).unwrap() - 3.0 * ((t + 0.5).sin() + 2.0)).abs() < 1e-15);
        let v = Signal::Grid(GridSignal::new(0.0, 1.0, 2, vec![3.0, 4.0, 3.0, 4.0]).unwrap());
        assert_eq!(v.norm_at(0.5).unwrap(), 5.0);
        assert!(v.value(0.5).is_err());
    }

    #[test]
    fn psi1_is_bounded_by_one() {
        let s = Signal::psi1(1.0, 2f64.sqrt()).unwrap();
        for k in 0..1000 {
            assert!(s.value(k as f64 * 0.37).unwrap().abs() <= 1.0);
        }
        assert!(Signal::psi1(0.0, 1.0).is_err());
    }
}
