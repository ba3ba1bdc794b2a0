//! Positive measures on ℝ given by a density, and the weighted averages
//! that define μ-ergodicity.

use std::cell::Cell;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcspace::{cell_norm, Signal, StepanovExponent};
use crate::quadrature::{adaptive, AdaptiveOptions};

/// Absolute tolerance of the outer μ-integrals.
pub const OUTER_ABS_TOL: f64 = 1e-9;

/// Piecewise-constant density: `values[i]` holds on `[breakpoints[i], breakpoints[i+1])`,
/// the first value extends to −∞ and the last to +∞.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityTable {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    /// Quasi-invariance hypothesis asserted by whoever supplied the table;
    /// it cannot be verified from the table.
    pub asserted_quasi_invariant: bool,
}

impl DensityTable {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>, asserted_quasi_invariant: bool) -> Result<Self> {
        if breakpoints.is_empty() || breakpoints.len() != values.len() {
            return Err(Error::arg("density table needs one value per breakpoint"));
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::arg("density breakpoints must be strictly increasing"));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
            return Err(Error::arg(format!("density value {v} is not a finite nonnegative number")));
        }
        Ok(Self {
            breakpoints,
            values,
            asserted_quasi_invariant,
        })
    }

    /// Parses `t value` pairs, one per line; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut bps = Vec::new();
        let mut vals = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
                return Err(Error::config(format!("line {}: expected `t value`", no + 1)));
            };
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::config(format!("line {}: `{s}` is not a number", no + 1)))
            };
            bps.push(parse(a)?);
            vals.push(parse(b)?);
        }
        Self::new(bps, vals, false)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn value(&self, t: f64) -> f64 {
        let i = self.breakpoints.partition_point(|&b| b <= t);
        self.values[i.saturating_sub(1)]
    }

    fn mass(&self, a: f64, b: f64) -> f64 {
        let mut edges = vec![a];
        edges.extend(self.breakpoints.iter().copied().filter(|&x| x > a && x < b));
        edges.push(b);
        edges.windows(2).map(|w| (w[1] - w[0]) * self.value(w[0])).sum()
    }
}

/// Radon–Nikodym density of a measure μ(A) = ∫_A ρ dt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MeasureDensity {
    Lebesgue,
    /// ρ(t) = e^t for t ≤ 0 and 1 for t > 0.
    ExpLeft,
    CustomTable(DensityTable),
}

impl MeasureDensity {
    /// Registry lookup by tag (`lebesgue`, `exp-left`).
    pub fn from_tag(tag: &str) -> Result<Self> {
        match tag {
            "lebesgue" => Ok(Self::Lebesgue),
            "exp-left" | "theta" => Ok(Self::ExpLeft),
            other => Err(Error::config(format!("unknown density `{other}`"))),
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Self::Lebesgue => "lebesgue",
            Self::ExpLeft => "exp-left",
            Self::CustomTable(_) => "custom-table",
        }
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        match self {
            Self::Lebesgue => 1.0,
            Self::ExpLeft => {
                if t <= 0.0 {
                    t.exp()
                } else {
                    1.0
                }
            }
            Self::CustomTable(tab) => tab.value(t),
        }
    }

    /// Whether the translation quasi-invariance hypothesis holds: known for the
    /// registry entries, asserted by the user for tables.
    pub fn quasi_invariant(&self) -> bool {
        match self {
            Self::Lebesgue | Self::ExpLeft => true,
            Self::CustomTable(t) => t.asserted_quasi_invariant,
        }
    }

    /// Points where the density is not smooth.
    pub fn kinks(&self) -> Vec<f64> {
        match self {
            Self::Lebesgue => vec![],
            Self::ExpLeft => vec![0.0],
            Self::CustomTable(t) => t.breakpoints.clone(),
        }
    }

    fn mass_unchecked(&self, a: f64, b: f64) -> f64 {
        match self {
            Self::Lebesgue => b - a,
            Self::ExpLeft => (b.min(0.0).exp() - a.min(0.0).exp()) + (b.max(0.0) - a.max(0.0)),
            Self::CustomTable(t) => t.mass(a, b),
        }
    }
}

/// μ([a, b]).
pub fn measure_interval(density: &MeasureDensity, a: f64, b: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::arg("interval endpoints must be finite"));
    }
    if a > b {
        return Err(Error::arg(format!("reversed interval [{a}, {b}]")));
    }
    Ok(density.mass_unchecked(a, b))
}

/// μ([-r, r]) along a ladder of radii, the finite-data stand-in for μ(ℝ) = ∞.
pub fn mass_growth(density: &MeasureDensity, ladder: &[f64]) -> Result<Vec<f64>> {
    ladder.iter().map(|&r| measure_interval(density, -r, r)).collect()
}

fn validate_radius(r: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::arg(format!("radius must be positive, got {r}")));
    }
    Ok(())
}

/// Stepanov μ-ergodic mean
/// `(1/μ([-r,r])) ∫_{-r}^{r} (∫_t^{t+1} ‖f(s)‖^p ds)^{1/p} dμ(t)`.
pub fn ergodic_mean(signal: &Signal, density: &MeasureDensity, p: StepanovExponent, r: f64) -> Result<f64> {
    validate_radius(r)?;
    let mass = measure_interval(density, -r, r)?;
    if mass <= 0.0 {
        return Err(Error::arg(format!("μ([-{r}, {r}]) vanishes")));
    }
    let failure: Cell<Option<Error>> = Cell::new(None);
    let integrand = |t: f64| {
        let rho = density.evaluate(t);
        if rho == 0.0 {
            return 0.0;
        }
        match cell_norm(signal, t, p) {
            Ok(v) => v * rho,
            Err(e) => {
                failure.set(Some(e));
                0.0
            }
        }
    };
    let mut breaks = density.kinks();
    breaks.extend(signal.kinks(-r, r + 1.0));
    let q = adaptive(
        integrand,
        -r,
        r,
        &breaks,
        AdaptiveOptions {
            abs_tol: OUTER_ABS_TOL,
            rel_tol: 0.0,
            max_segments: 2_000,
        },
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(q.value / mass)
}

/// Ergodic means along an r-ladder, as a decay curve.
pub fn ergodic_curve(
    signal: &Signal,
    density: &MeasureDensity,
    p: StepanovExponent,
    ladder: &[f64],
) -> Result<Vec<(f64, f64)>> {
    ladder
        .par_iter()
        .map(|&r| ergodic_mean(signal, density, p, r).map(|m| (r, m)))
        .collect()
}

/// Default spacing of the sampling grid used for superlevel sets.
pub const SUPERLEVEL_STEP: f64 = 0.01;

/// `μ({t ∈ [-r,r] : ‖f(t)‖ ≥ ε}) / μ([-r,r])`, with the superlevel set taken
/// as the union of grid cells of width `step` containing a sample at or above ε.
pub fn superlevel_ratio(
    signal: &Signal,
    density: &MeasureDensity,
    epsilon: f64,
    r: f64,
    step: f64,
) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::arg(format!("threshold must be positive, got {epsilon}")));
    }
    validate_radius(r)?;
    if !(step > 0.0) {
        return Err(Error::arg("sampling step must be positive"));
    }
    let cells = ((2.0 * r) / step).ceil() as usize;
    let h = 2.0 * r / cells as f64;
    let mut above = Vec::with_capacity(cells + 1);
    for i in 0..=cells {
        above.push(signal.norm_at(-r + i as f64 * h)? >= epsilon);
    }
    let mut set_mass = 0.0;
    let mut run_start: Option<usize> = None;
    for i in 0..cells {
        let hit = above[i] || above[i + 1];
        match (hit, run_start) {
            (true, None) => run_start = Some(i),
            (false, Some(s)) => {
                set_mass += density.mass_unchecked(-r + s as f64 * h, -r + i as f64 * h);
                run_start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = run_start {
        set_mass += density.mass_unchecked(-r + s as f64 * h, r);
    }
    Ok(set_mass / measure_interval(density, -r, r)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_masses() {
        assert_eq!(measure_interval(&MeasureDensity::Lebesgue, -4.0, 4.0).unwrap(), 8.0);
        assert_eq!(measure_interval(&MeasureDensity::Lebesgue, 3.0, 3.0).unwrap(), 0.0);
        let m = measure_interval(&MeasureDensity::ExpLeft, -5.0, 5.0).unwrap();
        assert!((m - (6.0 - (-5f64).exp())).abs() < 1e-15);
        assert!(matches!(
            measure_interval(&MeasureDensity::Lebesgue, 1.0, 0.0),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn closed_forms_match_quadrature() {
        let tab = DensityTable::new(vec![-2.0, 0.5, 3.0], vec![0.5, 2.0, 1.0], true).unwrap();
        for d in [MeasureDensity::ExpLeft, MeasureDensity::CustomTable(tab)] {
            for &(a, b) in &[(-5.0, 5.0), (-7.5, -1.0), (0.25, 9.0)] {
                let q = adaptive(|t| d.evaluate(t), a, b, &d.kinks(), AdaptiveOptions::default());
                let m = measure_interval(&d, a, b).unwrap();
                assert!((q.value - m).abs() < 1e-9, "{d:?} [{a},{b}]");
            }
        }
    }

    #[test]
    fn table_parsing() {
        let t = DensityTable::parse("# weights\n-1 0.5\n0 1\n\n2 3 # tail\n").unwrap();
        let d = MeasureDensity::CustomTable(t);
        assert_eq!(d.evaluate(-10.0), 0.5);
        assert_eq!(d.evaluate(0.0), 1.0);
        assert_eq!(d.evaluate(5.0), 3.0);
        let err = DensityTable::parse("0 1\n1 x\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(DensityTable::parse("0 -1\n").is_err());
    }

    #[test]
    fn registry_masses_grow_without_bound() {
        for d in [MeasureDensity::Lebesgue, MeasureDensity::ExpLeft] {
            let g = mass_growth(&d, &[10.0, 1e2, 1e3, 1e4]).unwrap();
            assert!(g.windows(2).all(|w| w[1] > w[0]));
            assert!(g[3] >= 1e4);
        }
    }

    #[test]
    fn argument_errors() {
        let s = Signal::Constant(1.0);
        let p = StepanovExponent::new(1.0).unwrap();
        assert!(ergodic_mean(&s, &MeasureDensity::Lebesgue, p, 0.0).is_err());
        assert!(superlevel_ratio(&s, &MeasureDensity::Lebesgue, 0.0, 1.0, 0.01).is_err());
    }

    #[test]
    fn trivial_means_and_ratios() {
        let p1 = StepanovExponent::new(1.0).unwrap();
        let p2 = StepanovExponent::new(2.0).unwrap();
        let zero = Signal::Constant(0.0);
        let one = Signal::Constant(1.0);
        assert_eq!(ergodic_mean(&zero, &MeasureDensity::ExpLeft, p1, 100.0).unwrap(), 0.0);
        let m = ergodic_mean(&one, &MeasureDensity::Lebesgue, p2, 50.0).unwrap();
        assert!((m - 1.0).abs() < 1e-12);
        let d = MeasureDensity::Lebesgue;
        assert_eq!(superlevel_ratio(&zero, &d, 0.1, 10.0, SUPERLEVEL_STEP).unwrap(), 0.0);
        assert!((superlevel_ratio(&one, &d, 0.5, 10.0, SUPERLEVEL_STEP).unwrap() - 1.0).abs() < 1e-12);
    }
}
