//! Picard iteration with residual and contraction-ratio bookkeeping, and an
//! empirical probe for strict and Meir–Keeler contractivity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Convergence record of a fixed-point solve.
///
/// `residuals[n]` is the distance between iterates n and n+1 and
/// `ratios[n] = residuals[n+1] / residuals[n]`. The returned state is the last
/// iterate whose own residual was measured, so `final_residual` is exactly
/// ‖T u − u‖ for the state handed back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    pub iterations: usize,
    pub residuals: Vec<f64>,
    pub ratios: Vec<f64>,
    pub converged: bool,
    pub final_residual: f64,
    pub tolerance: f64,
}

/// Iterations allowed before the residual history must be monotone.
pub const BURN_IN: usize = 3;

impl IterationReport {
    /// Largest contraction ratio observed after the burn-in.
    pub fn max_ratio_after_burn_in(&self) -> Option<f64> {
        self.ratios.iter().skip(BURN_IN).copied().filter(|r| r.is_finite()).reduce(f64::max)
    }

    /// Whether residuals never increase after the burn-in.
    pub fn monotone_after_burn_in(&self) -> bool {
        self.residuals.windows(2).skip(BURN_IN).all(|w| w[1] <= w[0])
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

/// Iterates `u ← map(u)` until `distance(map(u), u) ≤ tolerance` or
/// `max_iterations` maps have been applied. Non-convergence is reported, not
/// raised; a failing map is raised with its iteration index.
pub fn picard_iterate<S, M, D>(
    map: M,
    initial: S,
    distance: D,
    tolerance: f64,
    max_iterations: usize,
) -> Result<(S, IterationReport)>
where
    M: FnMut(&S) -> Result<S>,
    D: Fn(&S, &S) -> f64,
{
    picard_iterate_observed(map, initial, distance, tolerance, max_iterations, |_, _| Ok(()))
}

/// [`picard_iterate`] with a hook called on every new iterate (index, state),
/// used for invariants such as ball membership.
pub fn picard_iterate_observed<S, M, D, O>(
    mut map: M,
    initial: S,
    distance: D,
    tolerance: f64,
    max_iterations: usize,
    mut observe: O,
) -> Result<(S, IterationReport)>
where
    M: FnMut(&S) -> Result<S>,
    D: Fn(&S, &S) -> f64,
    O: FnMut(usize, &S) -> Result<()>,
{
    if !(tolerance > 0.0) {
        return Err(Error::arg(format!("tolerance must be positive, got {tolerance}")));
    }
    if max_iterations == 0 {
        return Err(Error::arg("at least one iteration is required"));
    }
    let wrap = |iteration: usize| {
        move |e: Error| Error::Iteration {
            iteration,
            source: Box::new(e),
        }
    };
    observe(0, &initial).map_err(wrap(0))?;
    let mut u = initial;
    let mut residuals = Vec::new();
    for n in 1..=max_iterations {
        let next = map(&u).map_err(wrap(n))?;
        let r = distance(&next, &u);
        if !r.is_finite() {
            return Err(Error::Iteration {
                iteration: n,
                source: Box::new(Error::Range(format!("residual became {r}"))),
            });
        }
        residuals.push(r);
        if r <= tolerance {
            return Ok((u, report(residuals, true, tolerance)));
        }
        observe(n, &next).map_err(wrap(n))?;
        u = next;
    }
    Ok((u, report(residuals, false, tolerance)))
}

fn report(residuals: Vec<f64>, converged: bool, tolerance: f64) -> IterationReport {
    let ratios = residuals
        .windows(2)
        .map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 })
        .collect();
    IterationReport {
        iterations: residuals.len(),
        final_residual: *residuals.last().unwrap_or(&f64::NAN),
        residuals,
        ratios,
        converged,
        tolerance,
    }
}

/// Sup-norm distance between two equally long sample vectors.
pub fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Uniform time grid `t0, t0 + h, …, t1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t0: f64,
    pub t1: f64,
    pub h: f64,
}

impl TimeGrid {
    pub fn new(t0: f64, t1: f64, h: f64) -> Result<Self> {
        let g = Self { t0, t1, h };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t0.is_finite() && self.t1.is_finite() && self.t1 > self.t0) {
            return Err(Error::config(format!("time grid needs t0 < t1, got [{}, {}]", self.t0, self.t1)));
        }
        if !(self.h > 0.0) {
            return Err(Error::config(format!("time step must be positive, got {}", self.h)));
        }
        let steps = (self.t1 - self.t0) / self.h;
        if (steps - steps.round()).abs() > 1e-6 * steps.max(1.0) {
            return Err(Error::config(format!(
                "step {} does not divide [{}, {}] evenly",
                self.h, self.t0, self.t1
            )));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        ((self.t1 - self.t0) / self.h).round() as usize
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.steps()).map(|i| self.t0 + i as f64 * self.h).collect()
    }
}

/// Settings shared by the fixed-point solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Sup-norm stopping tolerance on the time grid.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub grid: TimeGrid,
    /// Lower-limit cutoff for ∫_{-∞}^t; chosen from the tail bound when absent.
    pub t_trunc: Option<f64>,
    /// Bound the neglected tail must meet. The fractional solver defaults to
    /// [`DEFAULT_FRACTIONAL_TAIL`] because its algebraic kernel tail cannot
    /// reach the iteration tolerance at any practical horizon; the evolution
    /// solver defaults to a tenth of `tolerance`.
    pub tail_tolerance: Option<f64>,
    /// Gauss nodes per cell where cell quadrature is used.
    pub quadrature_order: usize,
}

/// Default tail tolerance of the fractional solver.
pub const DEFAULT_FRACTIONAL_TAIL: f64 = 1e-3;

impl SolverConfig {
    pub fn new(grid: TimeGrid) -> Self {
        Self {
            tolerance: 1e-8,
            max_iterations: 200,
            grid,
            t_trunc: None,
            tail_tolerance: None,
            quadrature_order: 3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if !(self.tolerance > 0.0) {
            return Err(Error::config(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if self.max_iterations == 0 {
            return Err(Error::config("max_iterations must be at least 1"));
        }
        if let Some(t) = self.t_trunc {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::config(format!("t_trunc must be positive, got {t}")));
            }
        }
        if let Some(t) = self.tail_tolerance {
            if !(t > 0.0) {
                return Err(Error::config(format!("tail tolerance must be positive, got {t}")));
            }
        }
        if !(1..=8).contains(&self.quadrature_order) {
            return Err(Error::config("quadrature order must be between 1 and 8"));
        }
        Ok(())
    }
}

/// One Meir–Keeler band check: pairs with ε ≤ d(x,y) < ε + δ, δ = ε².
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandCheck {
    pub epsilon: f64,
    pub delta: f64,
    pub pairs_in_band: usize,
    /// Largest d(g x, g y) over the band, or 0 for an empty band.
    pub max_image_distance: f64,
    /// Every image distance in the band stays below ε; an empty band fails.
    pub passed: bool,
}

/// Outcome of [`contraction_probe`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub pairs: usize,
    /// sup d(g x, g y)/d(x, y) over pairs with x ≠ y.
    pub sup_ratio: f64,
    pub bands: Vec<BandCheck>,
}

impl ProbeReport {
    pub fn all_bands_pass(&self) -> bool {
        self.bands.iter().all(|b| b.passed)
    }

    pub fn no_band_passes(&self) -> bool {
        self.bands.iter().all(|b| !b.passed)
    }
}

/// Samples Lipschitz ratios and Meir–Keeler bands of `g` over `pairs`.
pub fn contraction_probe<S, G, D>(g: G, pairs: &[(S, S)], distance: D, epsilons: &[f64]) -> Result<ProbeReport>
where
    G: Fn(&S) -> Result<S>,
    D: Fn(&S, &S) -> f64,
{
    if pairs.is_empty() {
        return Err(Error::arg("contraction probe needs at least one sample pair"));
    }
    if epsilons.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::arg("every ε must be positive"));
    }
    let mut sup_ratio: f64 = 0.0;
    let mut bands: Vec<BandCheck> = epsilons
        .iter()
        .map(|&epsilon| BandCheck {
            epsilon,
            delta: epsilon * epsilon,
            pairs_in_band: 0,
            max_image_distance: 0.0,
            passed: true,
        })
        .collect();
    for (x, y) in pairs {
        let d = distance(x, y);
        if d == 0.0 {
            continue;
        }
        let dg = distance(&g(x)?, &g(y)?);
        sup_ratio = sup_ratio.max(dg / d);
        for b in bands.iter_mut() {
            if d >= b.epsilon && d < b.epsilon + b.delta {
                b.pairs_in_band += 1;
                b.max_image_distance = b.max_image_distance.max(dg);
                if dg >= b.epsilon {
                    b.passed = false;
                }
            }
        }
    }
    for b in bands.iter_mut() {
        if b.pairs_in_band == 0 {
            b.passed = false;
        }
    }
    Ok(ProbeReport {
        pairs: pairs.len(),
        sup_ratio,
        bands,
    })
}

/// Deterministic scalar sample pairs on `[a, b]`: a `grid × grid` lattice plus,
/// for each ε, pairs whose distance sweeps the band [ε, ε + ε²).
pub fn scalar_probe_pairs(a: f64, b: f64, grid: usize, epsilons: &[f64]) -> Vec<(f64, f64)> {
    let at = |i: usize, n: usize| a + (b - a) * i as f64 / (n.max(2) - 1) as f64;
    let mut pairs = Vec::new();
    for i in 0..grid {
        for j in 0..grid {
            pairs.push((at(i, grid), at(j, grid)));
        }
    }
    for &eps in epsilons {
        for frac in [0.0, 0.25, 0.5, 0.75, 0.999] {
            let d = eps + frac * eps * eps;
            for i in 0..grid {
                let x = at(i, grid);
                if x + d <= b {
                    pairs.push((x, x + d));
                }
                if x - d >= a {
                    pairs.push((x, x - d));
                }
            }
        }
    }
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(a: &f64, b: &f64) -> f64 {
        (a - b).abs()
    }

    #[test]
    fn identity_converges_at_once() {
        let (u, r) = picard_iterate(|u: &Vec<f64>| Ok(u.clone()), vec![1.0, 2.0], |a, b| sup_distance(a, b), 1e-12, 10).unwrap();
        assert_eq!(u, vec![1.0, 2.0]);
        assert_eq!(r.iterations, 1);
        assert!(r.converged && r.final_residual == 0.0);
    }

    #[test]
    fn halving_contracts_geometrically() {
        let (u, r) = picard_iterate(
            |u: &Vec<f64>| Ok(u.iter().map(|x| x / 2.0).collect()),
            vec![1.0; 4],
            |a, b| sup_distance(a, b),
            1e-8,
            100,
        )
        .unwrap();
        assert!(r.converged && r.final_residual <= 1e-8);
        assert!(u.iter().all(|x| x.abs() < 2e-8));
        assert!(r.ratios.iter().all(|q| (q - 0.5).abs() < 1e-12));
        assert!(r.monotone_after_burn_in());
    }

    #[test]
    fn nonlinear_scalar_map_matches_bisection() {
        let g = |x: f64| x / 2.0 + 0.1 * x.sin();
        let (u, r) = picard_iterate(|x: &f64| Ok(g(*x)), 3.0, scalar, 1e-12, 200).unwrap();
        assert!(r.converged);
        // x − g(x) = x/2 − 0.1 sin x has the single root 0.
        let (mut lo, mut hi) = (-1.0f64, 3.0f64);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if (mid - g(mid)) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        assert!((u - 0.5 * (lo + hi)).abs() < 1e-8);
    }

    #[test]
    fn failures_carry_the_iteration_index() {
        let mut calls = 0;
        let err = picard_iterate(
            |x: &f64| {
                calls += 1;
                if calls == 3 {
                    Err(Error::Range("boom".into()))
                } else {
                    Ok(x / 3.0)
                }
            },
            1.0,
            scalar,
            1e-14,
            10,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Iteration { iteration: 3, .. }));
    }

    #[test]
    fn non_convergence_is_data() {
        let (_, r) = picard_iterate(|x: &f64| Ok(-x), 1.0, scalar, 1e-8, 5).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 5);
    }

    #[test]
    fn report_round_trips_through_json() {
        let (_, r) = picard_iterate(|x: &f64| Ok(x / 4.0), 1.0, scalar, 1e-6, 50).unwrap();
        let back: IterationReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn probe_of_contraction_and_expansion() {
        let eps = [1e-3, 1e-2, 1e-1, 1.0];
        let pairs = scalar_probe_pairs(-1.0, 1.0, 41, &eps);
        let half = contraction_probe(|x: &f64| Ok(x / 2.0), &pairs, scalar, &eps).unwrap();
        assert!((half.sup_ratio - 0.5).abs() < 1e-12);
        assert!(half.all_bands_pass());
        let double = contraction_probe(|x: &f64| Ok(2.0 * x), &pairs, scalar, &eps).unwrap();
        assert!((double.sup_ratio - 2.0).abs() < 1e-12);
        assert!(double.no_band_passes());
        assert!(contraction_probe(|x: &f64| Ok(*x), &Vec::<(f64, f64)>::new(), scalar, &eps).is_err());
    }

    #[test]
    fn grids_and_configs() {
        assert_eq!(TimeGrid::new(0.0, 1.0, 0.25).unwrap().nodes(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(TimeGrid::new(0.0, 1.0, 0.3).is_err());
        assert!(TimeGrid::new(1.0, 0.0, 0.1).is_err());
        let mut c = SolverConfig::new(TimeGrid::new(0.0, 1.0, 0.5).unwrap());
        assert!(c.validate().is_ok());
        c.tolerance = 0.0;
        assert!(c.validate().is_err());
    }
}
