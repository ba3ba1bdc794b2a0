//! Diagonal fractional resolvent kernels.
//!
//! On an eigenmode of −𝒜 with eigenvalue λ the resolvent family acts as the
//! scalar kernel
//!
//! ```text
//! r_γ(t; λ) = t^{γ-1} E_{γ,γ}(-λ t^γ),   t > 0,
//! ```
//!
//! which behaves like `t^{γ-1}/Γ(γ)` near zero and decays like `t^{-γ-1}` at
//! infinity. Everything here is built on [`mittag_leffler`].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcspace::StepanovExponent;
use crate::quadrature::{adaptive, AdaptiveOptions};
use crate::special::{ln_gamma, rgamma, zeta_sum};

/// Arguments with |z| up to this radius go through the power series.
pub const SERIES_RADIUS: f64 = 5.0;

/// On the negative axis the series terms peak near exp(|z|^{1/α}); beyond
/// this exponent the alternating sum loses too many digits.
const SERIES_CANCELLATION_LIMIT: f64 = 10.0;

/// Order γ and spectrum {λ_k} of a diagonal fractional resolvent family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionalKernelSpec {
    gamma: f64,
    spectrum: Vec<f64>,
}

impl FractionalKernelSpec {
    pub fn new(gamma: f64, spectrum: Vec<f64>) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::arg(format!("fractional order must lie in (0,1), got {gamma}")));
        }
        if spectrum.is_empty() {
            return Err(Error::arg("spectrum must contain at least one eigenvalue"));
        }
        if spectrum.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::arg("eigenvalues must be positive and finite"));
        }
        if spectrum.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::arg("spectrum must be sorted ascending"));
        }
        Ok(Self { gamma, spectrum })
    }

    /// Dirichlet Laplacian on (0, π): λ_k = k² for k = 1..=modes.
    pub fn dirichlet_interval(gamma: f64, modes: usize) -> Result<Self> {
        Self::new(gamma, (1..=modes).map(|k| (k * k) as f64).collect())
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    pub fn modes(&self) -> usize {
        self.spectrum.len()
    }
}

/// Two-parameter Mittag-Leffler function E_{α,β}(z) for real z.
///
/// Uses the power series for `z ≥ -5` unless its alternating terms grow
/// too large to cancel accurately. Further out on the negative axis with
/// `0 < α < 1` it switches to the algebraic asymptotic expansion when its
/// error estimate (the truncation envelope plus the exponentially small
/// Stokes contribution) is below 1e-15 relative, and otherwise to the
/// Hankel-contour integral collapsed onto the negative real axis.
pub fn mittag_leffler(alpha: f64, beta: f64, z: f64) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::arg(format!("Mittag-Leffler order must be positive, got {alpha}")));
    }
    if !beta.is_finite() || !z.is_finite() {
        return Err(Error::arg("Mittag-Leffler arguments must be finite"));
    }
    if z == 0.0 {
        return Ok(rgamma(beta));
    }
    if alpha < 1.0 && z < -1.0 && (-z).powf(1.0 / alpha) > SERIES_CANCELLATION_LIMIT {
        return negative_axis(alpha, beta, -z);
    }
    if z >= -SERIES_RADIUS {
        return series(alpha, beta, z);
    }
    if alpha < 1.0 {
        return negative_axis(alpha, beta, -z);
    }
    if alpha == 1.0 && beta >= 1.0 && beta == beta.floor() {
        // E_{1,1} = exp and E_{1,m+1}(z) = (E_{1,m}(z) - 1/Γ(m))/z.
        let mut e = z.exp();
        let mut m = 1.0;
        while m < beta {
            e = (e - rgamma(m)) / z;
            m += 1.0;
        }
        return Ok(e);
    }
    series(alpha, beta, z)
}

fn series(alpha: f64, beta: f64, z: f64) -> Result<f64> {
    if z > 0.0 && z.powf(1.0 / alpha) > 700.0 {
        return Err(Error::Range(format!(
            "E_{{{alpha},{beta}}}({z}) overflows double precision"
        )));
    }
    let lnz = z.abs().ln();
    let mut sum = 0.0;
    let mut peak: f64 = 0.0;
    let mut n = 0usize;
    loop {
        let arg = alpha * n as f64 + beta;
        let term = if arg > 0.0 && arg > 20.0 {
            let sign = if z < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 };
            sign * (n as f64 * lnz - ln_gamma(arg)).exp()
        } else {
            z.powi(n as i32) * rgamma(arg)
        };
        sum += term;
        peak = peak.max(term.abs());
        // Terms decrease monotonically once α n exceeds |z|^{1/α}.
        let past_peak = alpha * n as f64 > z.abs().powf(1.0 / alpha) + 2.0;
        if n > 3 && past_peak && term.abs() <= 1e-17 * sum.abs().max(1e-300) {
            break;
        }
        n += 1;
        if n > 20_000 {
            return Err(Error::Range(format!(
                "Mittag-Leffler series did not converge at z = {z}"
            )));
        }
    }
    if !sum.is_finite() {
        return Err(Error::Range(format!("E_{{{alpha},{beta}}}({z}) is not finite")));
    }
    // Alternating series lose about log10(peak/|sum|) digits.
    if z < 0.0 && peak * f64::EPSILON > 1e-8 {
        return Err(Error::Range(format!(
            "series cancellation too severe for E_{{{alpha},{beta}}}({z})"
        )));
    }
    Ok(sum)
}

fn negative_axis(alpha: f64, beta: f64, x: f64) -> Result<f64> {
    if beta >= 1.0 + alpha {
        // E_{α,β}(z) = (E_{α,β-α}(z) - 1/Γ(β-α)) / z
        let lower = negative_axis(alpha, beta - alpha, x)?;
        return Ok((lower - rgamma(beta - alpha)) / (-x));
    }
    if let Some(v) = asymptotic(alpha, beta, x) {
        return Ok(v);
    }
    Ok(contour_integral(alpha, beta, x))
}

/// Algebraic expansion E_{α,β}(-x) ~ Σ_{k≥1} (-1)^{k+1} x^{-k} / Γ(β-αk).
/// Returns `None` when its error estimate is not below 1e-15 relative.
fn asymptotic(alpha: f64, beta: f64, x: f64) -> Option<f64> {
    if x < 20.0 {
        return None;
    }
    let lnx = x.ln();
    let mut sum = 0.0;
    let mut prev_env = f64::INFINITY;
    let mut env = f64::INFINITY;
    for k in 1..400usize {
        let kf = k as f64;
        let y = alpha * kf - beta;
        // |1/Γ(-y)| ≤ Γ(1+y)/π for y > 0
        let bound = if y > 0.0 {
            (-kf * lnx + ln_gamma(1.0 + y)).exp() / PI
        } else {
            (rgamma(-y) * (-kf * lnx).exp()).abs()
        };
        if bound > prev_env && k > 2 {
            break;
        }
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        sum += sign * (-kf * lnx).exp() * rgamma(beta - alpha * kf);
        prev_env = bound;
        env = bound;
        if bound < 1e-18 * sum.abs() {
            break;
        }
    }
    let stokes = if alpha > 2.0 / 3.0 {
        let c = (PI / alpha).cos();
        let s = x.powf(1.0 / alpha);
        2.0 / alpha * s.powf(1.0 - beta).max(1.0) * (c * s).exp()
    } else {
        0.0
    };
    let err = env + stokes;
    (err <= 1e-15 * sum.abs()).then_some(sum)
}

/// E_{α,β}(-x) for 0 < α < 1, β < 1 + α from the collapsed Hankel contour
///
/// ```text
/// E_{α,β}(-x) = 1/(απ) ∫_0^∞ r^{(1-β)/α} e^{-r^{1/α}}
///               (r sin π(1-β) + x sin π(1-β+α)) / (r² + 2 r x cos απ + x²) dr,
/// ```
///
/// after the substitution r = v^{α/(1+α-β)} that removes the endpoint
/// singularity.
fn contour_integral(alpha: f64, beta: f64, x: f64) -> f64 {
    let s1 = sin_pi(1.0 - beta);
    let s2 = sin_pi(1.0 - beta + alpha);
    let c = (alpha * PI).cos();
    let e = 1.0 + alpha - beta;
    let integrand = |v: f64| {
        if v <= 0.0 {
            // s → 0 limit (the power s^α vanishes)
            return x * s2 / (x * x);
        }
        let s = v.powf(1.0 / e);
        let r = s.powf(alpha);
        (-s).exp() * (r * s1 + x * s2) / (r * r + 2.0 * r * x * c + x * x)
    };
    let s_max = 745.0f64;
    let v_max = s_max.powf(e);
    let v_peak = x.powf(e / alpha);
    let mut breaks = vec![v_peak, 1.0];
    if v_peak < v_max {
        breaks.push(0.5 * v_peak);
        breaks.push(1.5 * v_peak);
    }
    let q = adaptive(
        integrand,
        0.0,
        v_max,
        &breaks,
        AdaptiveOptions {
            abs_tol: 1e-300,
            rel_tol: 1e-15,
            max_segments: 3000,
        },
    );
    q.value / (PI * e)
}

/// sin(πy), exactly zero at integers.
fn sin_pi(y: f64) -> f64 {
    let r = y - 2.0 * (y / 2.0).round();
    let r = if r > 0.5 {
        1.0 - r
    } else if r < -0.5 {
        -1.0 - r
    } else {
        r
    };
    (PI * r).sin()
}

/// Scalar resolvent kernel r_γ(t; λ_k) acting on mode `k` (0-based).
pub fn resolvent_kernel(spec: &FractionalKernelSpec, k: usize, t: f64) -> Result<f64> {
    let lambda = *spec
        .spectrum
        .get(k)
        .ok_or_else(|| Error::arg(format!("mode index {k} outside spectrum of {}", spec.modes())))?;
    resolvent_scalar(spec.gamma, lambda, t)
}

/// r_γ(t; λ) for an arbitrary positive λ.
pub fn resolvent_scalar(gamma: f64, lambda: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::arg(format!("resolvent kernel is singular at t = {t} <= 0")));
    }
    let tg = t.powf(gamma);
    Ok(t.powf(gamma - 1.0) * mittag_leffler(gamma, gamma, -lambda * tg)?)
}

/// ∫_0^b r_γ(τ; λ) dτ and ∫_0^b τ r_γ(τ; λ) dτ.
///
/// Both follow from d/dt E_{γ,1}(-λt^γ) = -λ r_γ(t; λ):
/// the mass is (1 - E_{γ,1})/λ and the first moment b (E_{γ,2} - E_{γ,1})/λ,
/// with the small-argument forms b^γ E_{γ,γ+1} and
/// b^{γ+1} (E_{γ,γ+1} - E_{γ,γ+2}) used to avoid cancellation.
#[derive(Debug, Clone, Copy)]
pub(crate) struct KernelCumulative {
    pub mass: f64,
    pub moment: f64,
    /// E_{γ,1}(-λ b^γ), kept to difference far-field masses accurately.
    pub e1: f64,
    pub series_form: bool,
}

pub(crate) fn kernel_cumulative(gamma: f64, lambda: f64, b: f64) -> Result<KernelCumulative> {
    if b == 0.0 {
        return Ok(KernelCumulative {
            mass: 0.0,
            moment: 0.0,
            e1: 1.0,
            series_form: true,
        });
    }
    let bg = b.powf(gamma);
    let z = -lambda * bg;
    let e1 = mittag_leffler(gamma, 1.0, z)?;
    if z.abs() <= 1.0 {
        let g1 = mittag_leffler(gamma, gamma + 1.0, z)?;
        let g2 = mittag_leffler(gamma, gamma + 2.0, z)?;
        Ok(KernelCumulative {
            mass: bg * g1,
            moment: bg * b * (g1 - g2),
            e1,
            series_form: true,
        })
    } else {
        let e2 = mittag_leffler(gamma, 2.0, z)?;
        Ok(KernelCumulative {
            mass: (1.0 - e1) / lambda,
            moment: b * (e2 - e1) / lambda,
            e1,
            series_form: false,
        })
    }
}

/// Product-integration weights of r_γ(·; λ) against the piecewise-linear
/// interpolant on a uniform lag grid τ_m = m h, m = 0..=cells.
///
/// Returns `(full, left)` where `full[m]` is the weight of the sample at lag
/// m when both adjacent cells are present and `left[m]` is the share that
/// comes from cell [m h, (m+1) h] (used to correct the last lag at the start
/// of a finite history).
pub(crate) fn product_weights(gamma: f64, lambda: f64, h: f64, cells: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let edges: Vec<KernelCumulative> = (0..=cells)
        .map(|m| kernel_cumulative(gamma, lambda, m as f64 * h))
        .collect::<Result<_>>()?;
    let mut full = vec![0.0; cells + 1];
    let mut left = vec![0.0; cells + 1];
    for m in 0..cells {
        let (a, b) = (&edges[m], &edges[m + 1]);
        let mass = if a.series_form || b.series_form {
            b.mass - a.mass
        } else {
            (a.e1 - b.e1) / lambda
        };
        let moment = b.moment - a.moment;
        let lo = m as f64 * h;
        // ∫ r(τ) (τ_{m+1} - τ)/h  →  lag m;   ∫ r(τ) (τ - τ_m)/h  →  lag m+1
        let to_right = (moment - lo * mass) / h;
        let to_left = mass - to_right;
        full[m] += to_left;
        left[m] = to_left;
        full[m + 1] += to_right;
    }
    Ok((full, left))
}

/// The ledger of S_γ^q: series term, integral term and their sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SGammaConstant {
    pub gamma: f64,
    pub p: f64,
    /// Σ_{k≥1} k^{-γ-1} = ζ(γ+1).
    pub series: f64,
    /// Error bound on `series`.
    pub series_error: f64,
    /// (∫_0^1 s^{q(γ-1)} ds)^{1/q} = (1 + q(γ-1))^{-1/q}.
    pub integral_direct: f64,
    /// The alternative closed form (1 - q(γ-1))^{1/q}.
    pub integral_printed: f64,
    /// `series + integral_direct`, the value the solvers use.
    pub total: f64,
    /// `series + integral_printed`, reported alongside.
    pub total_printed: f64,
}

const ZETA_TERMS: usize = 10_000;

/// Computes S_γ^q for the Hölder pair (p, q).
pub fn s_gamma_constant(gamma: f64, p: StepanovExponent) -> Result<SGammaConstant> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::arg(format!("fractional order must lie in (0,1), got {gamma}")));
    }
    if gamma * p.p() <= 1.0 {
        return Err(Error::Divergence(format!(
            "∫_0^1 s^(q(γ-1)) ds diverges for γ p = {} <= 1 (γ = {gamma}, p = {})",
            gamma * p.p(),
            p.p()
        )));
    }
    let q = p.q().expect("q is finite when γ p > 1 with γ < 1");
    let zeta = zeta_sum(gamma + 1.0, ZETA_TERMS);
    let exponent = q * (gamma - 1.0);
    let integral_direct = (1.0 / (1.0 + exponent)).powf(1.0 / q);
    let integral_printed = (1.0 - exponent).powf(1.0 / q);
    let series = zeta.value();
    Ok(SGammaConstant {
        gamma,
        p: p.p(),
        series,
        series_error: zeta.error_bound,
        integral_direct,
        integral_printed,
        total: series + integral_direct,
        total_printed: series + integral_printed,
    })
}

/// Empirical constants of the two-regime kernel bound
/// `r ≤ C_small t^{γ-1}` on (0,1] and `r ≤ C_large t^{-γ-1}` on [1,∞).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelBounds {
    pub c_small: f64,
    pub c_large: f64,
    pub argmax_small: f64,
    pub argmax_large: f64,
}

/// Maximises `sup_k r_γ(t;λ_k) t^{1-γ}` over grid ∩ (0,1] and
/// `sup_k r_γ(t;λ_k) t^{1+γ}` over grid ∩ [1,∞).
pub fn verify_kernel_bounds(spec: &FractionalKernelSpec, grid: &[f64]) -> Result<KernelBounds> {
    let g = spec.gamma;
    let mut out = KernelBounds {
        c_small: 0.0,
        c_large: 0.0,
        argmax_small: f64::NAN,
        argmax_large: f64::NAN,
    };
    for &t in grid {
        if !(t > 0.0) {
            return Err(Error::arg(format!("kernel bound grid point {t} is not positive")));
        }
        let mut sup: f64 = 0.0;
        for k in 0..spec.modes() {
            sup = sup.max(resolvent_kernel(spec, k, t)?);
        }
        if t <= 1.0 {
            let v = sup * t.powf(1.0 - g);
            if v > out.c_small {
                out.c_small = v;
                out.argmax_small = t;
            }
        }
        if t >= 1.0 {
            let v = sup * t.powf(1.0 + g);
            if v > out.c_large {
                out.c_large = v;
                out.argmax_large = t;
            }
        }
    }
    Ok(out)
}

/// Log-spaced grid of `n` points on [a, b].
pub fn log_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(a > 0.0 && b > a && n >= 2);
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
        .collect()
}
