//! Gamma-function helpers and the Riemann zeta sum used by the kernel constants.

/// Γ(x).
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// ln |Γ(x)|.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma_r(x).0
}

/// 1/Γ(x), zero at the poles and underflowing gracefully for large x.
pub fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return 0.0;
    }
    if x > 170.0 {
        return (-ln_gamma(x)).exp();
    }
    1.0 / gamma(x)
}

/// Partial sum of Σ k^{-s} over `1..=terms` plus the Euler–Maclaurin tail.
#[derive(Debug, Clone, Copy)]
pub struct ZetaSum {
    pub partial: f64,
    pub tail: f64,
    /// Bound on the error of `partial + tail`.
    pub error_bound: f64,
}

impl ZetaSum {
    pub fn value(&self) -> f64 {
        self.partial + self.tail
    }
}

/// ζ(s) for s > 1 by `terms` explicit terms and an Euler–Maclaurin tail with
/// two Bernoulli corrections.
pub fn zeta_sum(s: f64, terms: usize) -> ZetaSum {
    assert!(s > 1.0, "zeta sum needs s > 1");
    assert!(terms >= 1);
    // Smallest terms first.
    let partial: f64 = (1..=terms).rev().map(|k| (k as f64).powf(-s)).sum();
    let n = terms as f64;
    // Σ_{k>n} k^{-s} = n^{1-s}/(s-1) - n^{-s}/2 + s n^{-s-1}/12
    //                  - s(s+1)(s+2) n^{-s-3}/720 + R
    let tail = n.powf(1.0 - s) / (s - 1.0) - 0.5 * n.powf(-s) + s * n.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * n.powf(-s - 3.0) / 720.0;
    let error_bound = s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * n.powf(-s - 5.0) / 30240.0
        + terms as f64 * f64::EPSILON;
    ZetaSum {
        partial,
        tail,
        error_bound,
    }
}
