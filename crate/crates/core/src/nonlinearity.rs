//! Registry of semilinear terms f(t, φ) together with the Lipschitz data the
//! existence theorems need.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::funcspace::Signal;
use crate::modal::{Geometry, Workspace};

/// Separable forcing term H(t, x) = s(t)·Σ_k a_k sin(kx).
#[derive(Debug, Clone)]
pub struct Forcing {
    pub time: Signal,
    /// Sine amplitudes a_k; a single value for scalar problems.
    pub profile: Vec<f64>,
}

impl Forcing {
    pub fn new(time: Signal, profile: Vec<f64>) -> Self {
        Self { time, profile }
    }

    /// Forcing of a scalar problem.
    pub fn scalar(time: Signal) -> Self {
        Self {
            time,
            profile: vec![1.0],
        }
    }
}

type PointFn = dyn Fn(f64, f64) -> Result<f64> + Send + Sync;
type BallFn = dyn Fn(f64) -> Signal + Send + Sync;

/// User map applied pointwise in x: f(t, φ)(x) = g(t, φ(x)).
#[derive(Clone)]
pub struct PointwiseMap {
    pub name: String,
    g: Arc<PointFn>,
    lipschitz: Option<Signal>,
    ball_lipschitz: Option<Arc<BallFn>>,
}

impl fmt::Debug for PointwiseMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PointwiseMap").field("name", &self.name).finish()
    }
}

impl PointwiseMap {
    pub fn new<G>(name: impl Into<String>, g: G) -> Self
    where
        G: Fn(f64, f64) -> Result<f64> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            g: Arc::new(g),
            lipschitz: None,
            ball_lipschitz: None,
        }
    }

    /// Declares a global Lipschitz bound |g(t,x) − g(t,y)| ≤ L(t)|x − y|.
    pub fn with_lipschitz(mut self, l: Signal) -> Self {
        self.lipschitz = Some(l);
        self
    }

    /// Declares Lipschitz bounds L_ρ(t) on balls |x|, |y| ≤ ρ.
    pub fn with_ball_lipschitz<F>(mut self, f: F) -> Self
    where
        F: Fn(f64) -> Signal + Send + Sync + 'static,
    {
        self.ball_lipschitz = Some(Arc::new(f));
        self
    }
}

/// A semilinear term f(t, φ).
#[derive(Debug, Clone)]
pub enum NonlinearitySpec {
    Zero,
    /// K(t)·R/(1 + ‖φ‖) + H(t).
    MkSaturating { k: Signal, r: Vec<f64>, forcing: Vec<Forcing> },
    /// K(t)·‖φ‖/(1 + ‖φ‖)·Q + H(t).
    MkSaturatingV2 { k: Signal, q: Vec<f64>, forcing: Vec<Forcing> },
    /// b(t)·φ(x)² + C(t, x).
    Quadratic { b: Signal, forcing: Vec<Forcing> },
    /// a(t)·φ + C(t, x).
    Affine { a: Signal, forcing: Vec<Forcing> },
    Pointwise(PointwiseMap),
}

/// Per-time values of the scalar coefficient and forcing on a fixed set of nodes.
#[derive(Debug, Clone)]
pub struct Tabulated {
    times: Vec<f64>,
    coef: Vec<f64>,
    /// `times.len() × dim` forcing coefficients.
    forcing: Vec<f64>,
    profile: Vec<f64>,
    dim: usize,
}

impl Tabulated {
    pub fn times(&self) -> &[f64] {
        &self.times
    }
}

impl NonlinearitySpec {
    pub fn tag(&self) -> &'static str {
        match self {
            Self::Zero => "zero",
            Self::MkSaturating { .. } => "mk-saturating",
            Self::MkSaturatingV2 { .. } => "mk-saturating-v2",
            Self::Quadratic { .. } => "quadratic",
            Self::Affine { .. } => "affine",
            Self::Pointwise(_) => "pointwise",
        }
    }

    /// Meir–Keeler registry entries, for which the equality case is admissible.
    pub fn is_meir_keeler(&self) -> bool {
        matches!(self, Self::MkSaturating { .. } | Self::MkSaturatingV2 { .. })
    }

    fn forcing(&self) -> &[Forcing] {
        match self {
            Self::MkSaturating { forcing, .. }
            | Self::MkSaturatingV2 { forcing, .. }
            | Self::Quadratic { forcing, .. }
            | Self::Affine { forcing, .. } => forcing,
            Self::Zero | Self::Pointwise(_) => &[],
        }
    }

    fn coefficient(&self) -> Option<&Signal> {
        match self {
            Self::MkSaturating { k, .. } | Self::MkSaturatingV2 { k, .. } => Some(k),
            Self::Quadratic { b, .. } => Some(b),
            Self::Affine { a, .. } => Some(a),
            Self::Zero | Self::Pointwise(_) => None,
        }
    }

    fn profile(&self) -> Option<&[f64]> {
        match self {
            Self::MkSaturating { r, .. } => Some(r),
            Self::MkSaturatingV2 { q, .. } => Some(q),
            _ => None,
        }
    }

    /// Checks the sign conditions on K, b (sampled on `window`) and on R, Q.
    pub fn validate(&self, geom: &Geometry, window: (f64, f64)) -> Result<()> {
        if let Some(p) = self.profile() {
            if geom.profile_minimum(p)? < -1e-12 {
                return Err(Error::arg(format!("{} needs a nonnegative spatial profile", self.tag())));
            }
        }
        for f in self.forcing() {
            geom.profile_coefficients(&f.profile)?;
        }
        if let (Some(c), Self::MkSaturating { .. } | Self::MkSaturatingV2 { .. } | Self::Quadratic { .. }) =
            (self.coefficient(), self)
        {
            let (a, b) = window;
            let n = (((b - a) / 0.01).ceil() as usize).clamp(1, 1_000_000);
            for i in 0..=n {
                let t = a + (b - a) * i as f64 / n as f64;
                let v = c.value(t)?;
                if v < 0.0 {
                    return Err(Error::arg(format!("{} coefficient is negative ({v}) at t = {t}", self.tag())));
                }
            }
        }
        Ok(())
    }

    /// Evaluates coefficient and forcing once per node for repeated application.
    pub fn tabulate(&self, geom: &Geometry, times: &[f64]) -> Result<Tabulated> {
        let dim = geom.dim();
        let mut coef = vec![0.0; times.len()];
        if let Some(c) = self.coefficient() {
            for (v, &t) in coef.iter_mut().zip(times) {
                *v = c.value(t)?;
            }
        }
        let mut forcing = vec![0.0; times.len() * dim];
        for f in self.forcing() {
            let shape = geom.profile_coefficients(&f.profile)?;
            for (row, &t) in forcing.chunks_exact_mut(dim).zip(times) {
                let s = f.time.value(t)?;
                row.iter_mut().zip(&shape).for_each(|(o, c)| *o += s * c);
            }
        }
        let profile = match self.profile() {
            Some(p) => geom.profile_coefficients(p)?,
            None => Vec::new(),
        };
        Ok(Tabulated {
            times: times.to_vec(),
            coef,
            forcing,
            profile,
            dim,
        })
    }

    /// out = f(t_i, u) with t_i the i-th tabulated node.
    pub fn apply_tabulated(
        &self,
        tab: &Tabulated,
        i: usize,
        geom: &Geometry,
        u: &[f64],
        out: &mut [f64],
        ws: &mut Workspace,
    ) -> Result<()> {
        let forcing = &tab.forcing[i * tab.dim..(i + 1) * tab.dim];
        self.apply_core(tab.times[i], tab.coef[i], &tab.profile, forcing, geom, u, out, ws)
    }

    /// out = f(t, u), evaluating coefficient signals on the spot.
    pub fn apply(&self, t: f64, geom: &Geometry, u: &[f64], out: &mut [f64], ws: &mut Workspace) -> Result<()> {
        let tab = self.tabulate(geom, &[t])?;
        self.apply_tabulated(&tab, 0, geom, u, out, ws)
    }

    /// f(t, x) for a scalar state.
    pub fn eval_scalar(&self, t: f64, x: f64) -> Result<f64> {
        match self {
            Self::Zero => return Ok(0.0),
            Self::Pointwise(m) => return (m.g)(t, x),
            _ => {}
        }
        let mut out = [0.0];
        let mut ws = Geometry::Scalar.workspace();
        self.apply(t, &Geometry::Scalar, &[x], &mut out, &mut ws)?;
        Ok(out[0])
    }

    #[allow(clippy::too_many_arguments)]
    fn apply_core(
        &self,
        t: f64,
        coef: f64,
        profile: &[f64],
        forcing: &[f64],
        geom: &Geometry,
        u: &[f64],
        out: &mut [f64],
        ws: &mut Workspace,
    ) -> Result<()> {
        match self {
            Self::Zero => out.iter_mut().for_each(|o| *o = 0.0),
            Self::MkSaturating { .. } => {
                let s = coef / (1.0 + geom.norm(u, ws));
                for ((o, r), h) in out.iter_mut().zip(profile).zip(forcing) {
                    *o = s * r + h;
                }
            }
            Self::MkSaturatingV2 { .. } => {
                let n = geom.norm(u, ws);
                let s = coef * n / (1.0 + n);
                for ((o, q), h) in out.iter_mut().zip(profile).zip(forcing) {
                    *o = s * q + h;
                }
            }
            Self::Affine { .. } => {
                for ((o, x), h) in out.iter_mut().zip(u).zip(forcing) {
                    *o = coef * x + h;
                }
            }
            Self::Quadratic { .. } => {
                pointwise(geom, u, out, ws, |x| Ok(coef * x * x))?;
                out.iter_mut().zip(forcing).for_each(|(o, h)| *o += h);
            }
            Self::Pointwise(m) => pointwise(geom, u, out, ws, |x| (m.g)(t, x))?,
        }
        Ok(())
    }

    /// L(t) with ‖f(t,φ) − f(t,ψ)‖ ≤ |L(t)|·‖φ − ψ‖ for all φ, ψ, when known.
    /// For the saturating entries this is K(t)·‖R‖ (resp. ‖Q‖).
    pub fn lipschitz_signal(&self, geom: &Geometry) -> Result<Option<Signal>> {
        Ok(match self {
            Self::Zero => Some(Signal::Constant(0.0)),
            Self::MkSaturating { k, r, .. } => Some(k.clone().scaled(geom.profile_norm(r)?)),
            Self::MkSaturatingV2 { k, q, .. } => Some(k.clone().scaled(geom.profile_norm(q)?)),
            Self::Affine { a, .. } => Some(a.clone()),
            Self::Quadratic { .. } => None,
            Self::Pointwise(m) => m.lipschitz.clone(),
        })
    }

    /// L_ρ(t), the Lipschitz bound on the ball ‖φ‖, ‖ψ‖ ≤ ρ. For b(t)φ² this
    /// is 2ρ·b(t) in the sup norm and does not exist in L².
    pub fn ball_lipschitz_signal(&self, geom: &Geometry, rho: f64) -> Result<Option<Signal>> {
        match self {
            Self::Quadratic { b, .. } => {
                let pointwise_norm = matches!(
                    geom,
                    Geometry::Scalar
                        | Geometry::Modal {
                            norm: crate::modal::SpaceNorm::Sup,
                            ..
                        }
                );
                Ok(pointwise_norm.then(|| b.clone().scaled(2.0 * rho)))
            }
            Self::Pointwise(m) => match &m.ball_lipschitz {
                Some(f) => Ok(Some(f(rho))),
                None => Ok(m.lipschitz.clone()),
            },
            _ => self.lipschitz_signal(geom),
        }
    }

    /// t ↦ ‖f(t, 0)‖ as a signal.
    pub fn zero_response(&self, geom: &Geometry) -> Signal {
        let (f, geom) = (self.clone(), geom.clone());
        Signal::custom(format!("|{}(t,0)|", self.tag()), move |t| {
            let zero = vec![0.0; geom.dim()];
            let mut out = vec![0.0; geom.dim()];
            let mut ws = geom.workspace();
            f.apply(t, &geom, &zero, &mut out, &mut ws)?;
            Ok(geom.norm(&out, &mut ws))
        })
    }
}

fn pointwise<G>(geom: &Geometry, u: &[f64], out: &mut [f64], ws: &mut Workspace, g: G) -> Result<()>
where
    G: Fn(f64) -> Result<f64>,
{
    match geom {
        Geometry::Scalar => {
            out[0] = g(u[0])?;
        }
        Geometry::Modal { basis, .. } => {
            basis.synthesize(u, &mut ws.values);
            for (y, &x) in ws.image.iter_mut().zip(&ws.values) {
                *y = g(x)?;
            }
            basis.project(&ws.image, out);
        }
    }
    Ok(())
}
