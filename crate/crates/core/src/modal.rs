//! State spaces of the spectral solvers: a scalar line, or the span of the
//! first M Dirichlet eigenfunctions e_k(x) = √(2/π) sin(kx) on (0, π).

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcspace::GridSignal;

/// Discrete sine transform between M mode coefficients and J interior
/// points x_j = jπ/(J+1). The projection is exact for J ≥ M.
#[derive(Debug, Clone, PartialEq)]
pub struct SineBasis {
    modes: usize,
    points: usize,
    /// Row j holds e_k(x_j) for k = 1..=M.
    table: Vec<f64>,
}

impl SineBasis {
    /// Default collocation: J = 4M points, enough to dealias a quadratic term.
    pub fn new(modes: usize) -> Result<Self> {
        Self::with_points(modes, 4 * modes)
    }

    pub fn with_points(modes: usize, points: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::arg("at least one mode is required"));
        }
        if points < modes {
            return Err(Error::arg(format!("{points} collocation points cannot resolve {modes} modes")));
        }
        let c = (2.0 / PI).sqrt();
        let mut table = Vec::with_capacity(points * modes);
        for j in 1..=points {
            let x = j as f64 * PI / (points + 1) as f64;
            table.extend((1..=modes).map(|k| c * (k as f64 * x).sin()));
        }
        Ok(Self { modes, points, table })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn nodes(&self) -> Vec<f64> {
        (1..=self.points)
            .map(|j| j as f64 * PI / (self.points + 1) as f64)
            .collect()
    }

    /// u(x_j) = Σ_k c_k e_k(x_j).
    pub fn synthesize(&self, coefs: &[f64], values: &mut [f64]) {
        for (v, row) in values.iter_mut().zip(self.table.chunks_exact(self.modes)) {
            *v = row.iter().zip(coefs).map(|(e, c)| e * c).sum();
        }
    }

    /// c_k = (π/(J+1)) Σ_j g(x_j) e_k(x_j).
    pub fn project(&self, values: &[f64], coefs: &mut [f64]) {
        coefs.iter_mut().for_each(|c| *c = 0.0);
        for (&g, row) in values.iter().zip(self.table.chunks_exact(self.modes)) {
            for (c, e) in coefs.iter_mut().zip(row) {
                *c += g * e;
            }
        }
        let w = PI / (self.points + 1) as f64;
        coefs.iter_mut().for_each(|c| *c *= w);
    }
}

/// Norm of the state space X.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpaceNorm {
    /// L²(0, π), the Euclidean norm of the coefficients.
    L2,
    /// Maximum over the collocation points.
    Sup,
}

/// How a state vector is read as an element of X.
#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    /// One real unknown; norm |u|.
    Scalar,
    Modal { basis: Arc<SineBasis>, norm: SpaceNorm },
}

/// Scratch buffers for pointwise evaluation.
#[derive(Debug, Clone, Default)]
pub struct Workspace {
    pub(crate) values: Vec<f64>,
    pub(crate) image: Vec<f64>,
}

impl Geometry {
    pub fn modal(modes: usize, norm: SpaceNorm) -> Result<Self> {
        Ok(Self::Modal {
            basis: Arc::new(SineBasis::new(modes)?),
            norm,
        })
    }

    /// Length of a state vector.
    pub fn dim(&self) -> usize {
        match self {
            Self::Scalar => 1,
            Self::Modal { basis, .. } => basis.modes,
        }
    }

    pub fn workspace(&self) -> Workspace {
        let n = match self {
            Self::Scalar => 1,
            Self::Modal { basis, .. } => basis.points,
        };
        Workspace {
            values: vec![0.0; n],
            image: vec![0.0; n],
        }
    }

    /// ‖u‖_X.
    pub fn norm(&self, u: &[f64], ws: &mut Workspace) -> f64 {
        match self {
            Self::Scalar => u[0].abs(),
            Self::Modal { norm: SpaceNorm::L2, .. } => u.iter().map(|c| c * c).sum::<f64>().sqrt(),
            Self::Modal {
                basis,
                norm: SpaceNorm::Sup,
            } => {
                basis.synthesize(u, &mut ws.values);
                ws.values.iter().fold(0.0, |m, v| m.max(v.abs()))
            }
        }
    }

    /// ‖u − v‖_X.
    pub fn distance(&self, u: &[f64], v: &[f64], ws: &mut Workspace) -> f64 {
        let diff: Vec<f64> = u.iter().zip(v).map(|(a, b)| a - b).collect();
        self.norm(&diff, ws)
    }

    /// Coefficients of x ↦ Σ_k a_k sin(kx) (a scalar value for the scalar geometry).
    pub fn profile_coefficients(&self, amplitudes: &[f64]) -> Result<Vec<f64>> {
        match self {
            Self::Scalar => match amplitudes {
                [a] => Ok(vec![*a]),
                _ => Err(Error::arg("a scalar problem takes a one-entry profile")),
            },
            Self::Modal { basis, .. } => {
                if amplitudes.len() > basis.modes {
                    return Err(Error::arg(format!(
                        "profile has {} modes but the solve keeps {}",
                        amplitudes.len(),
                        basis.modes
                    )));
                }
                let c = (PI / 2.0).sqrt();
                let mut out = vec![0.0; basis.modes];
                out.iter_mut().zip(amplitudes).for_each(|(o, a)| *o = c * a);
                Ok(out)
            }
        }
    }

    /// ‖Σ_k a_k sin(kx)‖_X, the sup norm taken on a fine grid rather than the
    /// collocation points so that it bounds the continuous profile.
    pub fn profile_norm(&self, amplitudes: &[f64]) -> Result<f64> {
        let coefs = self.profile_coefficients(amplitudes)?;
        Ok(match self {
            Self::Modal {
                norm: SpaceNorm::Sup, ..
            } => fine_grid(amplitudes).fold(0.0, |m, v| m.max(v.abs())),
            _ => {
                let mut ws = self.workspace();
                self.norm(&coefs, &mut ws)
            }
        })
    }

    /// Minimum of the profile over a fine grid (its own value for the scalar geometry).
    pub fn profile_minimum(&self, amplitudes: &[f64]) -> Result<f64> {
        match self {
            Self::Scalar => self.profile_coefficients(amplitudes).map(|c| c[0]),
            Self::Modal { .. } => Ok(fine_grid(amplitudes).fold(f64::INFINITY, f64::min)),
        }
    }

    /// Field values u(x) at arbitrary points of (0, π).
    pub fn field_at(&self, u: &[f64], xs: &[f64]) -> Vec<f64> {
        match self {
            Self::Scalar => vec![u[0]; xs.len()],
            Self::Modal { .. } => {
                let c = (2.0 / PI).sqrt();
                xs.iter()
                    .map(|&x| {
                        u.iter()
                            .enumerate()
                            .map(|(k, a)| c * a * ((k + 1) as f64 * x).sin())
                            .sum()
                    })
                    .collect()
            }
        }
    }
}

/// Samples u(t, x) on a time × space grid, row-major in time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Field {
    pub times: Vec<f64>,
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
}

impl Field {
    /// `n` equispaced points on [0, π], ends included.
    pub fn default_points(n: usize) -> Vec<f64> {
        let n = n.max(2);
        (0..n).map(|j| j as f64 * PI / (n - 1) as f64).collect()
    }

    /// Synthesises the field of mode-coefficient states on a grid signal.
    pub fn from_grid(geom: &Geometry, states: &GridSignal, xs: &[f64]) -> Self {
        let times: Vec<f64> = (0..states.len()).map(|i| states.start() + i as f64 * states.step()).collect();
        let values = (0..states.len())
            .flat_map(|i| geom.field_at(states.sample(i), xs))
            .collect();
        Self {
            times,
            xs: xs.to_vec(),
            values,
        }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.xs.len() + j]
    }

    /// max |u(t, x)| over the samples.
    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Values of Σ_k a_k sin(kx) on 4095 interior points of (0, π).
fn fine_grid(amplitudes: &[f64]) -> impl Iterator<Item = f64> + '_ {
    (1..4096).map(move |j| {
        let x = j as f64 * PI / 4096.0;
        amplitudes
            .iter()
            .enumerate()
            .map(|(k, a)| a * ((k + 1) as f64 * x).sin())
            .sum::<f64>()
    })
}
