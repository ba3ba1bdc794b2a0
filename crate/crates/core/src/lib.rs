//! Stepanov and Bohr almost-periodicity diagnostics, measure-weighted ergodic
//! means, Mittag-Leffler resolvent kernels and fixed-point solvers for
//! pseudo almost periodic mild solutions of semilinear evolution problems.

pub mod error;
pub mod evosolve;
pub mod fixedpoint;
pub mod fracsolve;
pub mod funcspace;
pub mod kernel;
pub mod measure;
pub mod modal;
pub mod nonlinearity;
pub mod quadrature;
pub mod special;

pub use error::{Error, Result};
pub use funcspace::{Signal, StepanovExponent, Window};
pub use kernel::FractionalKernelSpec;
pub use measure::MeasureDensity;
pub use modal::{Geometry, SpaceNorm};
pub use nonlinearity::{Forcing, NonlinearitySpec};
