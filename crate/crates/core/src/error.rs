use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// `Refused` is reserved for hypothesis checks of the existence theorems
/// that fail with a negative margin; every other failure is either a bad
/// argument, a bad configuration, or a numerical range problem.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("evaluation at t = {t} lies outside the signal domain [{start}, {end}]")]
    Domain { t: f64, start: f64, end: f64 },

    #[error("range error: {0}")]
    Range(String),

    #[error("divergent integral: {0}")]
    Divergence(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("hypothesis refused: {reason} (margin {margin:.6e})")]
    Refused { reason: String, margin: f64 },

    #[error("iteration {iteration}: {source}")]
    Iteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// True for the hypothesis-refusal outcome.
    pub fn is_refusal(&self) -> bool {
        match self {
            Error::Refused { .. } => true,
            Error::Iteration { source, .. } => source.is_refusal(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
