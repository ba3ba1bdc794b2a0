use std::fmt;

use stepanov_core::Error;

pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_REFUSED: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed scenario, bad flag values.
    Config(String),
    /// A theorem hypothesis failed with a negative margin.
    Refused { reason: String, margin: f64 },
    /// Numerical failure inside a module operation.
    Numeric(Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Refused { .. } => EXIT_REFUSED,
            _ => EXIT_CONFIG,
        }
    }
}

fn refusal(e: &Error) -> Option<(String, f64)> {
    match e {
        Error::Refused { reason, margin } => Some((reason.clone(), *margin)),
        Error::Iteration { source, .. } => refusal(source),
        _ => None,
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if let Some((reason, margin)) = refusal(&e) {
            return CliError::Refused { reason, margin };
        }
        match e {
            Error::Config(msg) => CliError::Config(msg),
            other => CliError::Numeric(other),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Refused { reason, margin } => {
                write!(f, "hypothesis refused: {reason}\nmargin: {}", crate::output::number(*margin))
            }
            CliError::Numeric(e) => write!(f, "{e}"),
            CliError::Io(msg) => write!(f, "I/O error: {msg}"),
        }
    }
}
