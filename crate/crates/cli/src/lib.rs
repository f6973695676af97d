//! IO companion for the BGND solver core: JSON instance and report formats,
//! a seeded instance generator, and the solve/evaluate pipeline behind the
//! `bgnd` binary.

pub mod format;
pub mod gen;
pub mod pipeline;

/// Process-level error classes; each maps to a distinct exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Exit 1.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    /// Malformed document (position included). Exit 2.
    #[error("parse error: {0}")]
    Parse(String),
    /// Semantically invalid instance, report, or flag combination. Exit 2.
    #[error("validation error: {0}")]
    Validation(String),
    /// The empirical ratio exceeded the proven bound: a solver bug. Exit 3.
    #[error("bound violated: empirical {empirical} > theoretical {theoretical}")]
    BoundViolated { empirical: f64, theoretical: f64 },
}

impl From<bgnd_core::Error> for CliError {
    fn from(err: bgnd_core::Error) -> Self {
        CliError::Validation(err.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Parse(_) | CliError::Validation(_) => 2,
            CliError::BoundViolated { .. } => 3,
        }
    }
}
