use darksol_core::{Error, ErrorClass};
use thiserror::Error as ThisError;

#[derive(Debug, ThisError)]
pub enum CliError {
    /// Bad input: config, schema, or a model invariant.
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    NonConvergence(String),
    /// Converged, but a checked property does not hold.
    #[error("{0}")]
    Property(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::NonConvergence(_) => 3,
            CliError::Property(_) => 4,
            CliError::Io(_) => 1,
        }
    }

    /// Wraps a core error with the name of the stage that raised it.
    pub fn from_core(stage: &str, e: Error) -> CliError {
        let msg = format!("{stage}: {e}");
        match e.class() {
            ErrorClass::Validation => CliError::Validation(msg),
            ErrorClass::NonConvergence | ErrorClass::Numerical => CliError::NonConvergence(msg),
        }
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> CliError {
        CliError::Io(format!("{}: {e}", path.display()))
    }
}

/// `map_err` helper tagging core errors with a stage name.
pub fn at(stage: &'static str) -> impl Fn(Error) -> CliError {
    move |e| CliError::from_core(stage, e)
}

pub type CliResult<T> = Result<T, CliError>;
