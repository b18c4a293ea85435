//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by geometry, solvers, and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    /// A constructor or operation received a value outside its domain.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Scenario validation failed; every offending field is listed.
    #[error("invalid scenario: {}", .0.join("; "))]
    InvalidScenario(Vec<String>),

    /// A search space or assignment ended up empty.
    #[error("empty search space: {0}")]
    EmptySearchSpace(String),

    /// An optimizer could not produce a feasible solution.
    #[error("solver failure: {0}")]
    SolverFailure(String),

    /// File or serialization problem while reading/writing configs or reports.
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// Malformed configuration or report document.
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Shorthand for [`Error::InvalidInput`] from any displayable message.
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
