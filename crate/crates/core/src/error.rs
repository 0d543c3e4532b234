//! Error type shared by every module. Variants distinguish bad input and
//! bad physics domains (caller error) from iteration failures (numerical
//! error), so the command-line layer can map them to distinct exit codes.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Arguments outside the mathematical domain of an operation
    /// (e.g. open-channel phase requested below threshold).
    #[error("domain error: {0}")]
    Domain(String),

    /// A quantity left the range the algorithm can represent or reach
    /// (e.g. integration span exhausted before convergence of a limit).
    #[error("range error: {0}")]
    Range(String),

    /// Malformed user input: config files, potential tables, CLI values.
    #[error("input error: {0}")]
    Input(String),

    /// An iterative scheme failed to converge within its budget.
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// A requested discretization exceeds a hard size limit.
    #[error("size error: {0}")]
    Size(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for failures of an iterative numerical scheme, as opposed to
    /// invalid input or out-of-domain requests.
    pub fn is_convergence(&self) -> bool {
        matches!(self, Error::Convergence(_))
    }
}
