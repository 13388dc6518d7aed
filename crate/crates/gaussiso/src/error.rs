//! Crate-wide error type.
//!
//! Numerical routines distinguish between *domain* violations (caller error),
//! *convergence* failures (iteration budgets exhausted), and *integrability*
//! problems (a weight whose tail cannot be bounded). Geometry and PDE inputs
//! add their own kinds. Config parsing reports the offending line.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of the operation.
    #[error("domain: {0}")]
    Domain(String),

    /// An iteration failed to reach its tolerance within the budget.
    #[error("convergence: {0}")]
    Convergence(String),

    /// A weight integral diverges or its tail cannot be bounded.
    #[error("integrability: {0}")]
    Integrability(String),

    /// Invalid region description (empty, overlapping, not Lipschitz, ...).
    #[error("region: {0}")]
    Region(String),

    /// Coefficient field violates symmetry or the ellipticity sandwich.
    #[error("coefficient: {0}")]
    Coefficient(String),

    /// Input data fails a documented precondition.
    #[error("precondition: {0}")]
    Precondition(String),

    /// Experiment-file syntax or schema error, with its 1-based line number.
    #[error("line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(line: usize, msg: impl Into<String>) -> Self {
        Error::Config {
            line,
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
