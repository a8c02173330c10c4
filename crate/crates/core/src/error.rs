use thiserror::Error;

/// Errors raised by the kernels, series and oracles.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("derivative of order {requested} unavailable (trajectory provides up to {available})")]
    UnsupportedOrder { requested: usize, available: usize },

    #[error("series did not converge after {terms} terms (truncation estimate {estimate:e}, tolerance {tol:e})")]
    NonConvergence { terms: usize, estimate: f64, tol: f64 },

    #[error("quadrature failed on [{a}, {b}]: error estimate {error:e} after {evaluations} evaluations")]
    Quadrature {
        a: f64,
        b: f64,
        error: f64,
        evaluations: usize,
    },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
