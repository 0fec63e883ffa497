use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Error)]
pub enum Error {
    /// Inconsistent or malformed sampling grid.
    #[error("grid error: {0}")]
    Grid(String),
    /// A query fell outside the range a table or series covers.
    #[error("range error: {0}")]
    Range(String),
    /// Invalid configuration or argument.
    #[error("configuration error: {0}")]
    Config(String),
    /// A state violates a structural invariant (positivity, concavity, ...).
    #[error("degenerate state: {0}")]
    Degenerate(String),
    /// An ODE or PDE integration could not proceed.
    #[error("integration failure: {0}")]
    Integration(String),
}

pub type Result<T> = std::result::Result<T, Error>;
