use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Quadrature failed to reach the requested tolerance; carries the
    /// partial estimate so callers can decide whether it is still usable.
    #[error("quadrature non-convergence in {context} (partial estimate {partial:e})")]
    Quadrature { context: String, partial: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("grid error: {0}")]
    Grid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
