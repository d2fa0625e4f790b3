use thiserror::Error;

/// Errors raised by the numerical and configuration layers.
#[derive(Debug, Error)]
pub enum WclError {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{what} did not converge: achieved error {achieved:.3e}, requested {requested:.3e}")]
    NonConvergence {
        what: String,
        achieved: f64,
        requested: f64,
    },

    #[error("singular matrix: |det| = {0:.3e}")]
    Singular(f64),

    #[error("grid too small: boundary mass {boundary_mass:.3e} exceeds {limit:.1e}")]
    GridTooSmall { boundary_mass: f64, limit: f64 },

    #[error("symbol is not real: max |Im| / (1 + |value|) = {0:.3e}")]
    ComplexSymbol(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, WclError>;

pub(crate) fn arg_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(WclError::Argument(msg.into()))
}
