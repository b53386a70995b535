use thiserror::Error;

/// Errors raised by the solver.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum BgkError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("spectral value {re}{im:+}i lies within {tolerance:e} of the spectrum")]
    SpectralProximity { re: f64, im: f64, tolerance: f64 },

    #[error("singular perturbation determinant at lambda = {re}{im:+}i")]
    SingularResolvent { re: f64, im: f64 },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("refinement failure: {0}")]
    Refinement(String),

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("invalid input class: {0}")]
    InvalidInputClass(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for BgkError {
    fn from(err: std::io::Error) -> Self {
        BgkError::Io(err.to_string())
    }
}

impl From<serde_json::Error> for BgkError {
    fn from(err: serde_json::Error) -> Self {
        BgkError::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, BgkError>;
