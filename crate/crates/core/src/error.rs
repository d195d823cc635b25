use thiserror::Error;

/// Errors raised by the numerical layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not unimodular: ad - bc = {det}")]
    NotUnimodular { det: f64 },

    #[error("b = 0 branch out of scope")]
    DegenerateB,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("incompatible grids: {0}")]
    GridMismatch(String),

    #[error("translation {lambda} is not an integer multiple of the grid step {step}")]
    OffGrid { lambda: f64, step: f64 },

    #[error("dilation level {level} exceeds the grid's level budget {max}")]
    LevelOverflow { level: i32, max: u32 },

    #[error("grid count {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("non-finite sample at index {0}")]
    NonFinite(usize),

    #[error("infinite product did not converge: tail deviation {deviation:e} exceeds {tol:e}")]
    NotConverged { deviation: f64, tol: f64 },

    #[error("condition {condition} violated: residual {residual:e} exceeds {tol:e}")]
    ConditionViolated {
        condition: String,
        residual: f64,
        tol: f64,
    },

    #[error("basis is not certified: max |G - I| = {residual:e} exceeds {tol:e}")]
    UncertifiedBasis { residual: f64, tol: f64 },

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
