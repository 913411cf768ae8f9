use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unresolved symbol `{0}`")]
    UnresolvedSymbol(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("coordinate index {index} out of range for a {n}-degree-of-freedom point")]
    CoordinateOutOfRange { index: usize, n: usize },

    #[error("invalid phase point: {0}")]
    InvalidPoint(String),

    #[error("finite-difference step must be positive, got {0}")]
    BadStep(f64),

    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),

    #[error("parameter mismatch: {0}")]
    ParameterMismatch(String),

    #[error("l - r = {0} is odd, no generic realization dimension")]
    OddDimension(i64),

    #[error("fixed-point iteration did not converge after {iterations} iterations (residual {residual:e}); try a smaller step")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("singular locus reached: {0}")]
    Singular(String),

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("unknown system `{0}`")]
    UnknownSystem(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Attach the offending sample point to a domain error.
    pub fn at_point(self, q: &[f64], p: &[f64]) -> Error {
        match self {
            Error::Domain(msg) => Error::Domain(format!("{msg} at q={q:?}, p={p:?}")),
            other => other,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
