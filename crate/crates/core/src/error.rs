use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid array geometry: {0}")]
    Geometry(String),

    #[error("no minimum-redundancy layout stored for M = {requested}; available sizes: {available:?}")]
    UnsupportedMra {
        requested: usize,
        available: Vec<usize>,
    },

    #[error("invalid source scenario: {0}")]
    Scenario(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("{sources} sources cannot be handled by a virtual ULA of half-size {mv} (need K < Mv)")]
    TooManySources { sources: usize, mv: usize },

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("empty angle grid")]
    EmptyGrid,

    #[error("covariance matrix is singular or not positive definite (min eigenvalue {min_eig:e})")]
    SingularCovariance { min_eig: f64 },

    #[error("CRB undefined: dr/d(eta) has rank {rank} < {cols} columns")]
    CrbUndefined { rank: usize, cols: usize },

    #[error("source powers must be equal for the limiting MSE")]
    UnequalPowers,

    #[error("resolution criterion needs exactly 2 sources, got {0}")]
    NotTwoSources(usize),

    #[error("config error: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
