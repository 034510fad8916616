use thiserror::Error;

/// Errors raised by the risk, geometry and market layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid level {0}: must lie strictly inside (0, 1)")]
    InvalidLevel(f64),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("empty constraint list")]
    EmptyConstraints,

    #[error("empty point set")]
    EmptyPoints,

    #[error("region is the whole plane: {0}")]
    WholePlane(String),

    #[error("clipped region is empty inside the window")]
    EmptyClip,

    #[error("direction {0:?} is not in the nonnegative orthant")]
    DirectionOutsideOrthant(Vec<f64>),

    #[error("scenario ensemble has no exchange-rate column")]
    MissingRates,

    #[error("strategy `{strategy}` does not apply to portfolio kind `{kind}`")]
    KindMismatch { strategy: String, kind: String },

    #[error("risk components must be identical for this bound")]
    NonIdenticalComponents,

    #[error("risk kind `{0}` is not coherent; set-valued bounds need a coherent component")]
    NotCoherent(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("line {line}: {message}")]
    Csv { line: usize, message: String },

    #[error("io: {0}")]
    Io(String),

    #[error("linear program failed: {0}")]
    Lp(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
