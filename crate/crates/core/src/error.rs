use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("space mismatch: expected {expected}, found {found}")]
    SpaceMismatch { expected: String, found: String },

    #[error("invalid index: {0}")]
    InvalidIndex(String),

    #[error("operator norm exceeds 1 (largest singular value {norm})")]
    OperatorNormExceedsOne { norm: f64 },

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("operator is not an isometry ({class}); use the contraction solver")]
    NotIsometric { class: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("limit not exactly computable: {0}")]
    NotExactlyComputable(String),

    #[error("valuation of 0 is undefined")]
    ZeroMode,

    #[error("fourier mode outside representable range")]
    ModeOverflow,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("window is empty")]
    EmptyWindow,

    #[error("window does not cover the support: {0}")]
    WindowMissingSupport(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("invalid json at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid input file: {0}")]
    Parse(String),
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Json {
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }
}
