use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite functional value {value} at direction {direction:?}")]
    Evaluation { direction: Vec<(f64, f64)>, value: f64 },

    #[error("point is not interior (margin {margin})")]
    NotInterior { margin: f64 },

    #[error("zero tangent vector")]
    ZeroVector,

    #[error("unbounded: {0}")]
    Unbounded(String),

    #[error("unsupported domain kind for {operation}: {kind}")]
    UnsupportedKind { operation: &'static str, kind: String },

    #[error("singularity: {0}")]
    Singularity(String),

    #[error("linear map is not invertible (|det| = {det_abs})")]
    NotInvertible { det_abs: f64 },

    #[error("schedule point {index} leaves the domain (margin {margin})")]
    Schedule { index: usize, margin: f64 },

    #[error("box lemma violated at {witness:?} (slack {slack})")]
    LemmaViolation { witness: Vec<f64>, slack: f64 },

    #[error("point is too far from the corner: {0}")]
    Proximity(String),

    #[error("corner is not normal: {0}")]
    Normality(String),

    #[error("embedding is not injective on samples (round-trip error {error})")]
    Fold { error: f64 },

    #[error("sample budget {given} below the minimum {minimum}")]
    SampleBudget { given: usize, minimum: usize },

    #[error("invalid domain specification{}: {message}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Spec { message: String, line: Option<usize> },

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub fn spec(message: impl Into<String>) -> Self {
        Error::Spec { message: message.into(), line: None }
    }
}
