use thiserror::Error;

/// Errors produced while validating inputs or evaluating measurement quantities.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("state must have dimension >= 2, got {0}")]
    DimensionTooSmall(usize),

    #[error("state is not normalized: |psi| = {norm}")]
    NotNormalized { norm: f64 },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian: max |H_ij - conj(H_ji)| = {max_asymmetry:e}")]
    NotHermitian { max_asymmetry: f64 },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("measurement strength must be positive and finite, got {0}")]
    InvalidStrength(f64),

    #[error("pointer outcome must be finite, got {0}")]
    InvalidOutcome(f64),

    #[error("outcome in exponentially suppressed tail (density {density:e} below floor)")]
    SuppressedOutcome { density: f64 },

    #[error("unsupported moment order {0}; only 1 and 2 are available")]
    UnsupportedMoment(u32),

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("{quantity} has imaginary residue {residue:e}")]
    NotReal { quantity: &'static str, residue: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("sample count must be positive")]
    NoSamples,

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Whether the error stems from malformed input rather than a failed evaluation.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::SuppressedOutcome { .. } | Error::NotReal { .. } | Error::NonFinite(_)
        )
    }
}
