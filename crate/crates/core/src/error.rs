use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A periodized sum could not be truncated within the configured budget.
    #[error("truncation failed: tail bound {achieved:e} after {terms} terms exceeds tolerance {tolerance:e}")]
    TruncationFailure {
        achieved: f64,
        terms: usize,
        tolerance: f64,
    },

    #[error("cutoff below signal band: T/Tc = {ratio} < 1")]
    CutoffBelowBand { ratio: f64 },

    /// The stacked system loses column rank; `omegas` lists where.
    #[error("rank deficiency at {} frequencies (first at ω = {})", .omegas.len(), .omegas.first().copied().unwrap_or(f64::NAN))]
    RankDeficient { omegas: Vec<f64> },

    #[error("recovered energy outside declared support is {leaked:e}, above allowed {allowed:e}")]
    SupportTooSmall { leaked: f64, allowed: f64 },

    #[error("no built-in Hadamard matrix of order {0}; use the random ±1 strategy instead")]
    UnsupportedHadamardOrder(usize),

    #[error("no invertible ±1 design found after {0} draws")]
    RetriesExhausted(usize),

    #[error("schema violation: {0}")]
    Schema(String),

    #[error("linear algebra failure: {0}")]
    Linalg(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
