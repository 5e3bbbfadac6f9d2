use std::path::PathBuf;

use serde_json::{json, Value};
use thiserror::Error;

use siband_core::Error as CoreError;

/// Exit codes: 0 success, 1 I/O or unexpected, 2 bad input, 3 not
/// recoverable, 4 numerical failure.
#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("{0}")]
    Usage(String),

    #[error("no shift mixer keeps the spectrum away from zero")]
    NoShiftFound,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("measurement CSV: {0}")]
    Csv(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => match e {
                CoreError::InvalidParameter(_) => "invalid_parameter",
                CoreError::Schema(_) => "schema",
                CoreError::UnsupportedHadamardOrder(_) => "unsupported_hadamard_order",
                CoreError::CutoffBelowBand { .. } => "cutoff_below_band",
                CoreError::RankDeficient { .. } => "rank_deficient",
                CoreError::SupportTooSmall { .. } => "support_too_small",
                CoreError::TruncationFailure { .. } => "truncation_failure",
                CoreError::Linalg(_) => "linalg",
                CoreError::RetriesExhausted(_) => "retries_exhausted",
            },
            CliError::Usage(_) => "usage",
            CliError::NoShiftFound => "no_shift_found",
            CliError::Io { .. } => "io",
            CliError::Csv(_) => "schema",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e {
                CoreError::InvalidParameter(_) | CoreError::Schema(_) | CoreError::UnsupportedHadamardOrder(_) => 2,
                CoreError::CutoffBelowBand { .. } | CoreError::RankDeficient { .. } | CoreError::SupportTooSmall { .. } => 3,
                CoreError::TruncationFailure { .. } | CoreError::Linalg(_) | CoreError::RetriesExhausted(_) => 4,
            },
            CliError::Usage(_) | CliError::Csv(_) => 2,
            CliError::NoShiftFound => 3,
            CliError::Io { .. } => 1,
        }
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "error": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        });
        if let CliError::Core(CoreError::RankDeficient { omegas }) = self {
            v["omegas"] = json!(omegas);
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_are_distinct_per_class() {
        let schema = CliError::from(CoreError::Schema("x".into()));
        let rank = CliError::from(CoreError::RankDeficient { omegas: vec![0.5] });
        let trunc = CliError::from(CoreError::TruncationFailure {
            achieved: 1.0,
            terms: 3,
            tolerance: 1e-12,
        });
        assert_eq!((schema.exit_code(), rank.exit_code(), trunc.exit_code()), (2, 3, 4));
        assert_eq!(rank.to_json()["omegas"][0], 0.5);
        assert_eq!(schema.to_json()["error"], "schema");
    }
}
