use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid trajectory `{point_id}`: {reason}")]
    InvalidTrajectory { point_id: String, reason: String },

    #[error("zero-extent scene")]
    ZeroExtent,

    #[error("empty scene")]
    EmptyScene,

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid interval <{start},{end}>: start must precede end")]
    InvalidInterval { start: i64, end: i64 },

    #[error("cluster members share no common frames")]
    EmptyFrameIntersection,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error(
        "exact inference needs {configurations} configurations, over the budget of {budget}; \
         use an approximate method (--method icm or --method meanfield)"
    )]
    BudgetExceeded { configurations: f64, budget: u64 },

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("label `{label}` has {count} item(s), leave-one-out with k={k} needs at least {needed}")]
    UnderpopulatedLabel {
        label: String,
        count: usize,
        k: usize,
        needed: usize,
    },

    #[error("no labeled candidates to vote")]
    NoCandidates,

    #[error("invalid rate warp: {0}")]
    InvalidWarp(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. })
    }
}
