use thiserror::Error;

/// Errors raised by the jitter toolkit.
#[derive(Debug, Error)]
pub enum JitterError {
    #[error("invalid spike train: {0}")]
    InvalidTrain(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("operation requires a discrete-time train (resolution > 0)")]
    RequiresDiscrete,

    #[error("operation requires a continuous-time train (resolution = 0)")]
    RequiresContinuous,

    #[error("window {window} holds {count} spikes but only {bins} bins")]
    WindowOverfull { window: usize, count: usize, bins: usize },

    #[error("ensemble too small: need at least {need} surrogates, got {got}")]
    EnsembleTooSmall { need: usize, got: usize },

    #[error("ensemble curves have inconsistent lengths")]
    RaggedEnsemble,

    #[error("empty component list")]
    NoComponents,

    #[error("{0}")]
    Infeasible(String),

    #[error("data error at line {line}: {reason}")]
    Data { line: usize, reason: String },

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("p-values from basic jitter are heuristic; pass the heuristic flag to report them")]
    HeuristicRefused,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl JitterError {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        JitterError::InvalidParameter { name, reason: reason.into() }
    }

    /// True for errors caused by the input data rather than by the configuration.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            JitterError::InvalidTrain(_)
                | JitterError::Data { .. }
                | JitterError::WindowOverfull { .. }
                | JitterError::RequiresDiscrete
                | JitterError::RequiresContinuous
                | JitterError::Io(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, JitterError>;
