use thiserror::Error;

/// Errors produced anywhere in the identification pipeline.
#[derive(Debug, Error)]
pub enum SysIdError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("rank-deficient matrix (condition estimate {condition:.3e})")]
    RankDeficient { condition: f64 },

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    #[error("state magnitude overflow at time index {time}")]
    InstabilityOverflow { time: usize },

    #[error("insufficient horizon: need at least {needed} Markov blocks, have {available}")]
    InsufficientHorizon { needed: usize, available: usize },

    #[error("Markov length T1 = {t1} exceeds rollout length T2 = {t2}")]
    LengthOrder { t1: usize, t2: usize },

    #[error(
        "under-excitation: input Gram matrix is singular (min eigenvalue {min_eig:.3e}); \
         need at least {needed} independent excitation columns, have {available}"
    )]
    UnderExcitation {
        min_eig: f64,
        needed: usize,
        available: usize,
    },

    #[error("incomplete dataset: {0}")]
    IncompleteDataset(String),

    #[error("system is not strictly stable (spectral radius {rho:.6})")]
    Unstable { rho: f64 },

    #[error("series did not converge within {terms} terms")]
    Convergence { terms: usize },

    #[error("not found: {0}")]
    NotFound(String),

    #[error("cannot rescale: spectral radius is zero (nilpotent matrix)")]
    CannotRescale,

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl SysIdError {
    /// True for failures of the numerical pipeline itself, as opposed to bad
    /// user-supplied input or configuration.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            SysIdError::RankDeficient { .. }
                | SysIdError::NumericFailure(_)
                | SysIdError::InstabilityOverflow { .. }
                | SysIdError::UnderExcitation { .. }
                | SysIdError::Unstable { .. }
                | SysIdError::Convergence { .. }
                | SysIdError::CannotRescale
        )
    }
}

pub type Result<T> = std::result::Result<T, SysIdError>;
