use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("fixed-point iteration did not converge after {0} iterations")]
    NoConvergence(usize),

    #[error("operation requires d = 1, got d = {0}")]
    DimensionMismatch(usize),

    #[error("exploration already terminated")]
    Terminated,

    #[error("infeasible domination: need E(D)/2 - epsilon - L*delta > 0 and gamma <= 1, got {0}")]
    InfeasibleDomination(f64),

    #[error("lazy walk table of {0} entries exceeds the size guard")]
    TableTooLarge(u128),

    #[error("edge list row {row}: {msg}")]
    EdgeList { row: usize, msg: String },

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Validation errors map to exit code 1, everything else to 2.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::Csv(_) | Error::NoConvergence(_))
    }
}
