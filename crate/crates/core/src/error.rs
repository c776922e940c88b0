use thiserror::Error;

use crate::digraph::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid digraph: {0}")]
    Invalid(Violation),

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("{what} = {value} exceeds the supported maximum {max}")]
    SizeLimit {
        what: &'static str,
        value: usize,
        max: usize,
    },

    #[error("budget exceeded: {needed} {what} requested, budget is {budget}")]
    Budget {
        what: &'static str,
        needed: u128,
        budget: u128,
    },

    #[error("rejection sampling gave up after {attempts} attempts")]
    RejectionCap { attempts: u64 },

    #[error("digraph is not strongly connected")]
    NotStronglyConnected,

    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    #[error("manifest mismatch: {0}")]
    Manifest(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::Budget { .. } | Error::RejectionCap { .. })
    }
}
