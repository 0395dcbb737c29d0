use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),

    #[error("unknown attribute `{attribute}` in relation `{relation}`")]
    UnknownAttribute { relation: String, attribute: String },

    #[error("invalid schema: {0}")]
    InvalidSchema(String),

    #[error("fact of relation `{relation}` has {actual} values, expected {expected}")]
    ArityMismatch { relation: String, expected: usize, actual: usize },

    #[error("duplicate fact in relation `{relation}`: rows {first} and {second} are identical")]
    DuplicateFact { relation: String, first: usize, second: usize },

    #[error("fact `{0}` is not in the database")]
    FactNotFound(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{path}: {message}")]
    Load { path: PathBuf, message: String },

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("exact {measure} Shapley values are intractable for relation `{relation}` ({class})")]
    IntractableExact { measure: String, relation: String, class: String },

    #[error("search budget of {budget} nodes exceeded on a coalition of {coalition_size} facts")]
    BudgetExceeded { budget: u64, coalition_size: usize },

    #[error("{what} supports at most {limit} facts, got {actual}")]
    SizeLimit { what: &'static str, limit: usize, actual: usize },

    #[error("unsupported approximation mode: {0}")]
    UnsupportedMode(String),

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Refusals are well-formed requests the engine declines to answer
    /// (intractable class, size limits, exhausted search budgets).
    pub fn is_refusal(&self) -> bool {
        matches!(
            self,
            Error::IntractableExact { .. }
                | Error::SizeLimit { .. }
                | Error::BudgetExceeded { .. }
                | Error::UnsupportedMode(_)
        )
    }

    /// Stable machine-readable name of the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::UnknownRelation(_) => "UnknownRelation",
            Error::UnknownAttribute { .. } => "UnknownAttribute",
            Error::InvalidSchema(_) => "InvalidSchema",
            Error::ArityMismatch { .. } => "ArityMismatch",
            Error::DuplicateFact { .. } => "DuplicateFact",
            Error::FactNotFound(_) => "FactNotFound",
            Error::Parse { .. } => "ParseError",
            Error::Load { .. } => "LoadError",
            Error::ContractViolation(_) => "ContractViolation",
            Error::IntractableExact { .. } => "IntractableExact",
            Error::BudgetExceeded { .. } => "BudgetExceeded",
            Error::SizeLimit { .. } => "SizeLimit",
            Error::UnsupportedMode(_) => "UnsupportedMode",
            Error::InvalidParams(_) => "InvalidParams",
            Error::Io(_) => "Io",
        }
    }
}
