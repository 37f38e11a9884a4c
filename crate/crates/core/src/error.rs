use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("{algorithm} needs a population of at least {needed}, got {got}")]
    InsufficientPopulation {
        algorithm: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("problem {problem} is single-objective")]
    SingleObjective { problem: String },

    #[error("algorithm {algorithm} cannot solve problem {problem} with {objectives} objective(s)")]
    IncompatibleArity {
        algorithm: String,
        problem: String,
        objectives: usize,
    },

    #[error("unknown {kind} id `{id}`")]
    UnknownId { kind: &'static str, id: String },

    #[error("evaluation failed for rows {start}..{end}: {message}")]
    Evaluation {
        start: usize,
        end: usize,
        message: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("transform file {path}: {message}")]
    Transform { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
