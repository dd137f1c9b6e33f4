use std::path::PathBuf;

use thiserror::Error;

use crate::model::BusId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("alpha {0} is outside [0, 1]")]
    AlphaOutOfRange(f64),

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid case: {element}: {message}")]
    Semantic { element: String, message: String },

    #[error("unsupported schema version `{0}`")]
    SchemaVersion(String),

    #[error("network failed validation: {0}")]
    InvalidNetwork(String),

    #[error("unknown bus {0}")]
    UnknownBus(BusId),

    #[error("unknown line `{0}`")]
    UnknownLine(String),

    #[error("oracle grid needs {needed} LP solves, cap is {cap}")]
    OracleCapExceeded { needed: u128, cap: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("linear algebra failure: {0}")]
    Numerical(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
