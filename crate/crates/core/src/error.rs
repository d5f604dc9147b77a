use thiserror::Error;

use crate::genome::Mode;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid genome shape: {0}")]
    Shape(String),

    #[error("gene {name} = {value} is outside [0, 1]")]
    GeneRange { name: String, value: f64 },

    #[error("node count {requested} exceeds size_max {max}")]
    Size { requested: usize, max: usize },

    #[error("node index {index} out of range ({len} addressable)")]
    Index { index: usize, len: usize },

    #[error("operator `{operator}` is not available for {mode} genomes")]
    UnsupportedOperator { operator: &'static str, mode: Mode },

    #[error("decode error: {0}")]
    Decode(String),

    #[error("expected {expected} inputs, got {got}")]
    InputLength { expected: usize, got: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("fitness evaluation failed: {0}")]
    Fitness(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
