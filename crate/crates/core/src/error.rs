use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("malformed file: {0}")]
    MalformedFile(String),

    #[error("mask position {index} out of range for length {len}")]
    MaskOutOfRange { index: usize, len: usize },

    #[error("subject too short for a judgment: n = {n} < n_min = {n_min}")]
    TooShort { n: usize, n_min: usize },

    #[error("block alignment: {0}")]
    BadBlockAlignment(String),

    #[error("search too large: {0}")]
    TooLarge(String),

    #[error("gate index {index} out of range for tape width {width}")]
    GateIndexOutOfRange { index: usize, width: usize },

    #[error("generator produced a different string (first differing bit {first_diff})")]
    GeneratorMismatch { first_diff: usize },

    #[error("no registry model contains the string")]
    NoCoveringModel,

    #[error("{k} parties exceeds the limit of {limit}")]
    TooManyParties { k: usize, limit: usize },

    #[error("relation has no fixed point for local operations {combo} (round {round})")]
    InconsistentRelation { round: usize, combo: String },

    #[error("estimated order is not transitive on the queried elements: {0}")]
    OrderInconsistent(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
