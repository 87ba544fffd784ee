//! Crate-wide error types.

use thiserror::Error;

/// Errors produced by attribution, evaluation and I/O paths.
#[derive(Debug, Error)]
pub enum Error {
    #[error("document or query id must be non-empty")]
    EmptyId,

    #[error("feature space is empty: query and documents contain no tokens")]
    EmptyFeatureSpace,

    #[error("an instance needs at least two documents, got {0}")]
    TooFewDocuments(usize),

    #[error("duplicate document id {0:?} in instance")]
    DuplicateDocId(String),

    #[error("coalition has {got} bits but the feature space has {expected}")]
    CoalitionSize { expected: usize, got: usize },

    #[error("no relevance label for document {0:?}")]
    MissingRelevance(String),

    #[error("relevance label for document {id:?} is negative ({rel})")]
    NegativeRelevance { id: String, rel: f64 },

    #[error("rankings cover different document sets")]
    DocSetMismatch,

    #[error("exact enumeration needs 2^{m} coalition values, above the limit 2^{limit}")]
    EnumerationLimit { m: usize, limit: usize },

    #[error(
        "kernel system is singular: {distinct} distinct coalitions for {m} features; \
         increase n_samples"
    )]
    InsufficientCoalitions { distinct: usize, m: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("numerical solve failed: {0}")]
    Numeric(String),

    #[error("top-k of {k} exceeds the {n} candidate documents")]
    InvalidTopK { k: usize, n: usize },

    #[error("attribution has {got} values but the feature space has {expected}")]
    AttributionSize { expected: usize, got: usize },

    #[error("attribution contains a non-finite value at feature {0}")]
    NonFiniteAttribution(usize),

    #[error("ranker failed: {0}")]
    Ranker(#[from] RankerError),

    #[error("{path}:{line}: {msg}")]
    MalformedRecord {
        path: String,
        line: usize,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Failures while talking to a ranking model.
#[derive(Debug, Error)]
pub enum RankerError {
    #[error("could not start ranker process: {0}")]
    Spawn(String),

    #[error("transport failure: {0}")]
    Transport(String),

    #[error("malformed ranker response: {0}")]
    MalformedResponse(String),

    #[error("ranker returned {got} scores for {expected} documents")]
    LengthMismatch { expected: usize, got: usize },

    #[error("ranker did not answer within {0:?}")]
    Timeout(std::time::Duration),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
