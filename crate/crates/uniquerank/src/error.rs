use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by graph loading, matrix construction, and ranking.
#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("unknown node {label:?} referenced by an edge but missing from the attribute file")]
    UnknownNode { label: String },

    #[error("graph has no nodes")]
    EmptyGraph,

    #[error("node id {id} out of range for a graph of {n} nodes")]
    NodeOutOfRange { id: usize, n: usize },

    #[error("attribute vectors have different lengths ({left} vs {right})")]
    AttributeLengthMismatch { left: usize, right: usize },

    #[error("non-finite value in {context}")]
    NonFinite { context: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dense similarity matrix refused: {n} nodes exceeds the cap of {cap}")]
    DenseCapExceeded { n: usize, cap: usize },

    #[error("transition matrices disagree in size ({left} vs {right})")]
    DimensionMismatch { left: usize, right: usize },

    #[error("eigenvector centrality did not converge within {max_iterations} iterations")]
    EigenvectorNoConvergence { max_iterations: usize },

    #[error("requested top {k} from a seed set of {seed_len}")]
    KExceedsSeedSet { k: usize, seed_len: usize },

    #[error("score plane is empty")]
    EmptyPlane,

    #[error("invalid score plane: {0}")]
    InvalidPlane(String),

    #[error("invalid perturbation: {0}")]
    InvalidPerturbation(String),

    #[error("unknown method {0:?}")]
    UnknownMethod(String),

    #[error("{kind} graph requires size >= {min}, got {got}")]
    SymmetricSizeTooSmall {
        kind: &'static str,
        min: usize,
        got: usize,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
