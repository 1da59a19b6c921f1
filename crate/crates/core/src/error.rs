//! Crate-wide error type.

use crate::graphops::SubgraphSample;

/// Errors produced by graph construction, scoring, and the study harnesses.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed input text (triple or embedding files).
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// An argument outside the defined domain of an operation
    /// (unknown id, triple not in the fact set, empty input, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Incompatible or invalid configuration (scorer/store mismatch,
    /// out-of-range sample fraction, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// Negative generation could not find a filtered candidate.
    #[error("sampling error: {0}")]
    Sampling(String),

    /// Statistically meaningless input, e.g. zero variance in a
    /// correlation coordinate.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Inconsistent user-supplied data (overlapping positive/negative
    /// lists, positives missing from the graph, ...).
    #[error("input error: {0}")]
    Input(String),

    /// Training produced a non-finite loss.
    #[error("training diverged at epoch {epoch}: {msg}")]
    Divergence { epoch: usize, msg: String },

    /// A random walk exhausted its step budget; carries what was
    /// collected so far.
    #[error("walk truncated after {steps} steps: collected {} of {target} nodes", partial.nodes.len())]
    WalkTruncated {
        steps: u64,
        target: usize,
        partial: SubgraphSample,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
