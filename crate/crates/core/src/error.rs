use alloc::string::String;
use alloc::vec::Vec;

use crate::edit::Edit;
use crate::scoring::ScoreError;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("edit {edit} out of bounds for sentence of length {len}")]
    OutOfBounds { edit: Edit, len: usize },

    #[error("empty insertion at index {index}")]
    EmptyEdit { index: usize },

    #[error("overlapping edits {first} and {second}")]
    Overlap { first: Edit, second: Edit },

    #[error("edits not sorted: {first} precedes {second}")]
    Unsorted { first: Edit, second: Edit },

    /// Extracted edits failed to rebuild the hypothesis. Always a bug.
    #[error("internal alignment failure: edits do not reconstruct the hypothesis `{hypothesis}`")]
    Reconstruction { hypothesis: String },

    #[error("scoring edit {edit}: {source}")]
    Scoring { edit: Edit, source: ScoreError },

    #[error("{0}")]
    Score(#[from] ScoreError),

    #[error("{what}: expected {expected}, found {found}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(&'static str),

    #[error("system sets differ (missing from scores: [{}], missing from ranking: [{}])", .missing.join(", "), .extra.join(", "))]
    SystemMismatch {
        missing: Vec<String>,
        extra: Vec<String>,
    },

    #[error("invalid ranking: {0}")]
    InvalidRanking(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
