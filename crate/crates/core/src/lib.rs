//! Edit-weighted evaluation of grammatical error correction.
//!
//! System edits are extracted from a (source, hypothesis) pair by Levenshtein
//! alignment biased towards the gold edits, each edit in the union of system
//! and gold edits is weighted by how much it moves a sentence-pair scorer
//! towards the reference, and precision/recall/F-beta are computed over those
//! weights. With the uniform scorer everything reduces to plain M² counting.
//!
//! The crate is `no_std` (it needs `alloc`); file formats, the score cache,
//! external scorers and the command line live in the `ptm2` crate.
#![no_std]
#![forbid(unsafe_code)]
#![allow(clippy::result_large_err)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod align;
pub mod chrf;
pub mod edit;
pub mod error;
pub mod gleu;
pub mod metric;
pub mod ranking;
pub mod scoring;
pub mod stats;

pub use align::{align, edit_set_ops, extract_edits, AlignmentOp, OpKind};
pub use edit::{apply_edits, validate_edits, Annotation, Edit, Sentence, SentenceUnit};
pub use error::{Error, Result};
pub use metric::{f_beta, Level, MetricConfig, MetricResult, Tally, Weighting};
pub use ranking::{HumanRanking, SystemScores};
pub use scoring::{
    compute_edit_scores, ChrfScorer, EditScoreTable, PairScorer, ScoreError, ScorerId,
    UniformScorer,
};
pub use stats::{pearson, spearman, CorrelationReport};
