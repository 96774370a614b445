//! Debate corpus: records, JSON-lines ingestion, winner criteria and
//! vote-dimension correlations.

mod correlation;
mod ingest;
mod model;
mod scoring;

use std::path::PathBuf;

pub use correlation::{
    vote_dimension_correlations, vote_indicators, CorrelationMatrix, CONVINCED_VOTER, CORRELATION_LABELS,
    DIMENSION_VARIABLES, MORE_TOTAL_POINTS,
};
pub use ingest::{
    build_corpus, load_corpus, load_corpus_from, read_issue_catalog, read_jsonl, write_corpus, CorpusPaths,
    ValidationIssue, ValidationMode, ValidationReport,
};
pub use model::{
    Allocation, Allocations, Corpus, Debate, Dimension, IssueOpinion, PointWeights, Round, Side, Stance,
    UserProfile, Vote,
};
pub use scoring::{convinced_toward, convinced_winner, points_winner, stance_changed, total_points, winner_by_points};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {source}")]
    Parse {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("{file}:{line}: duplicate {kind} id {id}")]
    Duplicate {
        file: String,
        line: usize,
        kind: &'static str,
        id: String,
    },
    #[error("{file}{}: {message}", line.map(|l| format!(":{l}")).unwrap_or_default())]
    Invalid {
        file: String,
        line: Option<usize>,
        message: String,
    },
    #[error("at least 2 votes are required, got {0}")]
    TooFewVotes(usize),
    #[error("serialization failed: {0}")]
    Serialize(#[from] serde_json::Error),
}
