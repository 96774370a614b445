//! Prior-belief encoding, ideology matching and PCA.

mod encode;
mod experiment;
mod ideology;
mod pca;

pub use encode::{encode_big_issues, missing_issues, opinion_similarity, BigIssuesVector, MissingIssuePolicy, SLOTS_PER_ISSUE};
pub use experiment::{
    big_issue_feature_names, ideology_classification_experiment, ideology_dataset, IdeologyDataset, IdeologyExperiment,
};
pub use ideology::{matching_ideology, normalize_label, IdeologyKind};
pub use pca::{pca_project, sample_covariance, PcaProjection};

#[derive(Debug, thiserror::Error)]
pub enum BeliefsError {
    #[error("user {user_id} answered N/S on {issues:?}")]
    NotSayingPresent { user_id: String, issues: Vec<String> },
    #[error("user {user_id} has no answer for issue {issue}")]
    MissingIssue { user_id: String, issue: String },
    #[error("user {user_id} does not declare a {kind} ideology")]
    UndeclaredIdeology { user_id: String, kind: IdeologyKind },
    #[error("vector length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("not a one-hot block vector: {0}")]
    NotOneHot(String),
    #[error("ideology labels must be two distinct names: {0}")]
    InvalidPair(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error(transparent)]
    Learn(#[from] crate::learn::LearnError),
}
