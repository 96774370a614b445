//! Logistic regression, nested cross-validation, baselines and McNemar's
//! test.

mod cv;
mod dataset;
mod logreg;
mod mcnemar;

pub use cv::{
    accuracy, majority_baseline, majority_label, make_folds, nested_cv, CVReport, CvConfig, FoldData, Folding,
    RegConfig, SelectedParams,
};
pub use dataset::{DatasetMatrix, Standardizer};
pub use logreg::{
    log_odds, sigmoid, softplus, solve, train_logreg, train_path, FitStatus, LogisticObjective, Penalty,
    Prediction, Problem, SolverOptions, Solution, TrainedModel,
};
pub use mcnemar::{exact_binomial_two_sided, mcnemar, mcnemar_from_counts, McNemarMethod, McNemarResult, EXACT_THRESHOLD};

#[derive(Debug, thiserror::Error)]
pub enum LearnError {
    #[error("training data contains a single class")]
    SingleClass,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite feature value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("label must be 0 or 1, found {0}")]
    InvalidLabel(u8),
    #[error("infeasible folds: {0}")]
    InfeasibleFolds(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("feature construction failed: {0}")]
    Features(String),
}
