//! Controlled prediction tasks, feature ablations and the language-only
//! accuracy ceiling.

mod ablation;
mod features;
mod instances;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use ablation::{
    default_combos, run_ablation, run_task, AblationConfig, AblationReport, AblationRow, NamedCombo, Section,
    STYLE_MARKERS,
};
pub use features::{FeatureSelection, FeatureView, TaskFeatures, TFIDF_GROUP, USER_GROUPS};
pub use instances::{
    build_instances, build_task1_instances, build_task2_instances, language_only_ceiling, DebateTexts,
    FilterCounts, TaskInstance, TaskInstances, USER_FEATURE_NAMES,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    /// Debaters of two religious ideologies; label = side the voter moved to.
    Task1Religious,
    /// Debaters of two political ideologies; label = side with more points.
    Task2Political,
}

impl TaskKind {
    pub fn default_pair(self) -> (String, String) {
        match self {
            TaskKind::Task1Religious => ("Atheist".into(), "Christian".into()),
            TaskKind::Task2Political => ("Conservative".into(), "Liberal".into()),
        }
    }

    /// User group holding the controlled matching feature.
    pub fn matching_group(self) -> &'static str {
        match self {
            TaskKind::Task1Religious => "matching_religious",
            TaskKind::Task2Political => "matching_political",
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TaskKind::Task1Religious => "task1_religious",
            TaskKind::Task2Political => "task2_political",
        })
    }
}

impl FromStr for TaskKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "1" | "task1" | "task1_religious" | "religious" => Ok(TaskKind::Task1Religious),
            "2" | "task2" | "task2_political" | "political" => Ok(TaskKind::Task2Political),
            other => Err(format!("unknown task {other:?}")),
        }
    }
}

/// Debate category restriction. Serialized as `"ALL"` or the category name.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum CategoryFilter {
    #[default]
    All,
    Single(String),
}

impl CategoryFilter {
    /// Case-insensitive category match.
    pub fn accepts(&self, category: &str) -> bool {
        match self {
            CategoryFilter::All => true,
            CategoryFilter::Single(c) => c.trim().eq_ignore_ascii_case(category.trim()),
        }
    }
}

impl TryFrom<String> for CategoryFilter {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        let t = s.trim();
        if t.is_empty() {
            Err("empty category filter".into())
        } else if t.eq_ignore_ascii_case("all") || t == "*" {
            Ok(CategoryFilter::All)
        } else {
            Ok(CategoryFilter::Single(t.to_string()))
        }
    }
}

impl From<CategoryFilter> for String {
    fn from(c: CategoryFilter) -> Self {
        match c {
            CategoryFilter::All => "ALL".into(),
            CategoryFilter::Single(s) => s,
        }
    }
}

impl fmt::Display for CategoryFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&String::from(self.clone()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub task: TaskKind,
    pub category_filter: CategoryFilter,
    pub ideology_pair: (String, String),
    /// Feature groups the ablation draws from.
    pub feature_groups: Vec<String>,
}

impl TaskSpec {
    /// Spec with the task's default pair, every category and every group of
    /// the built-in lexicons.
    pub fn new(task: TaskKind) -> Self {
        let lex = crate::textfeat::LexiconSet::builtin();
        Self {
            task,
            category_filter: CategoryFilter::All,
            ideology_pair: task.default_pair(),
            feature_groups: features::default_groups(&lex),
        }
    }

    pub fn validate(&self) -> Result<(), TaskError> {
        let a = crate::beliefs::normalize_label(&self.ideology_pair.0);
        let b = crate::beliefs::normalize_label(&self.ideology_pair.1);
        if a.is_empty() || b.is_empty() || a == b {
            return Err(TaskError::Spec(format!(
                "ideology pair must hold two distinct labels, got {:?}",
                self.ideology_pair
            )));
        }
        if self.feature_groups.is_empty() {
            return Err(TaskError::Spec("no feature groups selected".into()));
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TaskError {
    #[error("invalid task definition: {0}")]
    Spec(String),
    #[error("no instances: {0}")]
    EmptyExperiment(String),
    #[error("unknown feature group {0:?}")]
    UnknownGroup(String),
    #[error("linguistic-only row {row} reached {accuracy:.4}, above the ceiling {ceiling:.4}")]
    CeilingViolated { row: String, accuracy: f64, ceiling: f64 },
    #[error(transparent)]
    Learn(#[from] crate::learn::LearnError),
    #[error(transparent)]
    Text(#[from] crate::textfeat::TextFeatError),
}
