//! TOML run configuration. Every key is optional; see `docs/config.md`.

use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};

use persuasion::beliefs::{IdeologyKind, MissingIssuePolicy};
use persuasion::corpus::{CorpusPaths, PointWeights, ValidationMode};
use persuasion::learn::CvConfig;
use persuasion::synth::SyntheticParams;
use persuasion::tasks::{AblationConfig, CategoryFilter, TaskKind, TaskSpec};
use persuasion::textfeat::LexiconSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Seed for fold assignment and synthetic generation. Overrides the
    /// section-level seeds when set.
    pub seed: Option<u64>,
    pub mode: ValidationMode,
    pub missing_issue_policy: MissingIssuePolicy,
    pub paths: PathsConfig,
    pub weights: PointWeights,
    pub task: TaskConfig,
    pub ideology: IdeologyConfig,
    pub cv: CvConfig,
    pub ablation: AblationConfig,
    pub synthetic: SyntheticParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: None,
            mode: ValidationMode::Strict,
            missing_issue_policy: MissingIssuePolicy::AsNoOpinion,
            paths: PathsConfig::default(),
            weights: PointWeights::default(),
            task: TaskConfig::default(),
            ideology: IdeologyConfig::default(),
            cv: CvConfig::default(),
            ablation: AblationConfig::default(),
            synthetic: SyntheticParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    /// Directory holding `debates.jsonl`, `users.jsonl`, `votes.jsonl` and
    /// optionally `issues.txt`.
    pub corpus_dir: Option<PathBuf>,
    pub debates: Option<PathBuf>,
    pub users: Option<PathBuf>,
    pub votes: Option<PathBuf>,
    pub issue_catalog: Option<PathBuf>,
    pub lexicon_dir: Option<PathBuf>,
    pub output_dir: PathBuf,
}

impl Default for PathsConfig {
    fn default() -> Self {
        Self {
            corpus_dir: None,
            debates: None,
            users: None,
            votes: None,
            issue_catalog: None,
            lexicon_dir: None,
            output_dir: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaskConfig {
    pub task: TaskKind,
    pub category: CategoryFilter,
    /// Defaults to the task's own pair.
    pub ideology_pair: Option<(String, String)>,
    /// Defaults to every group.
    pub feature_groups: Option<Vec<String>>,
}

impl Default for TaskConfig {
    fn default() -> Self {
        Self {
            task: TaskKind::Task1Religious,
            category: CategoryFilter::All,
            ideology_pair: None,
            feature_groups: None,
        }
    }
}

impl TaskConfig {
    pub fn spec(&self) -> TaskSpec {
        let mut spec = TaskSpec::new(self.task);
        spec.category_filter = self.category.clone();
        if let Some(pair) = &self.ideology_pair {
            spec.ideology_pair = pair.clone();
        }
        if let Some(groups) = &self.feature_groups {
            spec.feature_groups = groups.clone();
        }
        spec
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdeologyConfig {
    pub kind: IdeologyKind,
    /// Defaults to Conservative/Liberal or Atheist/Christian by kind.
    pub pair: Option<(String, String)>,
}

impl Default for IdeologyConfig {
    fn default() -> Self {
        Self {
            kind: IdeologyKind::Political,
            pair: None,
        }
    }
}

impl IdeologyConfig {
    pub fn pair(&self) -> (String, String) {
        self.pair.clone().unwrap_or_else(|| match self.kind {
            IdeologyKind::Political => TaskKind::Task2Political.default_pair(),
            IdeologyKind::Religious => TaskKind::Task1Religious.default_pair(),
        })
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Push the top-level seed into every seeded section.
    pub fn apply_seed(&mut self) {
        if let Some(seed) = self.seed {
            self.cv.seed = seed;
            self.synthetic.seed = seed;
        }
    }

    /// Corpus file locations. Explicit file paths win over `corpus_dir`.
    pub fn corpus_paths(&self) -> anyhow::Result<CorpusPaths> {
        let p = &self.paths;
        let base = p.corpus_dir.as_deref().map(CorpusPaths::in_dir);
        let pick = |explicit: &Option<PathBuf>, from_dir: Option<&PathBuf>, name: &str| {
            explicit
                .clone()
                .or_else(|| from_dir.cloned())
                .with_context(|| format!("no {name} file: set paths.corpus_dir, paths.{name} or --corpus"))
        };
        let paths = CorpusPaths {
            debates: pick(&p.debates, base.as_ref().map(|b| &b.debates), "debates")?,
            users: pick(&p.users, base.as_ref().map(|b| &b.users), "users")?,
            votes: pick(&p.votes, base.as_ref().map(|b| &b.votes), "votes")?,
            issues: p.issue_catalog.clone().or_else(|| base.and_then(|b| b.issues)),
        };
        Ok(paths)
    }

    pub fn lexicons(&self) -> anyhow::Result<LexiconSet> {
        match &self.paths.lexicon_dir {
            Some(dir) => Ok(LexiconSet::from_dir(dir)?),
            None => Ok(LexiconSet::builtin()),
        }
    }
}
