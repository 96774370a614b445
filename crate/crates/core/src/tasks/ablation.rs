use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::features::{FeatureSelection, TaskFeatures, USER_GROUPS};
use super::instances::{build_instances, language_only_ceiling, TaskInstances};
use super::{CategoryFilter, TaskError, TaskKind, TaskSpec};
use crate::beliefs::MissingIssuePolicy;
use crate::corpus::{Corpus, PointWeights};
use crate::learn::{mcnemar, nested_cv, CVReport, CvConfig, Folding, McNemarResult, SelectedParams};
use crate::textfeat::{LexiconSet, TfidfConfig};

/// Style markers reported together as one linguistic feature set.
pub const STYLE_MARKERS: [&str; 11] = [
    "arg:rhetorical_questions",
    "arg:emphasizing",
    "arg:approval",
    "exclamations",
    "questions",
    "politeness",
    "opponent",
    "evidence",
    "modals",
    "links",
    "numbers",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedCombo {
    pub name: String,
    pub groups: Vec<String>,
}

/// The style-marker set alone and together with the task's matching
/// feature.
pub fn default_combos(task: TaskKind) -> Vec<NamedCombo> {
    let markers: Vec<String> = STYLE_MARKERS.iter().map(|s| s.to_string()).collect();
    let matching = task.matching_group().to_string();
    vec![
        NamedCombo {
            name: "style_markers".into(),
            groups: markers.clone(),
        },
        NamedCombo {
            name: format!("{matching}+style_markers"),
            groups: std::iter::once(matching).chain(markers).collect(),
        },
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AblationConfig {
    /// Groups evaluated on their own; `None` means every group of the task.
    pub singletons: Option<Vec<String>>,
    /// Extra named subsets; `None` means [`default_combos`].
    pub combos: Option<Vec<NamedCombo>>,
    pub user_only: bool,
    pub linguistic_only: bool,
    pub combined: bool,
    pub tfidf: TfidfConfig,
}

impl Default for AblationConfig {
    fn default() -> Self {
        Self {
            singletons: None,
            combos: None,
            user_only: true,
            linguistic_only: true,
            combined: true,
            tfidf: TfidfConfig {
                max_features: Some(500),
                ..TfidfConfig::default()
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Section {
    Baseline,
    UserBased,
    Linguistic,
    Combined,
}

impl Section {
    fn title(self) -> &'static str {
        match self {
            Section::Baseline => "Baseline",
            Section::UserBased => "User-based",
            Section::Linguistic => "Linguistic",
            Section::Combined => "User-based + linguistic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub name: String,
    pub section: Section,
    pub groups: Vec<String>,
    /// Columns when the n-gram block is fitted on every instance.
    pub n_features: usize,
    /// Mean outer-fold accuracy.
    pub accuracy: f64,
    /// Fraction of all instances predicted correctly.
    pub pooled_accuracy: f64,
    pub fold_accuracies: Vec<f64>,
    pub selected: Vec<SelectedParams>,
    pub mcnemar_vs_majority: Option<McNemarResult>,
    pub mcnemar_vs_best_user: Option<McNemarResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub task: TaskKind,
    pub category_filter: CategoryFilter,
    pub ideology_pair: (String, String),
    pub n_instances: usize,
    pub n_debates: usize,
    /// (CON, PRO) label counts.
    pub class_counts: (usize, usize),
    pub folding: Folding,
    pub seed: u64,
    pub outer_folds: usize,
    pub inner_folds: usize,
    pub majority_accuracy: f64,
    pub language_only_ceiling: f64,
    /// Best user-only row that the other rows are compared against.
    pub best_user_row: Option<String>,
    pub rows: Vec<AblationRow>,
    pub warnings: Vec<String>,
}

struct Subset {
    name: String,
    groups: Vec<String>,
    selection: FeatureSelection,
}

fn section_of(sel: &FeatureSelection) -> Section {
    match (sel.has_user(), sel.has_linguistic()) {
        (true, false) => Section::UserBased,
        (false, true) => Section::Linguistic,
        _ => Section::Combined,
    }
}

fn subsets(spec: &TaskSpec, config: &AblationConfig, lexicons: &LexiconSet) -> Result<Vec<Subset>, TaskError> {
    let mut out: Vec<Subset> = Vec::new();
    let mut push = |name: String, groups: Vec<String>| -> Result<(), TaskError> {
        if out.iter().any(|s| s.name == name) {
            return Ok(());
        }
        let selection = FeatureSelection::from_groups(&groups, lexicons)?;
        out.push(Subset { name, groups, selection });
        Ok(())
    };
    let singles = config.singletons.clone().unwrap_or_else(|| spec.feature_groups.clone());
    for g in singles {
        push(g.clone(), vec![g])?;
    }
    let combos = config.combos.clone().unwrap_or_else(|| default_combos(spec.task));
    for c in combos {
        if c.groups.is_empty() {
            return Err(TaskError::Spec(format!("combination {:?} has no groups", c.name)));
        }
        push(c.name, c.groups)?;
    }
    let is_user = |g: &String| USER_GROUPS.iter().any(|(u, _)| u == g);
    let user: Vec<String> = spec.feature_groups.iter().filter(|g| is_user(g)).cloned().collect();
    let ling: Vec<String> = spec.feature_groups.iter().filter(|g| !is_user(g)).cloned().collect();
    if config.user_only && !user.is_empty() {
        push("all_user_features".into(), user)?;
    }
    if config.linguistic_only && !ling.is_empty() {
        push("all_linguistic_features".into(), ling)?;
    }
    if config.combined && spec.feature_groups.iter().any(is_user) && spec.feature_groups.iter().any(|g| !is_user(g)) {
        push("all_features".into(), spec.feature_groups.clone())?;
    }
    if out.is_empty() {
        return Err(TaskError::Spec("empty feature selection".into()));
    }
    Ok(out)
}

/// Nested-CV accuracy of every configured feature subset, with McNemar
/// tests against the majority baseline and against the best user-only row.
///
/// Linguistic features are identical for all voters of a debate, so a
/// linguistic-only row cannot beat the language-only ceiling when folds are
/// grouped by debate; that case is an error. With stratified folds the
/// overshoot is possible and recorded as a warning.
pub fn run_ablation(
    instances: &TaskInstances,
    lexicons: &LexiconSet,
    cv: &CvConfig,
    config: &AblationConfig,
) -> Result<AblationReport, TaskError> {
    if instances.is_empty() {
        return Err(TaskError::EmptyExperiment(format!(
            "{} with pair {:?} and category {} selects no votes",
            instances.spec.task, instances.spec.ideology_pair, instances.spec.category_filter
        )));
    }
    let subsets = subsets(&instances.spec, config, lexicons)?;
    let features = TaskFeatures::new(instances, lexicons, &config.tfidf);
    let ceiling = language_only_ceiling(&instances.instances);

    let mut evaluated: Vec<(Subset, CVReport, usize)> = Vec::new();
    for subset in subsets {
        log::info!("evaluating {}", subset.name);
        let view = features.view(&subset.selection);
        let report = nested_cv(&view, cv)?;
        let n_features = {
            let sel = &subset.selection;
            let tf = if sel.tfidf { features.fit_tfidf(&(0..instances.len()).collect::<Vec<_>>())?.len() } else { 0 };
            sel.user_columns.len() + 2 * (sel.scalar_columns.len() + tf)
        };
        evaluated.push((subset, report, n_features));
    }

    let majority_accuracy = evaluated[0].1.baseline_accuracy;
    let best_user = evaluated
        .iter()
        .enumerate()
        .filter(|(_, (s, _, _))| section_of(&s.selection) == Section::UserBased)
        .max_by(|(ia, a), (ib, b)| a.1.mean_accuracy.total_cmp(&b.1.mean_accuracy).then(ib.cmp(ia)))
        .map(|(i, _)| i);

    let mut warnings = Vec::new();
    let mut rows = Vec::new();
    let labels = &evaluated[0].1.labels;
    for (i, (subset, report, n_features)) in evaluated.iter().enumerate() {
        let section = section_of(&subset.selection);
        if section == Section::Linguistic && report.pooled_accuracy > ceiling + 1e-12 {
            if cv.folding == Folding::GroupedByDebate {
                return Err(TaskError::CeilingViolated {
                    row: subset.name.clone(),
                    accuracy: report.pooled_accuracy,
                    ceiling,
                });
            }
            warnings.push(format!(
                "{}: pooled accuracy {:.4} exceeds the language-only ceiling {:.4}; stratified folds let \
                 voters of one debate fall in different folds",
                subset.name, report.pooled_accuracy, ceiling
            ));
        }
        let vs_best = match best_user {
            Some(b) if b != i => Some(mcnemar(&report.predictions, &evaluated[b].1.predictions, labels)?),
            _ => None,
        };
        warnings.extend(report.notes.iter().map(|n| format!("{}: {n}", subset.name)));
        rows.push(AblationRow {
            name: subset.name.clone(),
            section,
            groups: subset.groups.clone(),
            n_features: *n_features,
            accuracy: report.mean_accuracy,
            pooled_accuracy: report.pooled_accuracy,
            fold_accuracies: report.fold_accuracies.clone(),
            selected: report.selected.clone(),
            mcnemar_vs_majority: Some(mcnemar(&report.predictions, &report.baseline_predictions, labels)?),
            mcnemar_vs_best_user: vs_best,
        });
    }
    let baseline = &evaluated[0].1;
    rows.push(AblationRow {
        name: "majority".into(),
        section: Section::Baseline,
        groups: Vec::new(),
        n_features: 0,
        accuracy: baseline.baseline_accuracy,
        pooled_accuracy: baseline.baseline_pooled_accuracy,
        fold_accuracies: baseline.baseline_fold_accuracies.clone(),
        selected: Vec::new(),
        mcnemar_vs_majority: None,
        mcnemar_vs_best_user: None,
    });
    rows.push(AblationRow {
        name: "language_only_ceiling".into(),
        section: Section::Baseline,
        groups: Vec::new(),
        n_features: 0,
        accuracy: ceiling,
        pooled_accuracy: ceiling,
        fold_accuracies: Vec::new(),
        selected: Vec::new(),
        mcnemar_vs_majority: None,
        mcnemar_vs_best_user: None,
    });
    rows.sort_by(|a, b| {
        a.section
            .cmp(&b.section)
            .then(b.accuracy.total_cmp(&a.accuracy))
            .then_with(|| a.name.cmp(&b.name))
    });

    let (neg, pos) = instances.class_counts();
    Ok(AblationReport {
        task: instances.spec.task,
        category_filter: instances.spec.category_filter.clone(),
        ideology_pair: instances.spec.ideology_pair.clone(),
        n_instances: instances.len(),
        n_debates: instances.debates.len(),
        class_counts: (neg, pos),
        folding: cv.folding,
        seed: cv.seed,
        outer_folds: cv.outer_folds,
        inner_folds: cv.inner_folds,
        majority_accuracy,
        language_only_ceiling: ceiling,
        best_user_row: best_user.map(|b| evaluated[b].0.name.clone()),
        rows,
        warnings,
    })
}

/// Build the task instances and run the ablation on them.
#[allow(clippy::too_many_arguments)]
pub fn run_task(
    corpus: &Corpus,
    spec: &TaskSpec,
    weights: &PointWeights,
    policy: MissingIssuePolicy,
    lexicons: &LexiconSet,
    cv: &CvConfig,
    config: &AblationConfig,
) -> Result<(TaskInstances, AblationReport), TaskError> {
    let instances = build_instances(corpus, spec, weights, policy)?;
    let report = run_ablation(&instances, lexicons, cv, config)?;
    Ok((instances, report))
}

fn percent(x: f64) -> String {
    format!("{:.2}%", 100.0 * x)
}

fn p_value(r: &Option<McNemarResult>) -> String {
    match r {
        None => "-".into(),
        Some(r) if r.p_value < 1e-4 => format!("{:.2e}", r.p_value),
        Some(r) => format!("{:.4}", r.p_value),
    }
}

impl AblationReport {
    pub fn to_json(&self) -> Result<String, serde_json::Error> {
        serde_json::to_string_pretty(self).map(|s| s + "\n")
    }

    /// Human-readable tables, one per section.
    pub fn to_markdown(&self) -> String {
        let mut md = String::new();
        let task = match self.task {
            TaskKind::Task1Religious => "Task 1, religious ideology control",
            TaskKind::Task2Political => "Task 2, political ideology control",
        };
        let _ = writeln!(md, "# {task}: {} vs {}\n", self.ideology_pair.0, self.ideology_pair.1);
        let _ = writeln!(
            md,
            "Category: {}. Instances: {} over {} debates (PRO {}, CON {}).",
            self.category_filter, self.n_instances, self.n_debates, self.class_counts.1, self.class_counts.0
        );
        let folding = match self.folding {
            Folding::Stratified => "stratified",
            Folding::GroupedByDebate => "grouped by debate",
        };
        let _ = writeln!(
            md,
            "Evaluation: {}-fold nested CV ({} inner folds), {folding} folds, seed {}.",
            self.outer_folds, self.inner_folds, self.seed
        );
        if let Some(b) = &self.best_user_row {
            let _ = writeln!(md, "Best user-based row: {b}.");
        }
        for section in [Section::Baseline, Section::UserBased, Section::Linguistic, Section::Combined] {
            let rows: Vec<&AblationRow> = self.rows.iter().filter(|r| r.section == section).collect();
            if rows.is_empty() {
                continue;
            }
            let _ = writeln!(md, "\n## {}\n", section.title());
            let _ = writeln!(md, "| Features | Accuracy | Pooled | p vs majority | p vs best user-based |");
            let _ = writeln!(md, "|---|---:|---:|---:|---:|");
            for r in rows {
                let _ = writeln!(
                    md,
                    "| {} | {} | {} | {} | {} |",
                    r.name,
                    percent(r.accuracy),
                    percent(r.pooled_accuracy),
                    p_value(&r.mcnemar_vs_majority),
                    p_value(&r.mcnemar_vs_best_user)
                );
            }
        }
        if !self.warnings.is_empty() {
            let _ = writeln!(md, "\n## Warnings\n");
            for w in &self.warnings {
                let _ = writeln!(md, "- {w}");
            }
        }
        md
    }
}
