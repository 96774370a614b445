//! One function per subcommand. Each writes its outputs atomically under
//! the output directory and prints a short summary to stdout.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::anyhow;
use serde::Serialize;

use persuasion::beliefs::{
    big_issue_feature_names, encode_big_issues, ideology_classification_experiment, ideology_dataset, pca_project,
    BeliefsError,
};
use persuasion::corpus::{
    load_corpus_from, stance_changed, vote_dimension_correlations, write_corpus, Corpus, CorpusError, IssueOpinion,
    ValidationMode, ValidationReport, CONVINCED_VOTER, MORE_TOTAL_POINTS,
};
use persuasion::io::write_atomic;
use persuasion::learn::LearnError;
use persuasion::synth::generate_synthetic;
use persuasion::tasks::{self, build_instances, language_only_ceiling, TaskError};

use crate::config::RunConfig;

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_EMPTY: u8 = 3;

/// An error with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn usage(error: impl Into<anyhow::Error>) -> Self {
        Self { code: EXIT_USAGE, error: error.into() }
    }

    pub fn validation(error: impl Into<anyhow::Error>) -> Self {
        Self { code: EXIT_VALIDATION, error: error.into() }
    }

    pub fn empty(error: impl Into<anyhow::Error>) -> Self {
        Self { code: EXIT_EMPTY, error: error.into() }
    }
}

impl From<CorpusError> for Failure {
    fn from(e: CorpusError) -> Self {
        match e {
            CorpusError::TooFewVotes(_) => Failure::empty(e),
            _ => Failure::validation(e),
        }
    }
}

impl From<LearnError> for Failure {
    fn from(e: LearnError) -> Self {
        match e {
            LearnError::SingleClass | LearnError::InfeasibleFolds(_) => Failure::empty(e),
            LearnError::InvalidConfig(_) => Failure::usage(e),
            _ => Failure::validation(e),
        }
    }
}

impl From<BeliefsError> for Failure {
    fn from(e: BeliefsError) -> Self {
        match e {
            BeliefsError::InsufficientData(_) => Failure::empty(e),
            BeliefsError::InvalidPair(_) => Failure::usage(e),
            BeliefsError::Learn(l) => l.into(),
            _ => Failure::validation(e),
        }
    }
}

impl From<TaskError> for Failure {
    fn from(e: TaskError) -> Self {
        match e {
            TaskError::EmptyExperiment(_) => Failure::empty(e),
            TaskError::Spec(_) | TaskError::UnknownGroup(_) => Failure::usage(e),
            TaskError::Learn(l) => l.into(),
            _ => Failure::validation(e),
        }
    }
}

fn write(config: &RunConfig, name: &str, contents: &str) -> Result<PathBuf, Failure> {
    let path = config.paths.output_dir.join(name);
    write_atomic(&path, contents.as_bytes())
        .map_err(|e| Failure::validation(anyhow!("writing {}: {e}", path.display())))?;
    Ok(path)
}

fn to_json<T: Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| Failure::validation(anyhow!("serializing report: {e}")))
}

fn load(config: &RunConfig) -> Result<(Corpus, ValidationReport), Failure> {
    let paths = config.corpus_paths().map_err(Failure::usage)?;
    for file in [&paths.debates, &paths.users, &paths.votes].into_iter().chain(paths.issues.as_ref()) {
        if !file.is_file() {
            return Err(Failure::validation(anyhow!("input file {} does not exist", file.display())));
        }
    }
    let (corpus, report) = load_corpus_from(&paths, config.mode)?;
    if !report.dropped.is_empty() {
        log::warn!("lenient ingestion dropped {} records", report.dropped.len());
    }
    Ok((corpus, report))
}

fn announce(path: &Path) {
    println!("wrote {}", path.display());
}

#[derive(Serialize)]
struct IngestSummary {
    mode: ValidationMode,
    debates: usize,
    users: usize,
    votes: usize,
    issues: usize,
    debates_per_category: BTreeMap<String, usize>,
    /// Users answering every catalog issue, none of them N/S.
    users_with_full_big_issue_profiles: usize,
    votes_with_stance_change: usize,
    validation: ValidationReport,
}

pub fn ingest(config: &RunConfig) -> Result<(), Failure> {
    let (corpus, report) = load(config)?;
    let mut per_category = BTreeMap::new();
    for debate in corpus.debates.values() {
        *per_category.entry(debate.category.clone()).or_insert(0) += 1;
    }
    let full = corpus
        .users
        .values()
        .filter(|u| {
            corpus.issue_catalog.iter().all(|issue| {
                matches!(u.big_issue_opinions.get(issue), Some(o) if *o != IssueOpinion::NotSaying)
            })
        })
        .count();
    let summary = IngestSummary {
        mode: config.mode,
        debates: corpus.debates.len(),
        users: corpus.users.len(),
        votes: corpus.votes.len(),
        issues: corpus.issue_catalog.len(),
        debates_per_category: per_category,
        users_with_full_big_issue_profiles: full,
        votes_with_stance_change: corpus.votes.iter().filter(|v| stance_changed(v)).count(),
        validation: report,
    };
    println!(
        "{} debates, {} users, {} votes, {} issues; {} full profiles; {} stance changes; {} warnings, {} dropped",
        summary.debates,
        summary.users,
        summary.votes,
        summary.issues,
        summary.users_with_full_big_issue_profiles,
        summary.votes_with_stance_change,
        summary.validation.warnings.len(),
        summary.validation.dropped.len()
    );
    for (category, n) in &summary.debates_per_category {
        println!("  {category}: {n}");
    }
    announce(&write(config, "ingest_report.json", &to_json(&summary)?)?);
    Ok(())
}

#[derive(Serialize)]
struct VoteAnalysis {
    vote_count: usize,
    zero_variance: Vec<String>,
    /// Dimension indicators by correlation with "CON gets more total points".
    ranked_against_total_points: Vec<(String, f64)>,
    /// Dimension indicators by correlation with "voter moved toward CON".
    ranked_against_convinced_voters: Vec<(String, f64)>,
    labels: Vec<String>,
    matrix: Vec<Vec<f64>>,
}

pub fn analyze_votes(config: &RunConfig) -> Result<(), Failure> {
    let (corpus, _) = load(config)?;
    let m = vote_dimension_correlations(&corpus.votes, &config.weights)?;
    let analysis = VoteAnalysis {
        vote_count: m.vote_count,
        zero_variance: m.zero_variance.clone(),
        ranked_against_total_points: m.ranked_against(MORE_TOTAL_POINTS),
        ranked_against_convinced_voters: m.ranked_against(CONVINCED_VOTER),
        labels: m.labels.clone(),
        matrix: m.values.clone(),
    };
    for (title, ranked) in [
        ("total points", &analysis.ranked_against_total_points),
        ("convinced voters", &analysis.ranked_against_convinced_voters),
    ] {
        let (top, r) = &ranked[0];
        println!("strongest correlate of {title}: {top} (r = {r:.4})");
    }
    announce(&write(config, "vote_correlations.csv", &m.to_csv())?);
    announce(&write(config, "vote_correlations.json", &to_json(&analysis)?)?);
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn encode_beliefs(config: &RunConfig) -> Result<(), Failure> {
    let (corpus, _) = load(config)?;
    if corpus.issue_catalog.is_empty() {
        return Err(Failure::empty(anyhow!("the corpus has no big issues")));
    }
    let mut out = String::from("user_id,political_ideology,religious_ideology");
    for name in big_issue_feature_names(&corpus.issue_catalog) {
        out.push(',');
        out.push_str(&csv_field(&name));
    }
    out.push('\n');
    let (mut encoded, mut skipped) = (0, 0);
    for user in corpus.users.values() {
        let vector = match encode_big_issues(user, &corpus.issue_catalog, config.missing_issue_policy) {
            Ok(v) => v,
            Err(BeliefsError::NotSayingPresent { .. }) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        out.push_str(&csv_field(&user.user_id));
        for label in [&user.political_ideology, &user.religious_ideology] {
            out.push(',');
            out.push_str(&csv_field(label.as_deref().unwrap_or("")));
        }
        for v in vector.values() {
            out.push_str(if *v == 1.0 { ",1" } else { ",0" });
        }
        out.push('\n');
        encoded += 1;
    }
    println!("encoded {encoded} users; skipped {skipped} with N/S answers");
    announce(&write(config, "big_issues.csv", &out)?);
    Ok(())
}

pub fn pca(config: &RunConfig) -> Result<(), Failure> {
    let (corpus, _) = load(config)?;
    let (first, second) = config.ideology.pair();
    let kind = config.ideology.kind;
    let ds = ideology_dataset(&corpus, kind, (&first, &second), config.missing_issue_policy)?;
    let rows: Vec<&[f64]> = (0..ds.data.n_rows()).map(|i| ds.data.row(i)).collect();
    let projection = pca_project(&rows)?;
    let labels: Vec<String> = ds
        .data
        .labels()
        .iter()
        .map(|&l| if l == 1 { first.clone() } else { second.clone() })
        .collect();
    println!(
        "{} users; explained variance {:.4}, {:.4} of {:.4}",
        rows.len(),
        projection.explained_variance[0],
        projection.explained_variance[1],
        projection.total_variance
    );
    announce(&write(config, &format!("pca_{kind}.csv"), &projection.to_csv(&ds.user_ids, &labels))?);
    Ok(())
}

pub fn classify_ideology(config: &RunConfig) -> Result<(), Failure> {
    let (corpus, _) = load(config)?;
    let (first, second) = config.ideology.pair();
    let kind = config.ideology.kind;
    let experiment =
        ideology_classification_experiment(&corpus, kind, (&first, &second), &config.cv, config.missing_issue_policy)?;
    println!(
        "{kind} {first}/{second}: {} users, accuracy {:.2}% vs majority {:.2}% (McNemar p = {:.4})",
        experiment.n_users,
        100.0 * experiment.model_accuracy,
        100.0 * experiment.majority_accuracy,
        experiment.mcnemar.p_value
    );
    announce(&write(config, &format!("ideology_{kind}.json"), &to_json(&experiment)?)?);
    Ok(())
}

pub fn run_task(config: &RunConfig) -> Result<(), Failure> {
    let (corpus, _) = load(config)?;
    let spec = config.task.spec();
    let lexicons = config.lexicons().map_err(Failure::validation)?;
    let (_, report) = tasks::run_task(
        &corpus,
        &spec,
        &config.weights,
        config.missing_issue_policy,
        &lexicons,
        &config.cv,
        &config.ablation,
    )?;
    let markdown = report.to_markdown();
    print!("{markdown}");
    let json = report.to_json().map_err(|e| Failure::validation(anyhow!("serializing report: {e}")))?;
    announce(&write(config, &format!("{}_report.json", spec.task), &json)?);
    announce(&write(config, &format!("{}_report.md", spec.task), &markdown)?);
    Ok(())
}

#[derive(Serialize)]
struct CeilingReport {
    task: tasks::TaskKind,
    category_filter: tasks::CategoryFilter,
    ideology_pair: (String, String),
    n_instances: usize,
    n_debates: usize,
    /// (CON, PRO) label counts.
    class_counts: (usize, usize),
    /// Share of the larger class.
    majority_share: f64,
    language_only_ceiling: f64,
    filter_counts: tasks::FilterCounts,
}

pub fn ceiling(config: &RunConfig) -> Result<(), Failure> {
    let (corpus, _) = load(config)?;
    let spec = config.task.spec();
    let instances = build_instances(&corpus, &spec, &config.weights, config.missing_issue_policy)?;
    if instances.is_empty() {
        return Err(Failure::empty(anyhow!(
            "no {} instances for category {} and pair {:?}",
            spec.task,
            spec.category_filter,
            spec.ideology_pair
        )));
    }
    let (con, pro) = instances.class_counts();
    let report = CeilingReport {
        task: spec.task,
        category_filter: spec.category_filter.clone(),
        ideology_pair: spec.ideology_pair.clone(),
        n_instances: instances.len(),
        n_debates: instances.debates.len(),
        class_counts: (con, pro),
        majority_share: con.max(pro) as f64 / instances.len() as f64,
        language_only_ceiling: language_only_ceiling(&instances.instances),
        filter_counts: instances.filter_counts.clone(),
    };
    println!(
        "{}: {} instances over {} debates; language-only ceiling {:.2}%, majority {:.2}%",
        spec.task,
        report.n_instances,
        report.n_debates,
        100.0 * report.language_only_ceiling,
        100.0 * report.majority_share
    );
    announce(&write(config, &format!("{}_ceiling.json", spec.task), &to_json(&report)?)?);
    Ok(())
}

pub fn gen_synthetic(config: &RunConfig) -> Result<(), Failure> {
    let corpus = generate_synthetic(&config.synthetic).map_err(|e| Failure::usage(anyhow!("{}", e.0)))?;
    let dir = &config.paths.output_dir;
    let paths = write_corpus(&corpus, dir)?;
    write(config, "synthetic_params.json", &to_json(&config.synthetic)?)?;
    println!(
        "{} debates, {} users, {} votes (seed {})",
        corpus.debates.len(),
        corpus.users.len(),
        corpus.votes.len(),
        config.synthetic.seed
    );
    for path in [&paths.debates, &paths.users, &paths.votes] {
        announce(path);
    }
    Ok(())
}
