mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use persuasion::beliefs::IdeologyKind;
use persuasion::corpus::ValidationMode;
use persuasion::tasks::TaskKind;

use crate::commands::Failure;
use crate::config::RunConfig;

/// Persuasion prediction from debate text and voters' prior beliefs.
#[derive(Debug, Parser)]
#[command(name = "persuasion", version)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Seed for fold assignment and synthetic generation.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Fail on any validation violation (the default).
    #[arg(long, global = true, conflicts_with = "lenient")]
    strict: bool,
    /// Drop offending records and report them.
    #[arg(long, global = true)]
    lenient: bool,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Corpus directory with debates.jsonl, users.jsonl, votes.jsonl.
    #[arg(long, global = true, value_name = "DIR")]
    corpus: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load and validate a corpus, then write a summary.
    Ingest,
    /// Correlations between vote dimensions, total points and convinced voters.
    AnalyzeVotes,
    /// BigIssues one-hot vectors of every encodable user.
    EncodeBeliefs,
    /// 2-d PCA projection of BigIssues vectors for an ideology pair.
    Pca(IdeologyArgs),
    /// Predict ideology from BigIssues vectors with nested CV.
    ClassifyIdeology(IdeologyArgs),
    /// Build task instances and run the feature ablation.
    RunTask(TaskArgs),
    /// Language-only accuracy ceiling of a task.
    Ceiling(TaskArgs),
    /// Write a synthetic corpus with a planted ideology effect.
    GenSynthetic(SynthArgs),
}

#[derive(Debug, Args)]
struct IdeologyArgs {
    /// political or religious.
    #[arg(long)]
    kind: Option<IdeologyKind>,
    /// The two ideology labels; the first is the positive class.
    #[arg(long, num_args = 2, value_names = ["FIRST", "SECOND"])]
    pair: Option<Vec<String>>,
}

#[derive(Debug, Args)]
struct TaskArgs {
    /// task1_religious or task2_political.
    #[arg(long)]
    task: Option<TaskKind>,
    /// Debate category, or ALL.
    #[arg(long)]
    category: Option<String>,
    /// The two debater ideologies.
    #[arg(long, num_args = 2, value_names = ["FIRST", "SECOND"])]
    pair: Option<Vec<String>>,
    /// Comma-separated feature groups.
    #[arg(long, value_delimiter = ',')]
    groups: Option<Vec<String>>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    n_debates: Option<usize>,
    #[arg(long)]
    voters_per_debate: Option<usize>,
    #[arg(long)]
    p_match: Option<f64>,
    #[arg(long)]
    p_issue_align: Option<f64>,
}

fn pair(values: Option<Vec<String>>) -> Option<(String, String)> {
    values.map(|v| (v[0].clone(), v[1].clone()))
}

/// Configuration file first, then command-line overrides.
fn resolve(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path).map_err(Failure::usage)?,
        None => RunConfig::default(),
    };
    if cli.seed.is_some() {
        config.seed = cli.seed;
    }
    config.apply_seed();
    if cli.strict {
        config.mode = ValidationMode::Strict;
    }
    if cli.lenient {
        config.mode = ValidationMode::Lenient;
    }
    if let Some(out) = &cli.out {
        config.paths.output_dir = out.clone();
    }
    if let Some(dir) = &cli.corpus {
        config.paths.corpus_dir = Some(dir.clone());
    }
    match &cli.command {
        Command::Pca(a) | Command::ClassifyIdeology(a) => {
            if let Some(kind) = a.kind {
                if kind != config.ideology.kind && a.pair.is_none() {
                    config.ideology.pair = None;
                }
                config.ideology.kind = kind;
            }
            if let Some(p) = pair(a.pair.clone()) {
                config.ideology.pair = Some(p);
            }
        }
        Command::RunTask(a) | Command::Ceiling(a) => {
            if let Some(task) = a.task {
                if task != config.task.task && a.pair.is_none() {
                    config.task.ideology_pair = None;
                }
                config.task.task = task;
            }
            if let Some(c) = &a.category {
                config.task.category = c.clone().try_into().map_err(|e: String| Failure::usage(anyhow::anyhow!(e)))?;
            }
            if let Some(p) = pair(a.pair.clone()) {
                config.task.ideology_pair = Some(p);
            }
            if let Some(g) = &a.groups {
                config.task.feature_groups = Some(g.clone());
            }
        }
        Command::GenSynthetic(a) => {
            let s = &mut config.synthetic;
            s.n_debates = a.n_debates.unwrap_or(s.n_debates);
            s.voters_per_debate = a.voters_per_debate.unwrap_or(s.voters_per_debate);
            s.p_match = a.p_match.unwrap_or(s.p_match);
            s.p_issue_align = a.p_issue_align.unwrap_or(s.p_issue_align);
        }
        Command::Ingest | Command::AnalyzeVotes | Command::EncodeBeliefs => {}
    }
    Ok(config)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let config = resolve(cli)?;
    match &cli.command {
        Command::Ingest => commands::ingest(&config),
        Command::AnalyzeVotes => commands::analyze_votes(&config),
        Command::EncodeBeliefs => commands::encode_beliefs(&config),
        Command::Pca(_) => commands::pca(&config),
        Command::ClassifyIdeology(_) => commands::classify_ideology(&config),
        Command::RunTask(_) => commands::run_task(&config),
        Command::Ceiling(_) => commands::ceiling(&config),
        Command::GenSynthetic(_) => commands::gen_synthetic(&config),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(commands::EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
