use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::model::{Corpus, Debate, UserProfile, Vote};
use super::CorpusError;
use crate::io::write_atomic;

/// How referential-integrity and record-level violations are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValidationMode {
    /// Any violation is an error.
    #[default]
    Strict,
    /// Offending records are dropped and counted.
    Lenient,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationIssue {
    pub file: String,
    pub line: Option<usize>,
    pub message: String,
}

/// Outcome of validating a corpus. Warnings never fail ingestion; dropped
/// records only occur in lenient mode.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub mode: Option<ValidationMode>,
    pub warnings: Vec<ValidationIssue>,
    pub dropped: Vec<ValidationIssue>,
    pub dropped_debates: usize,
    pub dropped_users: usize,
    pub dropped_votes: usize,
    /// Debater ids that have no user profile.
    pub missing_debater_profiles: Vec<String>,
    /// Voter ids that have no user profile.
    pub missing_voter_profiles: Vec<String>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.warnings.is_empty() && self.dropped.is_empty()
    }
}

struct Validator {
    mode: ValidationMode,
    report: ValidationReport,
}

impl Validator {
    /// Record a violation: an error in strict mode, a drop in lenient mode.
    fn violation(&mut self, file: &str, line: Option<usize>, message: String) -> Result<(), CorpusError> {
        match self.mode {
            ValidationMode::Strict => Err(CorpusError::Invalid {
                file: file.to_string(),
                line,
                message,
            }),
            ValidationMode::Lenient => {
                self.report.dropped.push(ValidationIssue {
                    file: file.to_string(),
                    line,
                    message,
                });
                Ok(())
            }
        }
    }

    fn warn(&mut self, file: &str, line: Option<usize>, message: String) {
        self.report.warnings.push(ValidationIssue {
            file: file.to_string(),
            line,
            message,
        });
    }
}

/// Parse a JSON-lines file into records, keeping 1-based line numbers.
/// Blank lines are skipped.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<(usize, T)>, CorpusError> {
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut records = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let record = serde_json::from_str(trimmed).map_err(|source| CorpusError::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            source,
        })?;
        records.push((i + 1, record));
    }
    Ok(records)
}

/// Read an issue catalog: one issue name per line, order significant,
/// `#` comments and blank lines ignored.
pub fn read_issue_catalog(path: &Path) -> Result<Vec<String>, CorpusError> {
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut seen = BTreeSet::new();
    let mut catalog = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let name = line.trim();
        if name.is_empty() || name.starts_with('#') {
            continue;
        }
        if !seen.insert(name.to_string()) {
            return Err(CorpusError::Duplicate {
                file: path.display().to_string(),
                line: i + 1,
                kind: "issue",
                id: name.to_string(),
            });
        }
        catalog.push(name.to_string());
    }
    Ok(catalog)
}

/// Paths of the three corpus files plus an optional issue catalog.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusPaths {
    pub debates: PathBuf,
    pub users: PathBuf,
    pub votes: PathBuf,
    pub issues: Option<PathBuf>,
}

impl CorpusPaths {
    /// Conventional file names inside one directory.
    pub fn in_dir(dir: &Path) -> Self {
        let issues = dir.join("issues.txt");
        Self {
            debates: dir.join("debates.jsonl"),
            users: dir.join("users.jsonl"),
            votes: dir.join("votes.jsonl"),
            issues: issues.exists().then_some(issues),
        }
    }
}

/// Load and validate a corpus from its JSON-lines files.
///
/// Parse errors (malformed JSON, unknown enum literal, missing field) are
/// always fatal and carry the line number. Duplicate ids and referential
/// integrity violations are fatal in strict mode and dropped in lenient mode.
/// When no catalog is given, the sorted union of all profile issues is used.
pub fn load_corpus(
    debates_path: &Path,
    users_path: &Path,
    votes_path: &Path,
    issue_catalog: Option<Vec<String>>,
    mode: ValidationMode,
) -> Result<(Corpus, ValidationReport), CorpusError> {
    let debates: Vec<(usize, Debate)> = read_jsonl(debates_path)?;
    let users: Vec<(usize, UserProfile)> = read_jsonl(users_path)?;
    let votes: Vec<(usize, Vote)> = read_jsonl(votes_path)?;
    let files = [
        debates_path.display().to_string(),
        users_path.display().to_string(),
        votes_path.display().to_string(),
    ];
    validate(debates, users, votes, issue_catalog, mode, &files)
}

pub fn load_corpus_from(paths: &CorpusPaths, mode: ValidationMode) -> Result<(Corpus, ValidationReport), CorpusError> {
    let catalog = paths.issues.as_deref().map(read_issue_catalog).transpose()?;
    load_corpus(&paths.debates, &paths.users, &paths.votes, catalog, mode)
}

/// Validate in-memory records and assemble a corpus.
pub fn build_corpus(
    debates: Vec<Debate>,
    users: Vec<UserProfile>,
    votes: Vec<Vote>,
    issue_catalog: Option<Vec<String>>,
    mode: ValidationMode,
) -> Result<(Corpus, ValidationReport), CorpusError> {
    let files = ["debates".to_string(), "users".to_string(), "votes".to_string()];
    validate(number(debates), number(users), number(votes), issue_catalog, mode, &files)
}

fn number<T>(records: Vec<T>) -> Vec<(usize, T)> {
    records.into_iter().enumerate().map(|(i, r)| (i + 1, r)).collect()
}

fn validate(
    debates: Vec<(usize, Debate)>,
    users: Vec<(usize, UserProfile)>,
    votes: Vec<(usize, Vote)>,
    issue_catalog: Option<Vec<String>>,
    mode: ValidationMode,
    files: &[String; 3],
) -> Result<(Corpus, ValidationReport), CorpusError> {
    let [debates_file, users_file, votes_file] = files;
    let mut v = Validator {
        mode,
        report: ValidationReport {
            mode: Some(mode),
            ..Default::default()
        },
    };

    let mut user_map = BTreeMap::new();
    for (line, user) in users {
        if user_map.contains_key(&user.user_id) {
            if mode == ValidationMode::Strict {
                return Err(CorpusError::Duplicate {
                    file: users_file.clone(),
                    line,
                    kind: "user",
                    id: user.user_id,
                });
            }
            v.violation(users_file, Some(line), format!("duplicate user_id {}", user.user_id))?;
            v.report.dropped_users += 1;
            continue;
        }
        user_map.insert(user.user_id.clone(), user);
    }

    let mut debate_map = BTreeMap::new();
    for (line, debate) in debates {
        if debate_map.contains_key(&debate.debate_id) {
            if mode == ValidationMode::Strict {
                return Err(CorpusError::Duplicate {
                    file: debates_file.clone(),
                    line,
                    kind: "debate",
                    id: debate.debate_id,
                });
            }
            v.violation(debates_file, Some(line), format!("duplicate debate_id {}", debate.debate_id))?;
            v.report.dropped_debates += 1;
            continue;
        }
        if let Err(message) = debate.check() {
            v.violation(debates_file, Some(line), message)?;
            v.report.dropped_debates += 1;
            continue;
        }
        debate_map.insert(debate.debate_id.clone(), debate);
    }

    let mut missing_debaters = BTreeSet::new();
    for debate in debate_map.values() {
        for id in [&debate.pro_debater, &debate.con_debater] {
            if !user_map.contains_key(id) && missing_debaters.insert(id.clone()) {
                v.warn(
                    debates_file,
                    None,
                    format!("debater {id} (debate {}) has no user profile", debate.debate_id),
                );
            }
        }
    }

    let mut seen_pairs = BTreeSet::new();
    let mut missing_voters = BTreeSet::new();
    let mut kept_votes = Vec::with_capacity(votes.len());
    for (line, vote) in votes {
        if !debate_map.contains_key(&vote.debate_id) {
            v.violation(
                votes_file,
                Some(line),
                format!(
                    "vote by {} references unknown debate {}",
                    vote.voter_id, vote.debate_id
                ),
            )?;
            v.report.dropped_votes += 1;
            continue;
        }
        if !seen_pairs.insert((vote.voter_id.clone(), vote.debate_id.clone())) {
            if mode == ValidationMode::Strict {
                return Err(CorpusError::Duplicate {
                    file: votes_file.clone(),
                    line,
                    kind: "vote",
                    id: format!("{}/{}", vote.voter_id, vote.debate_id),
                });
            }
            v.violation(
                votes_file,
                Some(line),
                format!("duplicate vote by {} on {}", vote.voter_id, vote.debate_id),
            )?;
            v.report.dropped_votes += 1;
            continue;
        }
        if !user_map.contains_key(&vote.voter_id) && missing_voters.insert(vote.voter_id.clone()) {
            v.warn(
                votes_file,
                Some(line),
                format!("voter {} has no user profile", vote.voter_id),
            );
        }
        kept_votes.push(vote);
    }

    let issue_catalog = match issue_catalog {
        Some(catalog) => {
            let mut seen = BTreeSet::new();
            for name in &catalog {
                if !seen.insert(name) {
                    return Err(CorpusError::Duplicate {
                        file: "issue catalog".to_string(),
                        line: 0,
                        kind: "issue",
                        id: name.clone(),
                    });
                }
            }
            catalog
        }
        None => Corpus::derive_issue_catalog(&user_map),
    };

    v.report.missing_debater_profiles = missing_debaters.into_iter().collect();
    v.report.missing_voter_profiles = missing_voters.into_iter().collect();
    let corpus = Corpus {
        debates: debate_map,
        users: user_map,
        votes: kept_votes,
        issue_catalog,
    };
    Ok((corpus, v.report))
}

fn jsonl_bytes<'a, T: Serialize + 'a>(records: impl Iterator<Item = &'a T>) -> Result<Vec<u8>, serde_json::Error> {
    let mut out = Vec::new();
    for record in records {
        serde_json::to_writer(&mut out, record)?;
        out.push(b'\n');
    }
    Ok(out)
}

/// Write a corpus as `debates.jsonl`, `users.jsonl`, `votes.jsonl` and
/// `issues.txt` inside `dir`.
pub fn write_corpus(corpus: &Corpus, dir: &Path) -> Result<CorpusPaths, CorpusError> {
    std::fs::create_dir_all(dir).map_err(|source| CorpusError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let paths = CorpusPaths {
        debates: dir.join("debates.jsonl"),
        users: dir.join("users.jsonl"),
        votes: dir.join("votes.jsonl"),
        issues: Some(dir.join("issues.txt")),
    };
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CorpusError::Io { path, source }
    };
    write_atomic(&paths.debates, &jsonl_bytes(corpus.debates.values())?).map_err(io(&paths.debates))?;
    write_atomic(&paths.users, &jsonl_bytes(corpus.users.values())?).map_err(io(&paths.users))?;
    write_atomic(&paths.votes, &jsonl_bytes(corpus.votes.iter())?).map_err(io(&paths.votes))?;
    let mut issues = Vec::new();
    for name in &corpus.issue_catalog {
        writeln!(issues, "{name}").expect("write to Vec");
    }
    let issues_path = paths.issues.clone().unwrap();
    write_atomic(&issues_path, &issues).map_err(io(&issues_path))?;
    Ok(paths)
}
