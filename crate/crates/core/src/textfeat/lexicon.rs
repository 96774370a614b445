use std::collections::{HashMap, HashSet};
use std::path::Path;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::tokenize::tokenize;
use super::TextFeatError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strength {
    Strong,
    Weak,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Connotation {
    Positive,
    Negative,
    Neutral,
}

/// Argumentation-style categories that the built-in pattern file covers.
pub const ARGUMENT_CATEGORIES: [&str; 15] = [
    "assessment",
    "authority",
    "conditioning",
    "contrasting",
    "emphasizing",
    "generalizing",
    "empathy",
    "inconsistency",
    "necessity",
    "possibility",
    "priority",
    "rhetorical_questions",
    "desire",
    "difficulty",
    "approval",
];

/// Multi-token phrases matched against the token stream.
#[derive(Debug, Clone, Default)]
pub struct PhraseList {
    /// Tokenized phrases, longest first.
    phrases: Vec<Vec<String>>,
}

impl PhraseList {
    pub fn new<I: IntoIterator<Item = S>, S: AsRef<str>>(entries: I) -> Self {
        let mut phrases: Vec<Vec<String>> = entries
            .into_iter()
            .map(|e| tokenize(e.as_ref()))
            .filter(|p| !p.is_empty())
            .collect();
        phrases.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        phrases.dedup();
        Self { phrases }
    }

    pub fn len(&self) -> usize {
        self.phrases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }

    /// Non-overlapping occurrences, scanning left to right and preferring
    /// the longest phrase at each position.
    pub fn count<S: AsRef<str>>(&self, tokens: &[S]) -> usize {
        let mut i = 0;
        let mut hits = 0;
        while i < tokens.len() {
            let matched = self.phrases.iter().find(|p| {
                p.len() <= tokens.len() - i && p.iter().zip(&tokens[i..]).all(|(a, b)| a == b.as_ref())
            });
            match matched {
                Some(p) => {
                    hits += 1;
                    i += p.len();
                }
                None => i += 1,
            }
        }
        hits
    }
}

#[derive(Debug, Clone)]
pub struct ArgumentCategory {
    pub name: String,
    pub patterns: Vec<String>,
    regex: Regex,
}

impl ArgumentCategory {
    pub fn new(name: &str, patterns: Vec<String>) -> Result<Self, regex::Error> {
        let joined = patterns.iter().map(|p| format!("(?:{p})")).collect::<Vec<_>>().join("|");
        let regex = Regex::new(&format!("(?i){joined}"))?;
        Ok(Self {
            name: name.to_string(),
            patterns,
            regex,
        })
    }

    /// Number of non-overlapping matches in `text`.
    pub fn count(&self, text: &str) -> usize {
        self.regex.find_iter(text).count()
    }
}

/// Every word list and pattern set used by the linguistic extractors.
#[derive(Debug, Clone)]
pub struct LexiconSet {
    pub subjectivity: HashMap<String, (Polarity, Strength)>,
    pub connotation: HashMap<String, Connotation>,
    pub swear: HashSet<String>,
    pub politeness: PhraseList,
    pub evidence: PhraseList,
    pub opponent: PhraseList,
    pub modals: HashSet<String>,
    /// First, second and third person.
    pub pronouns: [HashSet<String>; 3],
    pub dictionary: HashSet<String>,
    pub argument_categories: Vec<ArgumentCategory>,
    /// (file name, "builtin" or the path it was read from).
    pub sources: Vec<(String, String)>,
}

pub const SUBJECTIVITY_FILE: &str = "subjectivity.tsv";
pub const CONNOTATION_FILE: &str = "connotation.tsv";
pub const ARGPATTERNS_FILE: &str = "argpatterns.tsv";
pub const SWEAR_FILE: &str = "swear.txt";
pub const MODALS_FILE: &str = "modals.txt";
pub const PRONOUN_FILES: [&str; 3] = ["pronouns_first.txt", "pronouns_second.txt", "pronouns_third.txt"];
pub const DICTIONARY_FILE: &str = "dictionary.txt";
pub const POLITENESS_FILE: &str = "politeness.txt";
pub const EVIDENCE_FILE: &str = "evidence.txt";
pub const OPPONENT_FILE: &str = "opponent.txt";

fn builtin(name: &str) -> &'static str {
    match name {
        SUBJECTIVITY_FILE => include_str!("../../lexicons/subjectivity.tsv"),
        CONNOTATION_FILE => include_str!("../../lexicons/connotation.tsv"),
        ARGPATTERNS_FILE => include_str!("../../lexicons/argpatterns.tsv"),
        SWEAR_FILE => include_str!("../../lexicons/swear.txt"),
        MODALS_FILE => include_str!("../../lexicons/modals.txt"),
        "pronouns_first.txt" => include_str!("../../lexicons/pronouns_first.txt"),
        "pronouns_second.txt" => include_str!("../../lexicons/pronouns_second.txt"),
        "pronouns_third.txt" => include_str!("../../lexicons/pronouns_third.txt"),
        DICTIONARY_FILE => include_str!("../../lexicons/dictionary.txt"),
        POLITENESS_FILE => include_str!("../../lexicons/politeness.txt"),
        EVIDENCE_FILE => include_str!("../../lexicons/evidence.txt"),
        OPPONENT_FILE => include_str!("../../lexicons/opponent.txt"),
        other => unreachable!("no built-in lexicon {other}"),
    }
}

/// Non-blank, non-comment lines with their 1-based numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
}

fn lexicon_error(file: &str, line: usize, message: impl Into<String>) -> TextFeatError {
    TextFeatError::Lexicon {
        file: file.to_string(),
        line,
        message: message.into(),
    }
}

fn parse_words(text: &str) -> HashSet<String> {
    content_lines(text).map(|(_, l)| l.trim().to_lowercase()).collect()
}

fn parse_phrases(text: &str) -> PhraseList {
    PhraseList::new(content_lines(text).map(|(_, l)| l.trim().to_lowercase()))
}

fn parse_subjectivity(file: &str, text: &str) -> Result<HashMap<String, (Polarity, Strength)>, TextFeatError> {
    let mut map = HashMap::new();
    for (line, l) in content_lines(text) {
        let cols: Vec<&str> = l.split('\t').map(str::trim).collect();
        if cols.len() != 3 {
            return Err(lexicon_error(file, line, "expected word<TAB>polarity<TAB>strength"));
        }
        let polarity = match cols[1].to_lowercase().as_str() {
            "positive" => Polarity::Positive,
            "negative" => Polarity::Negative,
            other => return Err(lexicon_error(file, line, format!("unknown polarity {other:?}"))),
        };
        let strength = match cols[2].to_lowercase().as_str() {
            "strong" | "strongsubj" => Strength::Strong,
            "weak" | "weaksubj" => Strength::Weak,
            other => return Err(lexicon_error(file, line, format!("unknown strength {other:?}"))),
        };
        map.insert(cols[0].to_lowercase(), (polarity, strength));
    }
    Ok(map)
}

fn parse_connotation(file: &str, text: &str) -> Result<HashMap<String, Connotation>, TextFeatError> {
    let mut map = HashMap::new();
    for (line, l) in content_lines(text) {
        let cols: Vec<&str> = l.split('\t').map(str::trim).collect();
        if cols.len() != 2 {
            return Err(lexicon_error(file, line, "expected word<TAB>class"));
        }
        let class = match cols[1].to_lowercase().as_str() {
            "positive" => Connotation::Positive,
            "negative" => Connotation::Negative,
            "neutral" => Connotation::Neutral,
            other => return Err(lexicon_error(file, line, format!("unknown connotation {other:?}"))),
        };
        map.insert(cols[0].to_lowercase(), class);
    }
    Ok(map)
}

fn parse_argpatterns(file: &str, text: &str) -> Result<Vec<ArgumentCategory>, TextFeatError> {
    let mut order: Vec<String> = Vec::new();
    let mut patterns: HashMap<String, Vec<String>> = HashMap::new();
    for (line, l) in content_lines(text) {
        let Some((name, pattern)) = l.split_once('\t') else {
            return Err(lexicon_error(file, line, "expected category<TAB>regex"));
        };
        let name = name.trim().to_lowercase().replace([' ', '-'], "_");
        if name.is_empty() {
            return Err(lexicon_error(file, line, "empty category name"));
        }
        Regex::new(pattern).map_err(|e| lexicon_error(file, line, format!("bad regex: {e}")))?;
        if !patterns.contains_key(&name) {
            order.push(name.clone());
        }
        patterns.entry(name).or_default().push(pattern.to_string());
    }
    let missing: Vec<&str> = ARGUMENT_CATEGORIES
        .iter()
        .copied()
        .filter(|c| !patterns.contains_key(*c))
        .collect();
    if !missing.is_empty() {
        log::warn!("{file}: argument categories without patterns: {}", missing.join(", "));
    }
    order
        .into_iter()
        .map(|name| {
            let p = patterns.remove(&name).unwrap_or_default();
            ArgumentCategory::new(&name, p).map_err(|e| lexicon_error(file, 0, format!("{name}: {e}")))
        })
        .collect()
}

impl LexiconSet {
    /// The small demonstration lexicons compiled into the crate.
    pub fn builtin() -> Self {
        Self::assemble(|name| Ok((builtin(name).to_string(), "builtin".to_string())))
            .expect("built-in lexicons are valid")
    }

    /// Reads lexicon files from `dir`. Files that are absent fall back to
    /// the built-in versions.
    pub fn from_dir(dir: &Path) -> Result<Self, TextFeatError> {
        Self::assemble(|name| {
            let path = dir.join(name);
            match std::fs::read_to_string(&path) {
                Ok(text) => Ok((text, path.display().to_string())),
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                    log::info!("{} not found, using the built-in list", path.display());
                    Ok((builtin(name).to_string(), "builtin".to_string()))
                }
                Err(source) => Err(TextFeatError::Io { path, source }),
            }
        })
    }

    fn assemble<F>(mut read: F) -> Result<Self, TextFeatError>
    where
        F: FnMut(&str) -> Result<(String, String), TextFeatError>,
    {
        let mut sources = Vec::new();
        let mut get = |name: &str| -> Result<String, TextFeatError> {
            let (text, origin) = read(name)?;
            sources.push((name.to_string(), origin));
            Ok(text)
        };
        let subjectivity = parse_subjectivity(SUBJECTIVITY_FILE, &get(SUBJECTIVITY_FILE)?)?;
        let connotation = parse_connotation(CONNOTATION_FILE, &get(CONNOTATION_FILE)?)?;
        let argument_categories = parse_argpatterns(ARGPATTERNS_FILE, &get(ARGPATTERNS_FILE)?)?;
        let swear = parse_words(&get(SWEAR_FILE)?);
        let modals = parse_words(&get(MODALS_FILE)?);
        let pronouns = [
            parse_words(&get(PRONOUN_FILES[0])?),
            parse_words(&get(PRONOUN_FILES[1])?),
            parse_words(&get(PRONOUN_FILES[2])?),
        ];
        let dictionary = parse_words(&get(DICTIONARY_FILE)?);
        let politeness = parse_phrases(&get(POLITENESS_FILE)?);
        let evidence = parse_phrases(&get(EVIDENCE_FILE)?);
        let opponent = parse_phrases(&get(OPPONENT_FILE)?);
        Ok(Self {
            subjectivity,
            connotation,
            swear,
            politeness,
            evidence,
            opponent,
            modals,
            pronouns,
            dictionary,
            argument_categories,
            sources,
        })
    }

    pub fn category_names(&self) -> Vec<&str> {
        self.argument_categories.iter().map(|c| c.name.as_str()).collect()
    }

    /// Dictionary lookup that also accepts possessives of known words.
    pub fn is_known_word(&self, word: &str) -> bool {
        self.dictionary.contains(word)
            || word
                .strip_suffix("'s")
                .or_else(|| word.strip_suffix('\''))
                .is_some_and(|stem| self.dictionary.contains(stem))
    }
}
