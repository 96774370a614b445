use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::lexicon::{Connotation, LexiconSet, Polarity, Strength};
use super::tfidf::{DocumentTerms, TfidfModel};
use super::tokenize::{normalize_apostrophes, tokenize, tokenize_classified, url_spans, TokenKind};
use super::TextFeatError;
use crate::corpus::{Debate, Side};

/// Everything one debater said, rounds joined by a newline.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideText {
    pub side: Side,
    pub text: String,
}

impl SideText {
    pub fn new(side: Side, text: impl Into<String>) -> Self {
        Self { side, text: text.into() }
    }

    pub fn from_debate(debate: &Debate, side: Side) -> Self {
        let parts: Vec<&str> = debate
            .rounds
            .iter()
            .map(|r| match side {
                Side::Pro => r.pro_text.as_str(),
                Side::Con => r.con_text.as_str(),
            })
            .collect();
        Self::new(side, parts.join("\n"))
    }
}

impl AsRef<str> for SideText {
    fn as_ref(&self) -> &str {
        &self.text
    }
}

/// Scalar features of one side plus its sparse tf-idf block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinguisticFeatureVector {
    pub side: Side,
    /// Values in the order of [`scalar_feature_names`].
    pub scalars: Vec<f64>,
    /// Sorted (vocabulary index, weight) pairs.
    pub tfidf: Vec<(usize, f64)>,
    pub vocab_size: usize,
    pub model_fingerprint: u64,
}

impl LinguisticFeatureVector {
    pub fn dense_tfidf(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.vocab_size];
        for &(i, x) in &self.tfidf {
            v[i] = x;
        }
        v
    }
}

/// Scalar features before the argument categories.
const LEADING: [&str; 17] = [
    "length",
    "opponent",
    "politeness",
    "evidence",
    "sentiment",
    "subj_neg_strong",
    "subj_neg_weak",
    "subj_pos_strong",
    "subj_pos_weak",
    "swear",
    "connotation_pos",
    "connotation_neg",
    "connotation_neu",
    "pronouns_first",
    "pronouns_second",
    "pronouns_third",
    "modals",
];

/// Scalar features after the argument categories.
const TRAILING: [&str; 5] = ["spelling_errors", "links", "numbers", "exclamations", "questions"];

/// Names of the scalar block, in extraction order.
pub fn scalar_feature_names(lexicons: &LexiconSet) -> Vec<String> {
    LEADING
        .iter()
        .map(|s| s.to_string())
        .chain(lexicons.argument_categories.iter().map(|c| format!("arg_{}", c.name)))
        .chain(TRAILING.iter().map(|s| s.to_string()))
        .collect()
}

/// A named set of scalar-block columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureGroup {
    pub name: String,
    pub columns: Vec<usize>,
}

/// Linguistic feature groups over the scalar block: one per feature family
/// plus `arg:<category>` for each argumentation style.
pub fn scalar_feature_groups(lexicons: &LexiconSet) -> Vec<FeatureGroup> {
    let names = scalar_feature_names(lexicons);
    let cols = |pred: &dyn Fn(&str) -> bool| -> Vec<usize> {
        names.iter().enumerate().filter(|(_, n)| pred(n)).map(|(i, _)| i).collect()
    };
    let group = |name: &str, columns: Vec<usize>| FeatureGroup {
        name: name.to_string(),
        columns,
    };
    let mut groups = vec![
        group("length", cols(&|n| n == "length")),
        group("opponent", cols(&|n| n == "opponent")),
        group("politeness", cols(&|n| n == "politeness")),
        group("evidence", cols(&|n| n == "evidence")),
        group("sentiment", cols(&|n| n == "sentiment")),
        group("subjectivity", cols(&|n| n.starts_with("subj_"))),
        group("swear", cols(&|n| n == "swear")),
        group("connotation", cols(&|n| n.starts_with("connotation_"))),
        group("pronouns", cols(&|n| n.starts_with("pronouns_"))),
        group("modals", cols(&|n| n == "modals")),
        group("argument_lexicon", cols(&|n| n.starts_with("arg_"))),
        group("spelling", cols(&|n| n == "spelling_errors")),
        group("links", cols(&|n| n == "links")),
        group("numbers", cols(&|n| n == "numbers")),
        group("exclamations", cols(&|n| n == "exclamations")),
        group("questions", cols(&|n| n == "questions")),
    ];
    for c in &lexicons.argument_categories {
        let target = format!("arg_{}", c.name);
        groups.push(group(&format!("arg:{}", c.name), cols(&|n| n == target)));
    }
    groups
}

fn quote_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new("\"([^\"]*)\"|\u{201c}([^\u{201d}]*)\u{201d}").expect("valid quote regex"))
}

/// Quoted spans of at least three tokens.
pub fn quotation_count(text: &str) -> usize {
    quote_regex()
        .captures_iter(text)
        .filter(|c| {
            let inner = c.get(1).or_else(|| c.get(2)).map_or("", |m| m.as_str());
            tokenize(inner).len() >= 3
        })
        .count()
}

/// The scalar block for `text`.
pub fn extract_scalars(text: &str, lexicons: &LexiconSet) -> Vec<f64> {
    let tokens = tokenize_classified(text);
    let words: Vec<&str> = tokens.iter().map(|t| t.text.as_str()).collect();
    let n_tokens = tokens.len() as f64;
    let count_in = |set: &std::collections::HashSet<String>| words.iter().filter(|w| set.contains(**w)).count() as f64;

    let mut polarity_sum = 0.0;
    let mut polarity_hits = 0usize;
    let mut subj = [0.0f64; 4];
    let mut conn = [0.0f64; 3];
    for w in &words {
        if let Some(&(p, s)) = lexicons.subjectivity.get(*w) {
            polarity_hits += 1;
            polarity_sum += if p == Polarity::Positive { 1.0 } else { -1.0 };
            let slot = match (p, s) {
                (Polarity::Negative, Strength::Strong) => 0,
                (Polarity::Negative, Strength::Weak) => 1,
                (Polarity::Positive, Strength::Strong) => 2,
                (Polarity::Positive, Strength::Weak) => 3,
            };
            subj[slot] += 1.0;
        }
        if let Some(c) = lexicons.connotation.get(*w) {
            let slot = match c {
                Connotation::Positive => 0,
                Connotation::Negative => 1,
                Connotation::Neutral => 2,
            };
            conn[slot] += 1.0;
        }
    }
    let sentiment = if polarity_hits == 0 { 0.0 } else { polarity_sum / polarity_hits as f64 };
    if n_tokens > 0.0 {
        conn.iter_mut().for_each(|c| *c /= n_tokens);
    }

    let normalized = normalize_apostrophes(text);
    let mut out = Vec::with_capacity(LEADING.len() + lexicons.argument_categories.len() + TRAILING.len());
    out.push(n_tokens);
    out.push(lexicons.opponent.count(&words) as f64);
    out.push(lexicons.politeness.count(&words) as f64);
    out.push((lexicons.evidence.count(&words) + quotation_count(&normalized)) as f64);
    out.push(sentiment);
    out.extend(subj);
    out.push(count_in(&lexicons.swear));
    out.extend(conn);
    for set in &lexicons.pronouns {
        out.push(count_in(set));
    }
    out.push(count_in(&lexicons.modals));
    for cat in &lexicons.argument_categories {
        out.push(cat.count(&normalized) as f64);
    }
    let spelling = tokens
        .iter()
        .filter(|t| t.kind == TokenKind::Word && !t.text.chars().any(|c| c.is_ascii_digit()))
        .filter(|t| !lexicons.is_known_word(&t.text))
        .count();
    out.push(spelling as f64);
    out.push(url_spans(&normalized).len() as f64);
    out.push(tokens.iter().filter(|t| t.kind == TokenKind::Number).count() as f64);
    out.push(text.matches('!').count() as f64);
    out.push(text.matches('?').count() as f64);
    out
}

/// All linguistic features of one side.
pub fn extract_features(side_text: &SideText, lexicons: &LexiconSet, tfidf: &TfidfModel) -> LinguisticFeatureVector {
    let terms = DocumentTerms::from_text(&side_text.text, tfidf.config.max_n);
    extract_with_terms(side_text.side, &side_text.text, &terms, lexicons, tfidf)
}

/// As [`extract_features`] with pre-counted n-grams.
pub fn extract_with_terms(
    side: Side,
    text: &str,
    terms: &DocumentTerms,
    lexicons: &LexiconSet,
    tfidf: &TfidfModel,
) -> LinguisticFeatureVector {
    LinguisticFeatureVector {
        side,
        scalars: extract_scalars(text, lexicons),
        tfidf: tfidf.transform_terms(terms),
        vocab_size: tfidf.len(),
        model_fingerprint: tfidf.fingerprint(),
    }
}

/// PRO block followed by CON block, each scalar features then dense tf-idf.
pub fn assemble_debate_features(
    pro: &LinguisticFeatureVector,
    con: &LinguisticFeatureVector,
) -> Result<Vec<f64>, TextFeatError> {
    if pro.model_fingerprint != con.model_fingerprint || pro.vocab_size != con.vocab_size {
        return Err(TextFeatError::ModelMismatch(
            "sides were extracted with different tf-idf models".into(),
        ));
    }
    if pro.scalars.len() != con.scalars.len() {
        return Err(TextFeatError::ModelMismatch(format!(
            "scalar blocks differ in length ({} vs {})",
            pro.scalars.len(),
            con.scalars.len()
        )));
    }
    let mut out = Vec::with_capacity(2 * (pro.scalars.len() + pro.vocab_size));
    for v in [pro, con] {
        out.extend_from_slice(&v.scalars);
        out.extend(v.dense_tfidf());
    }
    Ok(out)
}

/// Names matching [`assemble_debate_features`].
pub fn debate_feature_names(lexicons: &LexiconSet, tfidf: &TfidfModel) -> Vec<String> {
    let block: Vec<String> = scalar_feature_names(lexicons).into_iter().chain(tfidf.feature_names()).collect();
    ["pro", "con"]
        .iter()
        .flat_map(|side| block.iter().map(move |n| format!("{side}:{n}")))
        .collect()
}
