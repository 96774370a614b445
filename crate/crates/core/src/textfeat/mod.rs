//! Tokenization, lexicons and per-side linguistic features.

mod extract;
mod lexicon;
mod tfidf;
mod tokenize;

use std::path::PathBuf;

pub use extract::{
    assemble_debate_features, debate_feature_names, extract_features, extract_scalars, extract_with_terms,
    quotation_count, scalar_feature_groups, scalar_feature_names, FeatureGroup, LinguisticFeatureVector, SideText,
};
pub use lexicon::{
    ArgumentCategory, Connotation, LexiconSet, PhraseList, Polarity, Strength, ARGUMENT_CATEGORIES,
};
pub use tfidf::{DocumentTerms, TfidfConfig, TfidfModel};
pub use tokenize::{tokenize, tokenize_classified, url_spans, Token, TokenKind};

#[derive(Debug, thiserror::Error)]
pub enum TextFeatError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}:{line}: {message}")]
    Lexicon { file: String, line: usize, message: String },
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("model mismatch: {0}")]
    ModelMismatch(String),
}
