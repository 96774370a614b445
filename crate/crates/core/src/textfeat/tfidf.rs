use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::tokenize::{tokenize_classified, TokenKind};
use super::TextFeatError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TfidfConfig {
    /// Minimum number of training documents containing an n-gram.
    pub min_df: usize,
    /// Keep only the most frequent n-grams (by document frequency).
    pub max_features: Option<usize>,
    /// Longest n-gram length.
    pub max_n: usize,
}

impl Default for TfidfConfig {
    fn default() -> Self {
        Self {
            min_df: 2,
            max_features: None,
            max_n: 3,
        }
    }
}

/// n-gram counts of one document, sorted by term.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DocumentTerms {
    counts: Vec<(String, u32)>,
}

impl DocumentTerms {
    /// Counts n-grams over the non-punctuation tokens of `text`.
    pub fn from_text(text: &str, max_n: usize) -> Self {
        let tokens: Vec<String> = tokenize_classified(text)
            .into_iter()
            .filter(|t| t.kind != TokenKind::Punct)
            .map(|t| t.text)
            .collect();
        let mut counts: HashMap<String, u32> = HashMap::new();
        for n in 1..=max_n.max(1) {
            for gram in tokens.windows(n) {
                *counts.entry(gram.join(" ")).or_default() += 1;
            }
        }
        let mut counts: Vec<(String, u32)> = counts.into_iter().collect();
        counts.sort_unstable();
        Self { counts }
    }

    pub fn counts(&self) -> &[(String, u32)] {
        &self.counts
    }
}

/// Vocabulary and idf weights fitted on a set of training documents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfidfModel {
    pub vocabulary: BTreeMap<String, usize>,
    pub idf: Vec<f64>,
    pub fit_document_count: usize,
    pub config: TfidfConfig,
}

impl TfidfModel {
    /// Fit on raw texts.
    pub fn fit<S: AsRef<str>>(docs: &[S], config: &TfidfConfig) -> Result<Self, TextFeatError> {
        let terms: Vec<DocumentTerms> = docs
            .iter()
            .map(|d| DocumentTerms::from_text(d.as_ref(), config.max_n))
            .collect();
        Self::fit_terms(terms.iter(), config)
    }

    /// Fit on pre-counted documents.
    pub fn fit_terms<'a, I>(docs: I, config: &TfidfConfig) -> Result<Self, TextFeatError>
    where
        I: IntoIterator<Item = &'a DocumentTerms>,
    {
        let mut df: HashMap<&str, usize> = HashMap::new();
        let mut n_docs = 0;
        for doc in docs {
            n_docs += 1;
            for (term, _) in &doc.counts {
                *df.entry(term.as_str()).or_default() += 1;
            }
        }
        if n_docs == 0 {
            return Err(TextFeatError::EmptyInput("tf-idf needs at least one document".into()));
        }
        let mut kept: Vec<(&str, usize)> = df.into_iter().filter(|&(_, d)| d >= config.min_df).collect();
        if let Some(max) = config.max_features {
            kept.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
            kept.truncate(max);
        }
        kept.sort_unstable();
        let n = n_docs as f64;
        let idf = kept.iter().map(|&(_, d)| ((1.0 + n) / (1.0 + d as f64)).ln() + 1.0).collect();
        let vocabulary = kept.iter().enumerate().map(|(i, &(t, _))| (t.to_string(), i)).collect();
        Ok(Self {
            vocabulary,
            idf,
            fit_document_count: n_docs,
            config: config.clone(),
        })
    }

    pub fn len(&self) -> usize {
        self.idf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.idf.is_empty()
    }

    /// Raw term frequency times idf, L2-normalized, as sorted (index, value)
    /// pairs. Terms outside the vocabulary are ignored.
    pub fn transform_terms(&self, doc: &DocumentTerms) -> Vec<(usize, f64)> {
        let mut out: Vec<(usize, f64)> = doc
            .counts
            .iter()
            .filter_map(|(t, c)| self.vocabulary.get(t).map(|&i| (i, f64::from(*c) * self.idf[i])))
            .collect();
        out.sort_unstable_by_key(|&(i, _)| i);
        let norm = out.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            out.iter_mut().for_each(|(_, v)| *v /= norm);
        }
        out
    }

    pub fn transform(&self, text: &str) -> Vec<(usize, f64)> {
        self.transform_terms(&DocumentTerms::from_text(text, self.config.max_n))
    }

    /// Identity of the fitted vocabulary and weights, used to detect vectors
    /// produced by different models.
    pub fn fingerprint(&self) -> u64 {
        // FNV-1a
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |bytes: &[u8]| {
            for b in bytes {
                h ^= u64::from(*b);
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        };
        eat(&(self.fit_document_count as u64).to_le_bytes());
        for (term, &i) in &self.vocabulary {
            eat(term.as_bytes());
            eat(&[0xff]);
            eat(&self.idf[i].to_bits().to_le_bytes());
        }
        h
    }

    /// Feature names for the dense form of the block.
    pub fn feature_names(&self) -> Vec<String> {
        let mut names = vec![String::new(); self.len()];
        for (t, &i) in &self.vocabulary {
            names[i] = format!("tfidf:{t}");
        }
        names
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(min_df: usize) -> TfidfConfig {
        TfidfConfig {
            min_df,
            ..TfidfConfig::default()
        }
    }

    #[test]
    fn idf_of_rare_token() {
        let mut docs = vec!["alpha"; 9];
        docs.push("beta");
        let m = TfidfModel::fit(&docs, &cfg(1)).unwrap();
        let i = m.vocabulary["beta"];
        assert!((m.idf[i] - ((11.0f64 / 2.0).ln() + 1.0)).abs() < 1e-12);
        assert_eq!(m.fit_document_count, 10);
    }

    #[test]
    fn identical_docs_give_single_term_with_minimal_idf() {
        let m = TfidfModel::fit(&["same"; 4], &TfidfConfig::default()).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.idf[0], 1.0);
    }

    #[test]
    fn min_df_prunes_hapaxes() {
        let m = TfidfModel::fit(&["a b c", "a b d"], &cfg(2)).unwrap();
        let terms: Vec<&str> = m.vocabulary.keys().map(String::as_str).collect();
        assert_eq!(terms, ["a", "a b", "b"]);
        assert!(m.vocabulary.values().copied().eq(0..3));
    }

    #[test]
    fn ngrams_skip_punctuation_and_norm_is_one() {
        let m = TfidfModel::fit(&["x, y z", "x y"], &cfg(1)).unwrap();
        assert!(m.vocabulary.contains_key("x y z"));
        let v = m.transform("x y z!");
        let norm: f64 = v.iter().map(|(_, x)| x * x).sum();
        assert!((norm - 1.0).abs() < 1e-12);
        assert!(m.transform("unseen words").is_empty());
    }

    #[test]
    fn max_features_keeps_most_frequent() {
        let c = TfidfConfig {
            min_df: 1,
            max_features: Some(1),
            max_n: 1,
        };
        let m = TfidfModel::fit(&["a b", "b c", "b"], &c).unwrap();
        assert_eq!(m.vocabulary.keys().collect::<Vec<_>>(), ["b"]);
    }

    #[test]
    fn empty_input_and_fingerprint() {
        let none: [&str; 0] = [];
        assert!(TfidfModel::fit(&none, &cfg(1)).is_err());
        let a = TfidfModel::fit(&["a b", "a"], &cfg(1)).unwrap();
        let b = TfidfModel::fit(&["a b", "a"], &cfg(1)).unwrap();
        let c = TfidfModel::fit(&["a c", "a"], &cfg(1)).unwrap();
        assert_eq!(a.fingerprint(), b.fingerprint());
        assert_ne!(a.fingerprint(), c.fingerprint());
    }
}
