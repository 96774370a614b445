use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::LearnError;

/// Below this many discordant pairs the exact binomial test is used.
pub const EXACT_THRESHOLD: u64 = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum McNemarMethod {
    ExactBinomial,
    ChiSquareCorrected,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McNemarResult {
    /// A right, B wrong.
    pub b: u64,
    /// A wrong, B right.
    pub c: u64,
    /// `min(b, c)` for the exact test, the corrected chi-square otherwise.
    pub statistic: f64,
    pub p_value: f64,
    pub method: McNemarMethod,
}

/// Two-sided exact binomial p-value for `k = min(b, c)` successes out of
/// `b + c` fair trials.
pub fn exact_binomial_two_sided(b: u64, c: u64) -> f64 {
    let n = b + c;
    if n == 0 {
        return 1.0;
    }
    let k = b.min(c);
    // P(X <= k) accumulated with the pmf recurrence in log space
    let mut log_pmf = -(n as f64) * std::f64::consts::LN_2;
    let mut tail = log_pmf.exp();
    for i in 0..k {
        log_pmf += ((n - i) as f64).ln() - ((i + 1) as f64).ln();
        tail += log_pmf.exp();
    }
    (2.0 * tail).min(1.0)
}

/// McNemar's test comparing two classifiers on the same labelled rows.
pub fn mcnemar(preds_a: &[u8], preds_b: &[u8], labels: &[u8]) -> Result<McNemarResult, LearnError> {
    if preds_a.len() != labels.len() || preds_b.len() != labels.len() {
        return Err(LearnError::DimensionMismatch {
            expected: labels.len(),
            found: if preds_a.len() != labels.len() { preds_a.len() } else { preds_b.len() },
        });
    }
    if labels.is_empty() {
        return Err(LearnError::InvalidConfig("McNemar needs at least one row".into()));
    }
    let mut b = 0;
    let mut c = 0;
    for ((pa, pb), y) in preds_a.iter().zip(preds_b).zip(labels) {
        match (pa == y, pb == y) {
            (true, false) => b += 1,
            (false, true) => c += 1,
            _ => {}
        }
    }
    Ok(mcnemar_from_counts(b, c))
}

/// McNemar's test from discordant counts.
pub fn mcnemar_from_counts(b: u64, c: u64) -> McNemarResult {
    let n = b + c;
    if n < EXACT_THRESHOLD {
        return McNemarResult {
            b,
            c,
            statistic: b.min(c) as f64,
            p_value: exact_binomial_two_sided(b, c),
            method: McNemarMethod::ExactBinomial,
        };
    }
    let diff = (b.abs_diff(c) as f64 - 1.0).max(0.0);
    let statistic = diff * diff / n as f64;
    let chi2 = ChiSquared::new(1.0).expect("1 degree of freedom");
    McNemarResult {
        b,
        c,
        statistic,
        p_value: chi2.sf(statistic).clamp(0.0, 1.0),
        method: McNemarMethod::ChiSquareCorrected,
    }
}
