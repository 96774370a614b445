use serde::{Deserialize, Serialize};

use super::model::{Dimension, PointWeights, Stance, Vote};
use super::scoring::{convinced_toward, total_points};
use super::CorpusError;

/// Variable labels, in matrix order. The first eight are per-side dimension
/// indicators; the last two are "CON gets more total points" and "this vote
/// moved toward CON".
pub const CORRELATION_LABELS: [&str; 10] = [
    "CBC", "CCA", "CRS", "CBSG", "PBC", "PCA", "PRS", "PBSG", "CMTP", "CCMV",
];

/// Indices of the eight dimension indicators within [`CORRELATION_LABELS`].
pub const DIMENSION_VARIABLES: std::ops::Range<usize> = 0..8;
pub const MORE_TOTAL_POINTS: usize = 8;
pub const CONVINCED_VOTER: usize = 9;

const DIMENSION_ORDER: [Dimension; 4] = [
    Dimension::Conduct,
    Dimension::ConvincingArguments,
    Dimension::ReliableSources,
    Dimension::SpellingGrammar,
];

/// Pearson correlations between the ten per-vote binary indicators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
    /// Labels of indicators that were constant across all votes; their
    /// off-diagonal correlations are reported as 0.
    pub zero_variance: Vec<String>,
    pub vote_count: usize,
}

/// Binary indicators of a single vote, in [`CORRELATION_LABELS`] order.
pub fn vote_indicators(vote: &Vote, weights: &PointWeights) -> [f64; 10] {
    let mut out = [0.0; 10];
    for (i, dimension) in DIMENSION_ORDER.iter().enumerate() {
        let alloc = vote.allocations.get(*dimension);
        out[i] = f64::from(alloc == Stance::Con);
        out[i + 4] = f64::from(alloc == Stance::Pro);
    }
    let (pro, con) = total_points(vote, weights);
    out[MORE_TOTAL_POINTS] = f64::from(con > pro);
    out[CONVINCED_VOTER] = f64::from(convinced_toward(vote) == Some(Stance::Con));
    out
}

pub fn vote_dimension_correlations(
    votes: &[Vote],
    weights: &PointWeights,
) -> Result<CorrelationMatrix, CorpusError> {
    if votes.len() < 2 {
        return Err(CorpusError::TooFewVotes(votes.len()));
    }
    let rows: Vec<[f64; 10]> = votes.iter().map(|v| vote_indicators(v, weights)).collect();
    let n = rows.len() as f64;
    let mut mean = [0.0; 10];
    for row in &rows {
        for (m, x) in mean.iter_mut().zip(row) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);

    let mut cov = [[0.0; 10]; 10];
    for row in &rows {
        for i in 0..10 {
            let di = row[i] - mean[i];
            for j in i..10 {
                cov[i][j] += di * (row[j] - mean[j]);
            }
        }
    }

    let constant: Vec<bool> = (0..10).map(|i| cov[i][i] <= 0.0).collect();
    let mut values = vec![vec![0.0; 10]; 10];
    for i in 0..10 {
        values[i][i] = 1.0;
        for j in (i + 1)..10 {
            let r = if constant[i] || constant[j] {
                0.0
            } else {
                (cov[i][j] / (cov[i][i] * cov[j][j]).sqrt()).clamp(-1.0, 1.0)
            };
            values[i][j] = r;
            values[j][i] = r;
        }
    }

    Ok(CorrelationMatrix {
        labels: CORRELATION_LABELS.iter().map(|s| s.to_string()).collect(),
        values,
        zero_variance: (0..10)
            .filter(|&i| constant[i])
            .map(|i| CORRELATION_LABELS[i].to_string())
            .collect(),
        vote_count: votes.len(),
    })
}

impl CorrelationMatrix {
    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        Some(self.values[self.index_of(a)?][self.index_of(b)?])
    }

    /// Dimension indicators ranked by their correlation with `target`
    /// (highest first).
    pub fn ranked_against(&self, target: usize) -> Vec<(String, f64)> {
        let mut ranked: Vec<(String, f64)> = DIMENSION_VARIABLES
            .map(|i| (self.labels[i].clone(), self.values[i][target]))
            .collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ranked
    }

    /// CSV with a header row and a label column.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("variable");
        for label in &self.labels {
            out.push(',');
            out.push_str(label);
        }
        out.push('\n');
        for (label, row) in self.labels.iter().zip(&self.values) {
            out.push_str(label);
            for value in row {
                out.push_str(&format!(",{value:.6}"));
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::model::Allocations;

    fn vote(alloc: Allocations, pre: Stance, post: Stance) -> Vote {
        Vote {
            voter_id: "v".into(),
            debate_id: "d".into(),
            pre_stance: pre,
            post_stance: post,
            allocations: alloc,
        }
    }

    #[test]
    fn needs_two_votes() {
        let v = vote(Allocations::uniform(Stance::Pro), Stance::Pro, Stance::Pro);
        assert!(matches!(
            vote_dimension_correlations(&[v], &PointWeights::default()),
            Err(CorpusError::TooFewVotes(1))
        ));
    }

    #[test]
    fn co_occurring_indicators_correlate_perfectly() {
        let votes = vec![
            vote(Allocations::uniform(Stance::Con), Stance::Pro, Stance::Con),
            vote(Allocations::uniform(Stance::Pro), Stance::Con, Stance::Pro),
            vote(Allocations::uniform(Stance::Con), Stance::Pro, Stance::Con),
        ];
        let m = vote_dimension_correlations(&votes, &PointWeights::default()).unwrap();
        assert_eq!(m.get("CCA", "CMTP"), Some(1.0));
        assert_eq!(m.get("CCA", "CCMV"), Some(1.0));
        assert_eq!(m.get("CCA", "PCA"), Some(-1.0));
        for i in 0..10 {
            assert_eq!(m.values[i][i], 1.0);
        }
    }

    #[test]
    fn constant_indicator_is_flagged() {
        let mut a = Allocations::uniform(Stance::Pro);
        a.conduct = Stance::Tie;
        let mut b = Allocations::uniform(Stance::Con);
        b.conduct = Stance::Tie;
        let votes = vec![
            vote(a, Stance::Pro, Stance::Pro),
            vote(b, Stance::Pro, Stance::Pro),
        ];
        let m = vote_dimension_correlations(&votes, &PointWeights::default()).unwrap();
        assert!(m.zero_variance.contains(&"CBC".to_string()));
        assert!(m.zero_variance.contains(&"CCMV".to_string()));
        assert_eq!(m.get("CBC", "CCA"), Some(0.0));
        assert_eq!(m.get("CBC", "CBC"), Some(1.0));
    }

    #[test]
    fn csv_has_eleven_lines() {
        let votes = vec![
            vote(Allocations::uniform(Stance::Con), Stance::Pro, Stance::Con),
            vote(Allocations::uniform(Stance::Pro), Stance::Con, Stance::Pro),
        ];
        let m = vote_dimension_correlations(&votes, &PointWeights::default()).unwrap();
        let csv = m.to_csv();
        assert_eq!(csv.lines().count(), 11);
        assert!(csv.starts_with("variable,CBC,CCA"));
    }
}
