use serde::{Deserialize, Serialize};

use super::BeliefsError;
use crate::corpus::{IssueOpinion, UserProfile};
use crate::linalg::{dot, norm};

/// Slots per issue, in order: PRO, CON, N/O, UND.
pub const SLOTS_PER_ISSUE: usize = 4;

/// What to do when a profile has no entry for a catalog issue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingIssuePolicy {
    /// Treat the issue as N/O.
    #[default]
    AsNoOpinion,
    /// Fail with [`BeliefsError::MissingIssue`].
    Error,
}

/// Concatenated one-hot encoding of a user's big-issue opinions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BigIssuesVector(Vec<f64>);

impl BigIssuesVector {
    /// Wrap raw values, checking that every 4-slot block is one-hot.
    pub fn from_values(values: Vec<f64>) -> Result<Self, BeliefsError> {
        if values.len() % SLOTS_PER_ISSUE != 0 {
            return Err(BeliefsError::NotOneHot(format!(
                "length {} is not a multiple of {SLOTS_PER_ISSUE}",
                values.len()
            )));
        }
        for (k, block) in values.chunks(SLOTS_PER_ISSUE).enumerate() {
            let ones = block.iter().filter(|&&x| x == 1.0).count();
            let zeros = block.iter().filter(|&&x| x == 0.0).count();
            if ones != 1 || zeros != SLOTS_PER_ISSUE - 1 {
                return Err(BeliefsError::NotOneHot(format!("block {k} is {block:?}")));
            }
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn issue_count(&self) -> usize {
        self.0.len() / SLOTS_PER_ISSUE
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

fn slot(opinion: IssueOpinion) -> Option<usize> {
    match opinion {
        IssueOpinion::Pro => Some(0),
        IssueOpinion::Con => Some(1),
        IssueOpinion::NoOpinion => Some(2),
        IssueOpinion::Undecided => Some(3),
        IssueOpinion::NotSaying => None,
    }
}

/// Catalog issues the profile has no answer for.
pub fn missing_issues<'a>(profile: &UserProfile, catalog: &'a [String]) -> Vec<&'a str> {
    catalog
        .iter()
        .filter(|issue| !profile.big_issue_opinions.contains_key(*issue))
        .map(String::as_str)
        .collect()
}

/// Encode a profile's opinions on `catalog` as a [`BigIssuesVector`].
///
/// Users who answered N/S on any catalog issue cannot be encoded.
pub fn encode_big_issues(
    profile: &UserProfile,
    catalog: &[String],
    policy: MissingIssuePolicy,
) -> Result<BigIssuesVector, BeliefsError> {
    let not_saying: Vec<String> = catalog
        .iter()
        .filter(|issue| profile.big_issue_opinions.get(*issue) == Some(&IssueOpinion::NotSaying))
        .cloned()
        .collect();
    if !not_saying.is_empty() {
        return Err(BeliefsError::NotSayingPresent {
            user_id: profile.user_id.clone(),
            issues: not_saying,
        });
    }
    let mut values = vec![0.0; catalog.len() * SLOTS_PER_ISSUE];
    for (k, issue) in catalog.iter().enumerate() {
        let opinion = match profile.big_issue_opinions.get(issue) {
            Some(&opinion) => opinion,
            None if policy == MissingIssuePolicy::AsNoOpinion => {
                log::warn!("user {} has no answer for issue {issue}; using N/O", profile.user_id);
                IssueOpinion::NoOpinion
            }
            None => {
                return Err(BeliefsError::MissingIssue {
                    user_id: profile.user_id.clone(),
                    issue: issue.clone(),
                })
            }
        };
        let s = slot(opinion).expect("N/S rejected above");
        values[k * SLOTS_PER_ISSUE + s] = 1.0;
    }
    Ok(BigIssuesVector(values))
}

/// Cosine similarity of two encodings. For one-hot block vectors this is
/// the fraction of issues on which both users made the same choice.
pub fn opinion_similarity(a: &BigIssuesVector, b: &BigIssuesVector) -> Result<f64, BeliefsError> {
    if a.0.len() != b.0.len() {
        return Err(BeliefsError::LengthMismatch(a.0.len(), b.0.len()));
    }
    let denom = norm(&a.0) * norm(&b.0);
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok((dot(&a.0, &b.0) / denom).clamp(0.0, 1.0))
}
