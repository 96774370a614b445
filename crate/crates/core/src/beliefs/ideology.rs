use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::BeliefsError;
use crate::corpus::UserProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IdeologyKind {
    Political,
    Religious,
}

impl IdeologyKind {
    /// The declared label of this kind, trimmed; empty labels count as
    /// undeclared.
    pub fn declared<'a>(&self, profile: &'a UserProfile) -> Option<&'a str> {
        let raw = match self {
            IdeologyKind::Political => profile.political_ideology.as_deref(),
            IdeologyKind::Religious => profile.religious_ideology.as_deref(),
        };
        raw.map(str::trim).filter(|s| !s.is_empty())
    }

    /// Case-folded declared label.
    pub fn normalized(&self, profile: &UserProfile) -> Option<String> {
        self.declared(profile).map(normalize_label)
    }
}

impl fmt::Display for IdeologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IdeologyKind::Political => "political",
            IdeologyKind::Religious => "religious",
        })
    }
}

impl FromStr for IdeologyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "political" | "politics" => Ok(IdeologyKind::Political),
            "religious" | "religion" => Ok(IdeologyKind::Religious),
            other => Err(format!("unknown ideology kind {other:?}")),
        }
    }
}

/// Trim and case-fold an ideology label. No synonym mapping.
pub fn normalize_label(label: &str) -> String {
    label.trim().to_lowercase()
}

/// Whether voter and debater declare the same ideology of `kind`.
pub fn matching_ideology(
    voter: &UserProfile,
    debater: &UserProfile,
    kind: IdeologyKind,
) -> Result<bool, BeliefsError> {
    let undeclared = |p: &UserProfile| BeliefsError::UndeclaredIdeology {
        user_id: p.user_id.clone(),
        kind,
    };
    let a = kind.normalized(voter).ok_or_else(|| undeclared(voter))?;
    let b = kind.normalized(debater).ok_or_else(|| undeclared(debater))?;
    Ok(a == b)
}
