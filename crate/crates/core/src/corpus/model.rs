use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A voter's stance on the debate claim, or a per-dimension allocation.
///
/// The same three-way value is used for pre/post stances, for each vote
/// dimension allocation and for winner outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Stance {
    Pro,
    Con,
    Tie,
}

/// Allocation of a vote dimension: one debater is better, or a tie.
pub type Allocation = Stance;

impl Stance {
    /// Swap PRO and CON, leaving TIE untouched.
    pub fn flipped(self) -> Self {
        match self {
            Stance::Pro => Stance::Con,
            Stance::Con => Stance::Pro,
            Stance::Tie => Stance::Tie,
        }
    }

    pub fn side(self) -> Option<Side> {
        match self {
            Stance::Pro => Some(Side::Pro),
            Stance::Con => Some(Side::Con),
            Stance::Tie => None,
        }
    }
}

impl fmt::Display for Stance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stance::Pro => "PRO",
            Stance::Con => "CON",
            Stance::Tie => "TIE",
        })
    }
}

/// One of the two debaters' sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Side {
    Pro,
    Con,
}

impl Side {
    pub fn other(self) -> Self {
        match self {
            Side::Pro => Side::Con,
            Side::Con => Side::Pro,
        }
    }

    pub fn stance(self) -> Stance {
        match self {
            Side::Pro => Stance::Pro,
            Side::Con => Stance::Con,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.stance().fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Dimension {
    Conduct,
    SpellingGrammar,
    ConvincingArguments,
    ReliableSources,
}

impl Dimension {
    pub const ALL: [Dimension; 4] = [
        Dimension::Conduct,
        Dimension::SpellingGrammar,
        Dimension::ConvincingArguments,
        Dimension::ReliableSources,
    ];
}

/// Per-dimension allocations of a single vote. All four dimensions are
/// mandatory on the wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE", deny_unknown_fields)]
pub struct Allocations {
    pub conduct: Allocation,
    pub spelling_grammar: Allocation,
    pub convincing_arguments: Allocation,
    pub reliable_sources: Allocation,
}

impl Allocations {
    pub fn uniform(value: Allocation) -> Self {
        Self {
            conduct: value,
            spelling_grammar: value,
            convincing_arguments: value,
            reliable_sources: value,
        }
    }

    pub fn get(&self, dimension: Dimension) -> Allocation {
        match dimension {
            Dimension::Conduct => self.conduct,
            Dimension::SpellingGrammar => self.spelling_grammar,
            Dimension::ConvincingArguments => self.convincing_arguments,
            Dimension::ReliableSources => self.reliable_sources,
        }
    }

    pub fn set(&mut self, dimension: Dimension, value: Allocation) {
        match dimension {
            Dimension::Conduct => self.conduct = value,
            Dimension::SpellingGrammar => self.spelling_grammar = value,
            Dimension::ConvincingArguments => self.convincing_arguments = value,
            Dimension::ReliableSources => self.reliable_sources = value,
        }
    }

    pub fn flipped(&self) -> Self {
        Self {
            conduct: self.conduct.flipped(),
            spelling_grammar: self.spelling_grammar.flipped(),
            convincing_arguments: self.convincing_arguments.flipped(),
            reliable_sources: self.reliable_sources.flipped(),
        }
    }
}

/// Points awarded per dimension when a voter prefers one debater.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawPointWeights", into = "RawPointWeights")]
pub struct PointWeights {
    conduct: u32,
    spelling_grammar: u32,
    convincing_arguments: u32,
    reliable_sources: u32,
}

#[derive(Serialize, Deserialize)]
struct RawPointWeights {
    conduct: u32,
    spelling_grammar: u32,
    convincing_arguments: u32,
    reliable_sources: u32,
}

impl TryFrom<RawPointWeights> for PointWeights {
    type Error = String;

    fn try_from(raw: RawPointWeights) -> Result<Self, Self::Error> {
        PointWeights::new(
            raw.conduct,
            raw.spelling_grammar,
            raw.convincing_arguments,
            raw.reliable_sources,
        )
    }
}

impl From<PointWeights> for RawPointWeights {
    fn from(w: PointWeights) -> Self {
        Self {
            conduct: w.conduct,
            spelling_grammar: w.spelling_grammar,
            convincing_arguments: w.convincing_arguments,
            reliable_sources: w.reliable_sources,
        }
    }
}

impl PointWeights {
    /// Convincing arguments must carry strictly the largest weight.
    pub fn new(
        conduct: u32,
        spelling_grammar: u32,
        convincing_arguments: u32,
        reliable_sources: u32,
    ) -> Result<Self, String> {
        if convincing_arguments <= conduct.max(spelling_grammar).max(reliable_sources) {
            return Err(format!(
                "convincing-arguments weight ({convincing_arguments}) must be strictly greater than every other dimension weight"
            ));
        }
        Ok(Self {
            conduct,
            spelling_grammar,
            convincing_arguments,
            reliable_sources,
        })
    }

    pub fn weight(&self, dimension: Dimension) -> u32 {
        match dimension {
            Dimension::Conduct => self.conduct,
            Dimension::SpellingGrammar => self.spelling_grammar,
            Dimension::ConvincingArguments => self.convincing_arguments,
            Dimension::ReliableSources => self.reliable_sources,
        }
    }

    /// Multiply every weight by `factor` (used by linearity checks).
    pub fn scaled(&self, factor: u32) -> Result<Self, String> {
        Self::new(
            self.conduct * factor,
            self.spelling_grammar * factor,
            self.convincing_arguments * factor,
            self.reliable_sources * factor,
        )
    }
}

impl Default for PointWeights {
    fn default() -> Self {
        Self {
            conduct: 1,
            spelling_grammar: 1,
            convincing_arguments: 3,
            reliable_sources: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Round {
    pub index: u32,
    #[serde(default)]
    pub pro_text: String,
    #[serde(default)]
    pub con_text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Debate {
    pub debate_id: String,
    pub category: String,
    pub claim: String,
    pub pro_debater: String,
    pub con_debater: String,
    pub rounds: Vec<Round>,
}

impl Debate {
    pub fn debater(&self, side: Side) -> &str {
        match side {
            Side::Pro => &self.pro_debater,
            Side::Con => &self.con_debater,
        }
    }

    /// Check the structural invariants of a single debate record.
    pub fn check(&self) -> Result<(), String> {
        if self.pro_debater == self.con_debater {
            return Err(format!(
                "debate {}: pro and con debater are the same user ({})",
                self.debate_id, self.pro_debater
            ));
        }
        if self.rounds.is_empty() || self.rounds.len() > 5 {
            return Err(format!(
                "debate {}: {} rounds, expected 1 to 5",
                self.debate_id,
                self.rounds.len()
            ));
        }
        let mut previous = 0;
        for round in &self.rounds {
            if round.index < 1 || round.index <= previous {
                return Err(format!(
                    "debate {}: round indices must start at 1 and strictly increase",
                    self.debate_id
                ));
            }
            previous = round.index;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Vote {
    pub voter_id: String,
    pub debate_id: String,
    pub pre_stance: Stance,
    pub post_stance: Stance,
    pub allocations: Allocations,
}

/// A user's answer on one big issue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum IssueOpinion {
    #[serde(rename = "PRO")]
    Pro,
    #[serde(rename = "CON")]
    Con,
    #[serde(rename = "N_O")]
    NoOpinion,
    #[serde(rename = "N_S")]
    NotSaying,
    #[serde(rename = "UND")]
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserProfile {
    pub user_id: String,
    #[serde(default)]
    pub political_ideology: Option<String>,
    #[serde(default)]
    pub religious_ideology: Option<String>,
    #[serde(rename = "big_issues", default)]
    pub big_issue_opinions: BTreeMap<String, IssueOpinion>,
    #[serde(default)]
    pub extra: BTreeMap<String, serde_json::Value>,
}

impl UserProfile {
    pub fn new(user_id: impl Into<String>) -> Self {
        Self {
            user_id: user_id.into(),
            political_ideology: None,
            religious_ideology: None,
            big_issue_opinions: BTreeMap::new(),
            extra: BTreeMap::new(),
        }
    }
}

/// A validated, immutable debate corpus.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    pub debates: BTreeMap<String, Debate>,
    pub users: BTreeMap<String, UserProfile>,
    pub votes: Vec<Vote>,
    pub issue_catalog: Vec<String>,
}

impl Corpus {
    /// Votes cast on `debate_id`, in corpus order.
    pub fn votes_for<'a>(&'a self, debate_id: &'a str) -> impl Iterator<Item = &'a Vote> + 'a {
        self.votes.iter().filter(move |v| v.debate_id == debate_id)
    }

    /// Group votes by debate id, preserving corpus order within each debate.
    pub fn votes_by_debate(&self) -> BTreeMap<&str, Vec<&Vote>> {
        let mut grouped: BTreeMap<&str, Vec<&Vote>> = BTreeMap::new();
        for vote in &self.votes {
            grouped.entry(vote.debate_id.as_str()).or_default().push(vote);
        }
        grouped
    }

    /// Sorted union of every issue name that appears in a user profile.
    pub fn derive_issue_catalog(users: &BTreeMap<String, UserProfile>) -> Vec<String> {
        let mut names: Vec<String> = users
            .values()
            .flat_map(|u| u.big_issue_opinions.keys().cloned())
            .collect();
        names.sort();
        names.dedup();
        names
    }
}
