//! Synthetic debate corpora with planted effects.
//!
//! Every voter declares one ideology of each controlled pair and each debate
//! puts the two members of each pair on opposite sides. With probability
//! `p_match` the voter is convinced by the debater sharing their religious
//! ideology (stance change toward that side) and awards the convincing
//! arguments points to the debater sharing their political ideology.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Allocations, Corpus, Debate, IssueOpinion, Round, Side, Stance, UserProfile, Vote};

/// Per-sentence injection probabilities for one side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarkerRates {
    pub politeness: f64,
    pub evidence: f64,
    pub swear: f64,
    pub opponent: f64,
    pub question: f64,
    pub exclamation: f64,
}

impl Default for MarkerRates {
    fn default() -> Self {
        Self {
            politeness: 0.15,
            evidence: 0.15,
            swear: 0.05,
            opponent: 0.2,
            question: 0.1,
            exclamation: 0.1,
        }
    }
}

impl MarkerRates {
    fn all(&self) -> [(&'static str, f64); 6] {
        [
            ("politeness", self.politeness),
            ("evidence", self.evidence),
            ("swear", self.swear),
            ("opponent", self.opponent),
            ("question", self.question),
            ("exclamation", self.exclamation),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticParams {
    pub n_debates: usize,
    pub voters_per_debate: usize,
    /// Probability that the same-ideology debater wins the voter.
    pub p_match: f64,
    pub religious_pair: (String, String),
    pub political_pair: (String, String),
    /// Issue catalog size K.
    pub n_issues: usize,
    /// Probability that an issue answer follows the user's ideology. Even
    /// issues follow the political, odd issues the religious ideology.
    pub p_issue_align: f64,
    /// Probability that a voter's stance changes.
    pub p_stance_change: f64,
    /// Probability of an N/S answer on each issue.
    pub p_not_saying: f64,
    pub rounds: usize,
    pub sentences_per_round: usize,
    pub pro_markers: MarkerRates,
    pub con_markers: MarkerRates,
    pub categories: Vec<String>,
    pub seed: u64,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        Self {
            n_debates: 400,
            voters_per_debate: 5,
            p_match: 0.8,
            religious_pair: ("Atheist".into(), "Christian".into()),
            political_pair: ("Conservative".into(), "Liberal".into()),
            n_issues: 10,
            p_issue_align: 0.8,
            p_stance_change: 1.0,
            p_not_saying: 0.0,
            rounds: 3,
            sentences_per_round: 3,
            pro_markers: MarkerRates::default(),
            con_markers: MarkerRates::default(),
            categories: vec!["Religion".into(), "Politics".into(), "Society".into()],
            seed: 0,
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("invalid synthetic parameters: {0}")]
pub struct SynthError(pub String);

impl SyntheticParams {
    pub fn validate(&self) -> Result<(), SynthError> {
        let mut probs: Vec<(String, f64)> = vec![
            ("p_match".into(), self.p_match),
            ("p_issue_align".into(), self.p_issue_align),
            ("p_stance_change".into(), self.p_stance_change),
            ("p_not_saying".into(), self.p_not_saying),
        ];
        for (side, m) in [("pro", &self.pro_markers), ("con", &self.con_markers)] {
            probs.extend(m.all().map(|(name, p)| (format!("{side}_markers.{name}"), p)));
        }
        if let Some((name, p)) = probs.iter().find(|(_, p)| !(0.0..=1.0).contains(p)) {
            return Err(SynthError(format!("{name} = {p} is not a probability")));
        }
        for (name, n) in [
            ("n_debates", self.n_debates),
            ("voters_per_debate", self.voters_per_debate),
            ("n_issues", self.n_issues),
            ("sentences_per_round", self.sentences_per_round),
        ] {
            if n == 0 {
                return Err(SynthError(format!("{name} must be at least 1")));
            }
        }
        if !(1..=5).contains(&self.rounds) {
            return Err(SynthError("rounds must be between 1 and 5".into()));
        }
        for (name, pair) in [("religious_pair", &self.religious_pair), ("political_pair", &self.political_pair)] {
            if pair.0.trim().is_empty() || pair.0.trim().to_lowercase() == pair.1.trim().to_lowercase() {
                return Err(SynthError(format!("{name} must hold two distinct labels")));
            }
        }
        if self.categories.is_empty() || self.categories.iter().any(|c| c.trim().is_empty()) {
            return Err(SynthError("categories must be non-empty names".into()));
        }
        Ok(())
    }
}

const FILLER: &[&str] = &[
    "the", "people", "government", "should", "policy", "society", "freedom", "rights", "law", "money", "children",
    "family", "world", "country", "economy", "system", "change", "time", "life", "moral", "public", "social",
    "health", "education", "school", "church", "faith", "science", "history", "culture", "future", "power",
    "choice", "state", "value", "good", "important", "common", "real", "human", "new", "many", "most", "more",
    "less", "this", "that", "we", "they", "is", "are", "not", "because", "and", "all", "every", "religion",
    "belief", "vote", "case", "point", "issue", "question", "reason", "fact", "idea", "work", "community",
];

const POLITENESS: &[&str] = &["thank you", "thanks", "please", "good luck", "i appreciate that"];
const EVIDENCE: &[&str] = &["according to a study", "research shows", "the statistics say", "my source says"];
const SWEAR: &[&str] = &["damn", "hell", "crap"];
const OPPONENT: &[&str] = &["my opponent", "my opponent's case", "the instigator"];

fn pick(rng: &mut ChaCha8Rng, items: &[&'static str]) -> &'static str {
    items.choose(rng).expect("non-empty list")
}

fn sentence(rng: &mut ChaCha8Rng, rates: &MarkerRates) -> String {
    let len = rng.gen_range(5..=10);
    let mut words: Vec<&'static str> = (0..len).map(|_| pick(rng, FILLER)).collect();
    let mut insert = |rng: &mut ChaCha8Rng, list: &[&'static str], p: f64| {
        if rng.gen_bool(p) {
            let at = rng.gen_range(0..=words.len());
            words.insert(at, pick(rng, list));
        }
    };
    insert(rng, POLITENESS, rates.politeness);
    insert(rng, EVIDENCE, rates.evidence);
    insert(rng, SWEAR, rates.swear);
    insert(rng, OPPONENT, rates.opponent);
    let mut s = words.join(" ");
    if let Some(first) = s.get_mut(0..1) {
        first.make_ascii_uppercase();
    }
    let end = if rng.gen_bool(rates.question) {
        '?'
    } else if rng.gen_bool(rates.exclamation) {
        '!'
    } else {
        '.'
    };
    s.push(end);
    s
}

fn turn(rng: &mut ChaCha8Rng, params: &SyntheticParams, rates: &MarkerRates) -> String {
    (0..params.sentences_per_round)
        .map(|_| sentence(rng, rates))
        .collect::<Vec<_>>()
        .join(" ")
}

fn catalog(params: &SyntheticParams) -> Vec<String> {
    (1..=params.n_issues).map(|k| format!("Issue{k:02}")).collect()
}

/// One user. `political` and `religious` index into the configured pairs.
fn user(rng: &mut ChaCha8Rng, params: &SyntheticParams, id: String, political: usize, religious: usize) -> UserProfile {
    let mut p = UserProfile::new(id);
    let pol = [&params.political_pair.0, &params.political_pair.1][political];
    let rel = [&params.religious_pair.0, &params.religious_pair.1][religious];
    p.political_ideology = Some(pol.clone());
    p.religious_ideology = Some(rel.clone());
    const ANY: [IssueOpinion; 4] = [
        IssueOpinion::Pro,
        IssueOpinion::Con,
        IssueOpinion::NoOpinion,
        IssueOpinion::Undecided,
    ];
    for (k, issue) in catalog(params).into_iter().enumerate() {
        let group = if k % 2 == 0 { political } else { religious };
        let opinion = if rng.gen_bool(params.p_not_saying) {
            IssueOpinion::NotSaying
        } else if rng.gen_bool(params.p_issue_align) {
            if group == 0 {
                IssueOpinion::Pro
            } else {
                IssueOpinion::Con
            }
        } else {
            *ANY.choose(rng).expect("non-empty")
        };
        p.big_issue_opinions.insert(issue, opinion);
    }
    p
}

fn random_allocation(rng: &mut ChaCha8Rng) -> Stance {
    *[Stance::Pro, Stance::Con, Stance::Tie].choose(rng).expect("non-empty")
}

/// Generate a corpus. Deterministic given `params.seed`.
pub fn generate_synthetic(params: &SyntheticParams) -> Result<Corpus, SynthError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut users = BTreeMap::new();
    let mut debates = BTreeMap::new();
    let mut votes = Vec::new();
    let width = params.n_debates.to_string().len().max(4);
    let voter_width = (params.n_debates * params.voters_per_debate).to_string().len().max(5);
    let mut next_voter = 0usize;

    for d in 0..params.n_debates {
        let debate_id = format!("d{d:0width$}");
        // index 0/1 into each pair for the PRO debater; CON holds the other
        let pro_rel = rng.gen_range(0..2);
        let pro_pol = rng.gen_range(0..2);
        let pro_id = format!("{debate_id}-pro");
        let con_id = format!("{debate_id}-con");
        let pro = user(&mut rng, params, pro_id.clone(), pro_pol, pro_rel);
        let con = user(&mut rng, params, con_id.clone(), 1 - pro_pol, 1 - pro_rel);
        users.insert(pro_id.clone(), pro);
        users.insert(con_id.clone(), con);

        let rounds = (1..=params.rounds)
            .map(|i| Round {
                index: i as u32,
                pro_text: turn(&mut rng, params, &params.pro_markers),
                con_text: turn(&mut rng, params, &params.con_markers),
            })
            .collect();
        let category = params.categories.choose(&mut rng).expect("validated").clone();
        debates.insert(
            debate_id.clone(),
            Debate {
                debate_id: debate_id.clone(),
                category,
                claim: format!("Synthetic claim {d}"),
                pro_debater: pro_id,
                con_debater: con_id,
                rounds,
            },
        );

        for _ in 0..params.voters_per_debate {
            let voter_id = format!("v{next_voter:0voter_width$}");
            next_voter += 1;
            let rel = rng.gen_range(0..2);
            let pol = rng.gen_range(0..2);
            users.insert(voter_id.clone(), user(&mut rng, params, voter_id.clone(), pol, rel));

            let rel_match = if rel == pro_rel { Side::Pro } else { Side::Con };
            let pol_match = if pol == pro_pol { Side::Pro } else { Side::Con };
            let convinced_by = if rng.gen_bool(params.p_match) { rel_match } else { rel_match.other() };
            let points_to = if rng.gen_bool(params.p_match) { pol_match } else { pol_match.other() };

            let post_stance = convinced_by.stance();
            let pre_stance = if rng.gen_bool(params.p_stance_change) {
                if rng.gen_bool(0.5) {
                    Stance::Tie
                } else {
                    convinced_by.other().stance()
                }
            } else {
                post_stance
            };
            // convincing arguments (3) and possibly sources (2) outweigh the
            // at most 2 points the other side can get
            let allocations = Allocations {
                conduct: random_allocation(&mut rng),
                spelling_grammar: random_allocation(&mut rng),
                convincing_arguments: points_to.stance(),
                reliable_sources: if rng.gen_bool(0.5) { points_to.stance() } else { Stance::Tie },
            };
            votes.push(Vote {
                voter_id,
                debate_id: debate_id.clone(),
                pre_stance,
                post_stance,
                allocations,
            });
        }
    }
    Ok(Corpus {
        debates,
        users,
        votes,
        issue_catalog: catalog(params),
    })
}
