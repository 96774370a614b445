use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{TaskError, TaskKind, TaskSpec};
use crate::beliefs::{encode_big_issues, normalize_label, opinion_similarity, IdeologyKind, MissingIssuePolicy};
use crate::corpus::{points_winner, stance_changed, Corpus, Debate, PointWeights, Side, Stance, UserProfile, Vote};
use crate::textfeat::SideText;

/// User-based feature columns, in order.
pub const USER_FEATURE_NAMES: [&str; 6] = [
    "sim_pro",
    "sim_con",
    "matching_political_pro",
    "matching_political_con",
    "matching_religious_pro",
    "matching_religious_con",
];

/// One voter on one debate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskInstance {
    pub voter_id: String,
    pub debate_id: String,
    /// Values for [`USER_FEATURE_NAMES`].
    pub user_features: [f64; 6],
    /// 1 = PRO, 0 = CON.
    pub label: u8,
}

/// Both sides of a debate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DebateTexts {
    pub pro: SideText,
    pub con: SideText,
}

/// Counts of what the filters removed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterCounts {
    pub debates_considered: usize,
    pub debates_wrong_category: usize,
    pub debates_uncontrolled: usize,
    pub votes_considered: usize,
    pub votes_voter_outside_pair: usize,
    pub votes_stance_unchanged: usize,
    pub votes_tie: usize,
    /// Similarity features set to 0 because a profile could not be encoded.
    pub similarity_imputed: usize,
    /// Matching features set to 0 because an ideology was undeclared.
    pub matching_imputed: usize,
}

/// Instances of one task, sorted by (debate_id, voter_id), plus the text of
/// every debate they refer to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskInstances {
    pub spec: TaskSpec,
    pub instances: Vec<TaskInstance>,
    pub debates: BTreeMap<String, DebateTexts>,
    pub filter_counts: FilterCounts,
}

impl TaskInstances {
    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn labels(&self) -> Vec<u8> {
        self.instances.iter().map(|i| i.label).collect()
    }

    /// (CON, PRO) label counts.
    pub fn class_counts(&self) -> (usize, usize) {
        let pro = self.instances.iter().filter(|i| i.label == 1).count();
        (self.instances.len() - pro, pro)
    }
}

fn ideology_kind(task: TaskKind) -> IdeologyKind {
    match task {
        TaskKind::Task1Religious => IdeologyKind::Religious,
        TaskKind::Task2Political => IdeologyKind::Political,
    }
}

fn pair_index(profile: &UserProfile, kind: IdeologyKind, pair: &(String, String)) -> Option<usize> {
    let label = kind.normalized(profile)?;
    if label == normalize_label(&pair.0) {
        Some(0)
    } else if label == normalize_label(&pair.1) {
        Some(1)
    } else {
        None
    }
}

/// Whether the two debaters hold the two distinct ideologies of the pair.
fn controlled(corpus: &Corpus, debate: &Debate, kind: IdeologyKind, pair: &(String, String)) -> bool {
    let idx = |id: &str| corpus.users.get(id).and_then(|p| pair_index(p, kind, pair));
    matches!(
        (idx(&debate.pro_debater), idx(&debate.con_debater)),
        (Some(a), Some(b)) if a != b
    )
}

fn user_features(
    corpus: &Corpus,
    voter: &UserProfile,
    debate: &Debate,
    policy: MissingIssuePolicy,
    counts: &mut FilterCounts,
) -> [f64; 6] {
    let mut f = [0.0; 6];
    let encode = |p: &UserProfile| {
        if corpus.issue_catalog.is_empty() {
            None
        } else {
            encode_big_issues(p, &corpus.issue_catalog, policy).ok()
        }
    };
    let voter_vec = encode(voter);
    for (k, side) in [Side::Pro, Side::Con].into_iter().enumerate() {
        let debater = corpus.users.get(debate.debater(side));
        let sim = match (&voter_vec, debater.and_then(encode)) {
            (Some(a), Some(b)) => opinion_similarity(a, &b).ok(),
            _ => None,
        };
        match sim {
            Some(s) => f[k] = s,
            None => counts.similarity_imputed += 1,
        }
        for (base, kind) in [(2, IdeologyKind::Political), (4, IdeologyKind::Religious)] {
            let m = debater.and_then(|d| Some(kind.normalized(voter)? == kind.normalized(d)?));
            match m {
                Some(true) => f[base + k] = 1.0,
                Some(false) => {}
                None => counts.matching_imputed += 1,
            }
        }
    }
    f
}

fn build(
    corpus: &Corpus,
    spec: &TaskSpec,
    policy: MissingIssuePolicy,
    label_of: impl Fn(&Vote, &mut FilterCounts) -> Option<u8>,
) -> Result<TaskInstances, TaskError> {
    spec.validate()?;
    let kind = ideology_kind(spec.task);
    let mut counts = FilterCounts::default();
    let mut instances = Vec::new();
    let mut texts = BTreeMap::new();
    let by_debate = corpus.votes_by_debate();
    for (debate_id, debate) in &corpus.debates {
        counts.debates_considered += 1;
        if !spec.category_filter.accepts(&debate.category) {
            counts.debates_wrong_category += 1;
            continue;
        }
        if !controlled(corpus, debate, kind, &spec.ideology_pair) {
            counts.debates_uncontrolled += 1;
            continue;
        }
        let mut any = false;
        for vote in by_debate.get(debate_id.as_str()).into_iter().flatten() {
            counts.votes_considered += 1;
            let Some(voter) = corpus.users.get(&vote.voter_id) else {
                counts.votes_voter_outside_pair += 1;
                continue;
            };
            if pair_index(voter, kind, &spec.ideology_pair).is_none() {
                counts.votes_voter_outside_pair += 1;
                continue;
            }
            let Some(label) = label_of(vote, &mut counts) else { continue };
            let user_features = user_features(corpus, voter, debate, policy, &mut counts);
            instances.push(TaskInstance {
                voter_id: vote.voter_id.clone(),
                debate_id: debate_id.clone(),
                user_features,
                label,
            });
            any = true;
        }
        if any {
            texts.insert(
                debate_id.clone(),
                DebateTexts {
                    pro: SideText::from_debate(debate, Side::Pro),
                    con: SideText::from_debate(debate, Side::Con),
                },
            );
        }
    }
    instances.sort_by(|a, b| (&a.debate_id, &a.voter_id).cmp(&(&b.debate_id, &b.voter_id)));
    Ok(TaskInstances {
        spec: spec.clone(),
        instances,
        debates: texts,
        filter_counts: counts,
    })
}

/// Religious-ideology control: voters who changed their stance, labelled
/// with the side they moved to.
pub fn build_task1_instances(
    corpus: &Corpus,
    spec: &TaskSpec,
    policy: MissingIssuePolicy,
) -> Result<TaskInstances, TaskError> {
    if spec.task != TaskKind::Task1Religious {
        return Err(TaskError::Spec("build_task1_instances needs a task1_religious spec".into()));
    }
    build(corpus, spec, policy, |vote, counts| {
        if !stance_changed(vote) {
            counts.votes_stance_unchanged += 1;
            return None;
        }
        match vote.post_stance {
            Stance::Pro => Some(1),
            Stance::Con => Some(0),
            Stance::Tie => {
                counts.votes_tie += 1;
                None
            }
        }
    })
}

/// Political-ideology control: every voter, labelled with the side that
/// received more weighted points.
pub fn build_task2_instances(
    corpus: &Corpus,
    spec: &TaskSpec,
    weights: &PointWeights,
    policy: MissingIssuePolicy,
) -> Result<TaskInstances, TaskError> {
    if spec.task != TaskKind::Task2Political {
        return Err(TaskError::Spec("build_task2_instances needs a task2_political spec".into()));
    }
    build(corpus, spec, policy, |vote, counts| match points_winner(vote, weights) {
        Stance::Pro => Some(1),
        Stance::Con => Some(0),
        Stance::Tie => {
            counts.votes_tie += 1;
            None
        }
    })
}

/// Build the instances for `spec.task`.
pub fn build_instances(
    corpus: &Corpus,
    spec: &TaskSpec,
    weights: &PointWeights,
    policy: MissingIssuePolicy,
) -> Result<TaskInstances, TaskError> {
    match spec.task {
        TaskKind::Task1Religious => build_task1_instances(corpus, spec, policy),
        TaskKind::Task2Political => build_task2_instances(corpus, spec, weights, policy),
    }
}

/// Best accuracy of any predictor that is constant within each debate:
/// the per-debate majority label count summed over debates, divided by N.
pub fn language_only_ceiling(instances: &[TaskInstance]) -> f64 {
    if instances.is_empty() {
        return 0.0;
    }
    let mut per_debate: BTreeMap<&str, [usize; 2]> = BTreeMap::new();
    for inst in instances {
        per_debate.entry(&inst.debate_id).or_default()[usize::from(inst.label)] += 1;
    }
    let best: usize = per_debate.values().map(|c| c[0].max(c[1])).sum();
    best as f64 / instances.len() as f64
}
