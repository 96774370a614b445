use serde::{Deserialize, Serialize};

use super::encode::{encode_big_issues, MissingIssuePolicy, SLOTS_PER_ISSUE};
use super::ideology::{normalize_label, IdeologyKind};
use super::BeliefsError;
use crate::corpus::Corpus;
use crate::learn::{mcnemar, nested_cv, CVReport, CvConfig, DatasetMatrix, McNemarResult};

const SLOT_NAMES: [&str; SLOTS_PER_ISSUE] = ["PRO", "CON", "N_O", "UND"];

/// Column names of a BigIssues encoding, `issue=CHOICE`.
pub fn big_issue_feature_names(catalog: &[String]) -> Vec<String> {
    catalog
        .iter()
        .flat_map(|issue| SLOT_NAMES.iter().map(move |s| format!("{issue}={s}")))
        .collect()
}

/// Users eligible for the ideology experiment, encoded.
#[derive(Debug, Clone)]
pub struct IdeologyDataset {
    pub data: DatasetMatrix,
    pub user_ids: Vec<String>,
    /// Users in the pair dropped for answering N/S.
    pub excluded_not_saying: usize,
}

/// Users whose `kind` ideology is one of `label_pair`; label 1 for the first
/// label. Users with an N/S answer are left out.
pub fn ideology_dataset(
    corpus: &Corpus,
    kind: IdeologyKind,
    label_pair: (&str, &str),
    policy: MissingIssuePolicy,
) -> Result<IdeologyDataset, BeliefsError> {
    let first = normalize_label(label_pair.0);
    let second = normalize_label(label_pair.1);
    if first == second || first.is_empty() {
        return Err(BeliefsError::InvalidPair(format!("{:?} / {:?}", label_pair.0, label_pair.1)));
    }
    if corpus.issue_catalog.is_empty() {
        return Err(BeliefsError::InsufficientData("issue catalog is empty".into()));
    }
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut ids = Vec::new();
    let mut excluded = 0;
    for profile in corpus.users.values() {
        let Some(label) = kind.normalized(profile) else { continue };
        let y = if label == first {
            1
        } else if label == second {
            0
        } else {
            continue;
        };
        match encode_big_issues(profile, &corpus.issue_catalog, policy) {
            Ok(v) => {
                rows.push(v.into_inner());
                labels.push(y);
                ids.push(profile.user_id.clone());
            }
            Err(BeliefsError::NotSayingPresent { .. }) => excluded += 1,
            Err(e) => return Err(e),
        }
    }
    let ones = labels.iter().filter(|&&y| y == 1).count();
    let zeros = labels.len() - ones;
    if ones < 2 || zeros < 2 {
        return Err(BeliefsError::InsufficientData(format!(
            "{} {kind} users labelled {:?} and {zeros} labelled {:?}; need at least 2 of each",
            ones, label_pair.0, label_pair.1
        )));
    }
    let data = DatasetMatrix::new(rows, labels, ids.clone(), big_issue_feature_names(&corpus.issue_catalog))?;
    Ok(IdeologyDataset {
        data,
        user_ids: ids,
        excluded_not_saying: excluded,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdeologyExperiment {
    pub kind: IdeologyKind,
    pub label_pair: (String, String),
    pub n_users: usize,
    /// Users with the first and second label.
    pub class_counts: (usize, usize),
    pub excluded_not_saying: usize,
    pub model_accuracy: f64,
    pub majority_accuracy: f64,
    /// Model against the majority baseline on the same outer folds.
    pub mcnemar: McNemarResult,
    pub cv: CVReport,
}

/// Predict a user's ideology from their BigIssues vector with nested CV.
pub fn ideology_classification_experiment(
    corpus: &Corpus,
    kind: IdeologyKind,
    label_pair: (&str, &str),
    cv: &CvConfig,
    policy: MissingIssuePolicy,
) -> Result<IdeologyExperiment, BeliefsError> {
    let ds = ideology_dataset(corpus, kind, label_pair, policy)?;
    let (neg, pos) = ds.data.class_counts();
    let report = nested_cv(&ds.data, cv)?;
    let test = mcnemar(&report.predictions, &report.baseline_predictions, &report.labels)?;
    Ok(IdeologyExperiment {
        kind,
        label_pair: (label_pair.0.to_string(), label_pair.1.to_string()),
        n_users: ds.data.n_rows(),
        class_counts: (pos, neg),
        excluded_not_saying: ds.excluded_not_saying,
        model_accuracy: report.mean_accuracy,
        majority_accuracy: report.baseline_accuracy,
        mcnemar: test,
        cv: report,
    })
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::corpus::{IssueOpinion, UserProfile};

    fn corpus(n: usize) -> Corpus {
        let catalog: Vec<String> = (0..4).map(|k| format!("issue{k}")).collect();
        let mut users = BTreeMap::new();
        for i in 0..n {
            let mut p = UserProfile::new(format!("u{i:03}"));
            let liberal = i % 2 == 0;
            p.political_ideology = Some(if liberal { "Liberal" } else { " conservative " }.into());
            for (k, issue) in catalog.iter().enumerate() {
                let o = match (liberal, k % 2) {
                    (true, 0) | (false, 1) => IssueOpinion::Pro,
                    _ => IssueOpinion::Con,
                };
                p.big_issue_opinions.insert(issue.clone(), o);
            }
            users.insert(p.user_id.clone(), p);
        }
        let mut odd = UserProfile::new("ns");
        odd.political_ideology = Some("Liberal".into());
        odd.big_issue_opinions.insert("issue0".into(), IssueOpinion::NotSaying);
        users.insert("ns".into(), odd);
        Corpus {
            debates: BTreeMap::new(),
            users,
            votes: Vec::new(),
            issue_catalog: catalog,
        }
    }

    #[test]
    fn deterministic_opinions_are_fully_predictable() {
        let c = corpus(40);
        let cv = CvConfig::default();
        let r = ideology_classification_experiment(
            &c,
            IdeologyKind::Political,
            ("Conservative", "Liberal"),
            &cv,
            MissingIssuePolicy::AsNoOpinion,
        )
        .unwrap();
        assert_eq!(r.model_accuracy, 1.0);
        assert_eq!(r.excluded_not_saying, 1);
        assert_eq!(r.class_counts, (20, 20));
        assert_eq!(r.n_users, 40);
    }

    #[test]
    fn too_few_users_per_class() {
        let c = corpus(3);
        assert!(matches!(
            ideology_dataset(&c, IdeologyKind::Political, ("Conservative", "Liberal"), MissingIssuePolicy::AsNoOpinion),
            Err(BeliefsError::InsufficientData(_))
        ));
        assert!(matches!(
            ideology_dataset(&c, IdeologyKind::Political, ("Liberal", "liberal"), MissingIssuePolicy::AsNoOpinion),
            Err(BeliefsError::InvalidPair(_))
        ));
    }

    #[test]
    fn feature_names_follow_slots() {
        assert_eq!(big_issue_feature_names(&["a".to_string()]), ["a=PRO", "a=CON", "a=N_O", "a=UND"]);
    }
}
