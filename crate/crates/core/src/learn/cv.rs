//! Nested cross-validation with a (penalty x C) grid.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::DatasetMatrix;
use super::logreg::{train_logreg, train_path, Penalty, SolverOptions};
use super::LearnError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Folding {
    /// Class-stratified random folds.
    #[default]
    Stratified,
    /// All rows of one debate land in the same fold.
    GroupedByDebate,
}

impl std::str::FromStr for Folding {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "stratified" => Ok(Folding::Stratified),
            "grouped" | "grouped_by_debate" => Ok(Folding::GroupedByDebate),
            other => Err(format!("unknown folding {other:?}")),
        }
    }
}

/// Regularizer grid searched in the inner loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegConfig {
    pub penalties: Vec<Penalty>,
    pub c_grid: Vec<f64>,
    pub solver: SolverOptions,
}

impl Default for RegConfig {
    fn default() -> Self {
        Self {
            penalties: vec![Penalty::L1, Penalty::L2],
            c_grid: (-5..=5).map(|k| 10f64.powi(k)).collect(),
            solver: SolverOptions::default(),
        }
    }
}

impl RegConfig {
    pub fn validate(&self) -> Result<(), LearnError> {
        if self.penalties.is_empty() {
            return Err(LearnError::InvalidConfig("penalty list is empty".into()));
        }
        if self.c_grid.is_empty() || self.c_grid.iter().any(|c| !(*c > 0.0 && c.is_finite())) {
            return Err(LearnError::InvalidConfig(
                "C grid must be non-empty with positive finite values".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CvConfig {
    pub outer_folds: usize,
    pub inner_folds: usize,
    pub folding: Folding,
    pub seed: u64,
    pub grid: RegConfig,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            outer_folds: 5,
            inner_folds: 3,
            folding: Folding::Stratified,
            seed: 0,
            grid: RegConfig::default(),
        }
    }
}

/// Source of per-fold feature matrices.
///
/// Any data-dependent transform (vocabulary, idf weights, ...) must be fit
/// on the `train` rows only and then applied to both partitions.
pub trait FoldData: Sync {
    fn len(&self) -> usize;
    fn labels(&self) -> &[u8];
    fn group_ids(&self) -> &[String];
    fn materialize(&self, train: &[usize], eval: &[usize]) -> Result<(DatasetMatrix, DatasetMatrix), LearnError>;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl FoldData for DatasetMatrix {
    fn len(&self) -> usize {
        self.n_rows()
    }

    fn labels(&self) -> &[u8] {
        DatasetMatrix::labels(self)
    }

    fn group_ids(&self) -> &[String] {
        DatasetMatrix::group_ids(self)
    }

    fn materialize(&self, train: &[usize], eval: &[usize]) -> Result<(DatasetMatrix, DatasetMatrix), LearnError> {
        Ok((self.select_rows(train), self.select_rows(eval)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedParams {
    pub penalty: Penalty,
    pub c: f64,
    pub inner_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CVReport {
    pub folding: Folding,
    pub seed: u64,
    pub outer_folds: usize,
    pub inner_folds: usize,
    pub fold_accuracies: Vec<f64>,
    /// Mean of the per-fold accuracies.
    pub mean_accuracy: f64,
    /// Fraction of all rows predicted correctly across the outer folds.
    pub pooled_accuracy: f64,
    pub selected: Vec<SelectedParams>,
    pub baseline_fold_accuracies: Vec<f64>,
    pub baseline_accuracy: f64,
    pub baseline_pooled_accuracy: f64,
    /// Per-row outer-fold predictions, aligned with the input rows.
    pub predictions: Vec<u8>,
    pub probabilities: Vec<f64>,
    pub baseline_predictions: Vec<u8>,
    pub labels: Vec<u8>,
    pub fold_of: Vec<usize>,
    pub notes: Vec<String>,
}

/// Most frequent label; ties go to label 1.
pub fn majority_label(train_labels: &[u8]) -> u8 {
    let ones = train_labels.iter().filter(|&&y| y == 1).count();
    u8::from(2 * ones >= train_labels.len())
}

/// Accuracy on `test_labels` of always predicting the training majority.
pub fn majority_baseline(train_labels: &[u8], test_labels: &[u8]) -> f64 {
    let label = majority_label(train_labels);
    accuracy(&vec![label; test_labels.len()], test_labels)
}

pub fn accuracy(predictions: &[u8], labels: &[u8]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let correct = predictions.iter().zip(labels).filter(|(p, y)| p == y).count();
    correct as f64 / labels.len() as f64
}

fn mix_seed(seed: u64, salt: u64) -> u64 {
    // splitmix64 step
    let mut z = seed ^ salt.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Partition `0..labels.len()` into `k` folds. Each fold is returned sorted.
pub fn make_folds(
    labels: &[u8],
    group_ids: &[String],
    k: usize,
    folding: Folding,
    seed: u64,
) -> Result<Vec<Vec<usize>>, LearnError> {
    let n = labels.len();
    if k < 2 || n < k {
        return Err(LearnError::InfeasibleFolds(format!("{n} rows cannot form {k} folds")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    match folding {
        Folding::Stratified => {
            let mut slot = 0;
            for class in [0u8, 1u8] {
                let mut idx: Vec<usize> = (0..n).filter(|&i| labels[i] == class).collect();
                idx.shuffle(&mut rng);
                for i in idx {
                    folds[slot % k].push(i);
                    slot += 1;
                }
            }
        }
        Folding::GroupedByDebate => {
            let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
            for (i, g) in group_ids.iter().enumerate() {
                groups.entry(g.as_str()).or_default().push(i);
            }
            if groups.len() < k {
                return Err(LearnError::InfeasibleFolds(format!(
                    "{} groups cannot form {k} folds",
                    groups.len()
                )));
            }
            let mut members: Vec<Vec<usize>> = groups.into_values().collect();
            members.shuffle(&mut rng);
            members.sort_by_key(|m| std::cmp::Reverse(m.len()));
            for m in members {
                let target = (0..k).min_by_key(|&f| (folds[f].len(), f)).unwrap();
                folds[target].extend(m);
            }
        }
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    Ok(folds)
}

fn complement(n: usize, fold: &[usize]) -> Vec<usize> {
    let mut in_fold = vec![false; n];
    fold.iter().for_each(|&i| in_fold[i] = true);
    (0..n).filter(|&i| !in_fold[i]).collect()
}

/// Accuracy of every (penalty, C) on one train/validation split. A
/// single-class training split predicts its only class.
fn grid_scores(
    train: &DatasetMatrix,
    valid: &DatasetMatrix,
    grid: &RegConfig,
) -> Result<Vec<Vec<f64>>, LearnError> {
    let (neg, pos) = train.class_counts();
    if neg == 0 || pos == 0 {
        let acc = majority_baseline(train.labels(), valid.labels());
        return Ok(vec![vec![acc; grid.c_grid.len()]; grid.penalties.len()]);
    }
    grid.penalties
        .par_iter()
        .map(|&penalty| {
            let models = train_path(train, penalty, &grid.c_grid, &grid.solver)?;
            models
                .iter()
                .map(|m| Ok(accuracy(&m.predict(valid)?.labels, valid.labels())))
                .collect()
        })
        .collect()
}

fn select(grid: &RegConfig, scores: &[Vec<f64>]) -> SelectedParams {
    let mut best: Option<SelectedParams> = None;
    for (pi, &penalty) in grid.penalties.iter().enumerate() {
        for (ci, &c) in grid.c_grid.iter().enumerate() {
            let score = scores[pi][ci];
            let better = match &best {
                None => true,
                Some(b) => {
                    score > b.inner_accuracy
                        || (score == b.inner_accuracy
                            && (c > b.c || (c == b.c && penalty == Penalty::L2 && b.penalty == Penalty::L1)))
                }
            };
            if better {
                best = Some(SelectedParams {
                    penalty,
                    c,
                    inner_accuracy: score,
                });
            }
        }
    }
    best.expect("grid validated non-empty")
}

struct OuterResult {
    test: Vec<usize>,
    selected: SelectedParams,
    predictions: Vec<u8>,
    probabilities: Vec<f64>,
    baseline: u8,
    note: Option<String>,
}

/// Nested cross-validation: for each outer fold, pick (penalty, C) by
/// inner-CV mean accuracy (ties: larger C, then L2), refit on the whole
/// outer-training partition and evaluate on the held-out fold.
pub fn nested_cv<D: FoldData + ?Sized>(data: &D, config: &CvConfig) -> Result<CVReport, LearnError> {
    config.grid.validate()?;
    if config.inner_folds < 2 {
        return Err(LearnError::InvalidConfig("inner_folds must be at least 2".into()));
    }
    let labels = data.labels();
    let n = labels.len();
    let ones = labels.iter().filter(|&&y| y == 1).count();
    if ones == 0 || ones == n {
        return Err(LearnError::SingleClass);
    }
    let outer = make_folds(labels, data.group_ids(), config.outer_folds, config.folding, config.seed)?;

    let results: Vec<OuterResult> = outer
        .par_iter()
        .enumerate()
        .map(|(f, test)| -> Result<OuterResult, LearnError> {
            let train = complement(n, test);
            let train_labels: Vec<u8> = train.iter().map(|&i| labels[i]).collect();
            let train_groups: Vec<String> = train.iter().map(|&i| data.group_ids()[i].clone()).collect();
            let baseline = majority_label(&train_labels);
            let mut note = None;

            let inner = make_folds(
                &train_labels,
                &train_groups,
                config.inner_folds,
                config.folding,
                mix_seed(config.seed, f as u64),
            )?;
            let fold_scores = inner
                .par_iter()
                .map(|valid_local| {
                    let train_local = complement(train.len(), valid_local);
                    let tr: Vec<usize> = train_local.iter().map(|&i| train[i]).collect();
                    let va: Vec<usize> = valid_local.iter().map(|&i| train[i]).collect();
                    let (tr_m, va_m) = data.materialize(&tr, &va)?;
                    grid_scores(&tr_m, &va_m, &config.grid)
                })
                .collect::<Result<Vec<_>, LearnError>>()?;
            let k = fold_scores.len() as f64;
            let mean_scores: Vec<Vec<f64>> = (0..config.grid.penalties.len())
                .map(|p| {
                    (0..config.grid.c_grid.len())
                        .map(|c| fold_scores.iter().map(|s| s[p][c]).sum::<f64>() / k)
                        .collect()
                })
                .collect();
            let selected = select(&config.grid, &mean_scores);

            let (train_m, test_m) = data.materialize(&train, test)?;
            let (predictions, probabilities) = match train_logreg(&train_m, selected.penalty, selected.c, &config.grid.solver) {
                Ok(model) => {
                    let p = model.predict(&test_m)?;
                    (p.labels, p.probabilities)
                }
                Err(LearnError::SingleClass) => {
                    note = Some(format!("outer fold {f}: single-class training partition, predicting the majority label"));
                    (vec![baseline; test.len()], vec![f64::from(baseline); test.len()])
                }
                Err(e) => return Err(e),
            };
            Ok(OuterResult {
                test: test.clone(),
                selected,
                predictions,
                probabilities,
                baseline,
                note,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut predictions = vec![0u8; n];
    let mut probabilities = vec![0.0; n];
    let mut baseline_predictions = vec![0u8; n];
    let mut fold_of = vec![0usize; n];
    let mut fold_accuracies = Vec::new();
    let mut baseline_fold_accuracies = Vec::new();
    let mut selected = Vec::new();
    let mut notes = Vec::new();
    for (f, r) in results.into_iter().enumerate() {
        let test_labels: Vec<u8> = r.test.iter().map(|&i| labels[i]).collect();
        fold_accuracies.push(accuracy(&r.predictions, &test_labels));
        baseline_fold_accuracies.push(accuracy(&vec![r.baseline; test_labels.len()], &test_labels));
        for (k, &i) in r.test.iter().enumerate() {
            predictions[i] = r.predictions[k];
            probabilities[i] = r.probabilities[k];
            baseline_predictions[i] = r.baseline;
            fold_of[i] = f;
        }
        selected.push(r.selected);
        notes.extend(r.note);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    Ok(CVReport {
        folding: config.folding,
        seed: config.seed,
        outer_folds: config.outer_folds,
        inner_folds: config.inner_folds,
        mean_accuracy: mean(&fold_accuracies),
        pooled_accuracy: accuracy(&predictions, labels),
        baseline_accuracy: mean(&baseline_fold_accuracies),
        baseline_pooled_accuracy: accuracy(&baseline_predictions, labels),
        fold_accuracies,
        selected,
        baseline_fold_accuracies,
        predictions,
        probabilities,
        baseline_predictions,
        labels: labels.to_vec(),
        fold_of,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn majority_examples() {
        assert_eq!(majority_baseline(&[1, 1, 1, 0, 0], &[1, 1, 1]), 1.0);
        assert_eq!(majority_label(&[1, 0]), 1);
        assert_eq!(majority_label(&[0, 0, 1]), 0);
        assert!((majority_baseline(&[0, 0, 1], &[0, 1, 1, 0, 0]) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn stratified_folds_partition_and_balance() {
        let labels: Vec<u8> = (0..23).map(|i| u8::from(i % 3 == 0)).collect();
        let groups: Vec<String> = (0..23).map(|i| i.to_string()).collect();
        let folds = make_folds(&labels, &groups, 5, Folding::Stratified, 7).unwrap();
        let mut all: Vec<usize> = folds.iter().flatten().copied().collect();
        all.sort();
        assert_eq!(all, (0..23).collect::<Vec<_>>());
        let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        for fold in &folds {
            let ones = fold.iter().filter(|&&i| labels[i] == 1).count();
            assert!((1..=2).contains(&ones));
        }
    }

    #[test]
    fn grouped_folds_keep_groups_together() {
        let labels: Vec<u8> = (0..30).map(|i| (i % 2) as u8).collect();
        let groups: Vec<String> = (0..30).map(|i| format!("d{}", i / 3)).collect();
        let folds = make_folds(&labels, &groups, 5, Folding::GroupedByDebate, 1).unwrap();
        for fold in &folds {
            for &i in fold {
                for other in &folds {
                    if !std::ptr::eq(fold, other) {
                        assert!(other.iter().all(|&j| groups[j] != groups[i]));
                    }
                }
            }
        }
        assert!(make_folds(&labels, &groups[..], 11, Folding::GroupedByDebate, 1).is_err());
    }

    #[test]
    fn infeasible_fold_count() {
        let labels = vec![0, 1, 0];
        let groups: Vec<String> = (0..3).map(|i| i.to_string()).collect();
        assert!(matches!(
            make_folds(&labels, &groups, 5, Folding::Stratified, 0),
            Err(LearnError::InfeasibleFolds(_))
        ));
    }

    #[test]
    fn selection_tie_breaks_on_larger_c_then_l2() {
        let grid = RegConfig {
            penalties: vec![Penalty::L1, Penalty::L2],
            c_grid: vec![0.1, 1.0, 10.0],
            solver: SolverOptions::default(),
        };
        let scores = vec![vec![0.5, 0.8, 0.8], vec![0.8, 0.8, 0.8]];
        let s = select(&grid, &scores);
        assert_eq!((s.penalty, s.c), (Penalty::L2, 10.0));
        let scores = vec![vec![0.9, 0.8, 0.8], vec![0.8, 0.8, 0.8]];
        let s = select(&grid, &scores);
        assert_eq!((s.penalty, s.c), (Penalty::L1, 0.1));
    }
}
