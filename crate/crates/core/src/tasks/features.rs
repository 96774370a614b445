use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;

use super::instances::{TaskInstances, USER_FEATURE_NAMES};
use super::TaskError;
use crate::learn::{DatasetMatrix, FoldData, LearnError};
use crate::textfeat::{
    extract_scalars, scalar_feature_groups, scalar_feature_names, DocumentTerms, LexiconSet, TfidfConfig,
    TfidfModel,
};

/// User feature groups and their columns in [`USER_FEATURE_NAMES`].
pub const USER_GROUPS: [(&str, [usize; 2]); 3] = [
    ("opinion_similarity", [0, 1]),
    ("matching_political", [2, 3]),
    ("matching_religious", [4, 5]),
];

/// The n-gram block.
pub const TFIDF_GROUP: &str = "tfidf";

/// Every user group, every per-family linguistic group and the n-gram block.
pub(crate) fn default_groups(lexicons: &LexiconSet) -> Vec<String> {
    USER_GROUPS
        .iter()
        .map(|(g, _)| g.to_string())
        .chain(
            scalar_feature_groups(lexicons)
                .into_iter()
                .filter(|g| !g.name.starts_with("arg:"))
                .map(|g| g.name),
        )
        .chain(std::iter::once(TFIDF_GROUP.to_string()))
        .collect()
}

/// Columns picked out by a set of feature groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSelection {
    pub user_columns: Vec<usize>,
    /// Indices into the per-side scalar block.
    pub scalar_columns: Vec<usize>,
    pub tfidf: bool,
}

impl FeatureSelection {
    pub fn from_groups<S: AsRef<str>>(groups: &[S], lexicons: &LexiconSet) -> Result<Self, TaskError> {
        if groups.is_empty() {
            return Err(TaskError::Spec("empty feature selection".into()));
        }
        let scalar_groups = scalar_feature_groups(lexicons);
        let mut user = BTreeSet::new();
        let mut scalar = BTreeSet::new();
        let mut tfidf = false;
        for g in groups {
            let g = g.as_ref();
            if let Some((_, cols)) = USER_GROUPS.iter().find(|(n, _)| *n == g) {
                user.extend(cols.iter().copied());
            } else if let Some(sg) = scalar_groups.iter().find(|s| s.name == g) {
                scalar.extend(sg.columns.iter().copied());
            } else if g == TFIDF_GROUP {
                tfidf = true;
            } else {
                return Err(TaskError::UnknownGroup(g.to_string()));
            }
        }
        Ok(Self {
            user_columns: user.into_iter().collect(),
            scalar_columns: scalar.into_iter().collect(),
            tfidf,
        })
    }

    pub fn has_user(&self) -> bool {
        !self.user_columns.is_empty()
    }

    pub fn has_linguistic(&self) -> bool {
        !self.scalar_columns.is_empty() || self.tfidf
    }
}

struct DebateFeatures {
    pro_scalars: Vec<f64>,
    con_scalars: Vec<f64>,
    pro_terms: DocumentTerms,
    con_terms: DocumentTerms,
}

/// Fold-independent per-debate features computed once, from which fold
/// matrices are assembled. The n-gram block is refit on each training split.
pub struct TaskFeatures<'a> {
    instances: &'a TaskInstances,
    labels: Vec<u8>,
    group_ids: Vec<String>,
    debate_of: Vec<usize>,
    debates: Vec<DebateFeatures>,
    scalar_names: Vec<String>,
    tfidf: TfidfConfig,
}

impl<'a> TaskFeatures<'a> {
    pub fn new(instances: &'a TaskInstances, lexicons: &LexiconSet, tfidf: &TfidfConfig) -> Self {
        let ids: Vec<&String> = instances.debates.keys().collect();
        let debates: Vec<DebateFeatures> = instances
            .debates
            .par_iter()
            .map(|(_, t)| DebateFeatures {
                pro_scalars: extract_scalars(&t.pro.text, lexicons),
                con_scalars: extract_scalars(&t.con.text, lexicons),
                pro_terms: DocumentTerms::from_text(&t.pro.text, tfidf.max_n),
                con_terms: DocumentTerms::from_text(&t.con.text, tfidf.max_n),
            })
            .collect();
        let position: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, d)| (d.as_str(), i)).collect();
        let debate_of = instances
            .instances
            .iter()
            .map(|i| position[i.debate_id.as_str()])
            .collect();
        Self {
            instances,
            labels: instances.labels(),
            group_ids: instances.instances.iter().map(|i| i.debate_id.clone()).collect(),
            debate_of,
            debates,
            scalar_names: scalar_feature_names(lexicons),
            tfidf: tfidf.clone(),
        }
    }

    pub fn view<'s>(&'s self, selection: &'s FeatureSelection) -> FeatureView<'s, 'a> {
        FeatureView {
            features: self,
            selection,
        }
    }

    /// n-gram model fitted on both sides of the debates behind `rows`.
    pub fn fit_tfidf(&self, rows: &[usize]) -> Result<TfidfModel, TaskError> {
        let debates: BTreeSet<usize> = rows.iter().map(|&r| self.debate_of[r]).collect();
        let docs = debates
            .iter()
            .flat_map(|&d| [&self.debates[d].pro_terms, &self.debates[d].con_terms]);
        Ok(TfidfModel::fit_terms(docs, &self.tfidf)?)
    }
}

/// A feature selection over precomputed task features, usable as CV input.
pub struct FeatureView<'s, 'a> {
    features: &'s TaskFeatures<'a>,
    selection: &'s FeatureSelection,
}

impl FeatureView<'_, '_> {
    fn names(&self, model: Option<&TfidfModel>) -> Vec<String> {
        let f = self.features;
        let mut names: Vec<String> = self
            .selection
            .user_columns
            .iter()
            .map(|&j| USER_FEATURE_NAMES[j].to_string())
            .collect();
        let terms = model.map(TfidfModel::feature_names).unwrap_or_default();
        for side in ["pro", "con"] {
            names.extend(self.selection.scalar_columns.iter().map(|&j| format!("{side}:{}", f.scalar_names[j])));
            names.extend(terms.iter().map(|t| format!("{side}:{t}")));
        }
        names
    }

    /// Matrix for `rows` with the n-gram block from `model`.
    fn build(&self, rows: &[usize], model: Option<&TfidfModel>) -> Result<DatasetMatrix, LearnError> {
        let f = self.features;
        let sel = self.selection;
        let mut dense: HashMap<usize, (Vec<f64>, Vec<f64>)> = HashMap::new();
        let width = sel.user_columns.len() + 2 * (sel.scalar_columns.len() + model.map_or(0, TfidfModel::len));
        let mut values = Vec::with_capacity(rows.len() * width);
        for &r in rows {
            let inst = &f.instances.instances[r];
            values.extend(sel.user_columns.iter().map(|&j| inst.user_features[j]));
            let d = f.debate_of[r];
            let deb = &f.debates[d];
            let tf = model.map(|m| {
                dense.entry(d).or_insert_with(|| {
                    let to_dense = |terms: &DocumentTerms| {
                        let mut v = vec![0.0; m.len()];
                        for (i, x) in m.transform_terms(terms) {
                            v[i] = x;
                        }
                        v
                    };
                    (to_dense(&deb.pro_terms), to_dense(&deb.con_terms))
                })
            });
            values.extend(sel.scalar_columns.iter().map(|&j| deb.pro_scalars[j]));
            if let Some((pro, _)) = &tf {
                values.extend_from_slice(pro);
            }
            values.extend(sel.scalar_columns.iter().map(|&j| deb.con_scalars[j]));
            if let Some((_, con)) = &tf {
                values.extend_from_slice(con);
            }
        }
        DatasetMatrix::from_flat(
            values,
            rows.iter().map(|&r| f.labels[r]).collect(),
            rows.iter().map(|&r| f.group_ids[r].clone()).collect(),
            self.names(model),
        )
    }

    /// Matrix over every instance, with the n-gram block fitted on all of
    /// them. For inspection only: evaluation must go through `materialize`.
    pub fn full_matrix(&self) -> Result<DatasetMatrix, TaskError> {
        let all: Vec<usize> = (0..self.len()).collect();
        let model = if self.selection.tfidf { Some(self.features.fit_tfidf(&all)?) } else { None };
        Ok(self.build(&all, model.as_ref())?)
    }
}

impl FoldData for FeatureView<'_, '_> {
    fn len(&self) -> usize {
        self.features.labels.len()
    }

    fn labels(&self) -> &[u8] {
        &self.features.labels
    }

    fn group_ids(&self) -> &[String] {
        &self.features.group_ids
    }

    fn materialize(&self, train: &[usize], eval: &[usize]) -> Result<(DatasetMatrix, DatasetMatrix), LearnError> {
        let model = if self.selection.tfidf {
            Some(self.features.fit_tfidf(train).map_err(|e| LearnError::Features(e.to_string()))?)
        } else {
            None
        };
        Ok((self.build(train, model.as_ref())?, self.build(eval, model.as_ref())?))
    }
}
