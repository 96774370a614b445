use serde::{Deserialize, Serialize};

use super::LearnError;

/// Dense feature matrix with binary labels (1 = PRO, 0 = CON).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMatrix {
    n_rows: usize,
    n_cols: usize,
    /// Row-major values.
    values: Vec<f64>,
    labels: Vec<u8>,
    group_ids: Vec<String>,
    feature_names: Vec<String>,
}

impl DatasetMatrix {
    pub fn new(
        rows: Vec<Vec<f64>>,
        labels: Vec<u8>,
        group_ids: Vec<String>,
        feature_names: Vec<String>,
    ) -> Result<Self, LearnError> {
        let n_cols = feature_names.len();
        let mut values = Vec::with_capacity(rows.len() * n_cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_cols {
                return Err(LearnError::DimensionMismatch {
                    expected: n_cols,
                    found: row.len(),
                });
            }
            if let Some(j) = row.iter().position(|x| !x.is_finite()) {
                return Err(LearnError::NonFinite { row: i, col: j });
            }
            values.extend_from_slice(row);
        }
        Self::from_flat(values, labels, group_ids, feature_names)
    }

    pub fn from_flat(
        values: Vec<f64>,
        labels: Vec<u8>,
        group_ids: Vec<String>,
        feature_names: Vec<String>,
    ) -> Result<Self, LearnError> {
        let n_cols = feature_names.len();
        let n_rows = labels.len();
        if values.len() != n_rows * n_cols {
            return Err(LearnError::DimensionMismatch {
                expected: n_rows * n_cols,
                found: values.len(),
            });
        }
        if group_ids.len() != n_rows {
            return Err(LearnError::DimensionMismatch {
                expected: n_rows,
                found: group_ids.len(),
            });
        }
        if let Some(bad) = labels.iter().find(|&&y| y > 1) {
            return Err(LearnError::InvalidLabel(*bad));
        }
        if let Some(k) = values.iter().position(|x| !x.is_finite()) {
            return Err(LearnError::NonFinite {
                row: k / n_cols.max(1),
                col: k % n_cols.max(1),
            });
        }
        Ok(Self {
            n_rows,
            n_cols,
            values,
            labels,
            group_ids,
            feature_names,
        })
    }

    /// Dataset without group structure: each row is its own group.
    pub fn ungrouped(rows: Vec<Vec<f64>>, labels: Vec<u8>, feature_names: Vec<String>) -> Result<Self, LearnError> {
        let groups = (0..labels.len()).map(|i| i.to_string()).collect();
        Self::new(rows, labels, groups, feature_names)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_cols + j]
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn group_ids(&self) -> &[String] {
        &self.group_ids
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn class_counts(&self) -> (usize, usize) {
        let ones = self.labels.iter().filter(|&&y| y == 1).count();
        (self.n_rows - ones, ones)
    }

    /// Copy of the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut values = Vec::with_capacity(rows.len() * self.n_cols);
        for &i in rows {
            values.extend_from_slice(self.row(i));
        }
        Self {
            n_rows: rows.len(),
            n_cols: self.n_cols,
            values,
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
            group_ids: rows.iter().map(|&i| self.group_ids[i].clone()).collect(),
            feature_names: self.feature_names.clone(),
        }
    }

    /// Copy restricted to the given columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let mut values = Vec::with_capacity(self.n_rows * cols.len());
        for i in 0..self.n_rows {
            let row = self.row(i);
            values.extend(cols.iter().map(|&j| row[j]));
        }
        Self {
            n_rows: self.n_rows,
            n_cols: cols.len(),
            values,
            labels: self.labels.clone(),
            group_ids: self.group_ids.clone(),
            feature_names: cols.iter().map(|&j| self.feature_names[j].clone()).collect(),
        }
    }

    /// Multiply column `j` by `factor`.
    pub fn scale_column(&mut self, j: usize, factor: f64) {
        for i in 0..self.n_rows {
            self.values[i * self.n_cols + j] *= factor;
        }
    }
}

/// Per-feature standardization fitted on training rows. Constant features
/// (zero spread) are flagged and contribute nothing downstream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub constant: Vec<bool>,
}

impl Standardizer {
    pub fn fit(data: &DatasetMatrix) -> Self {
        let n = data.n_rows() as f64;
        let d = data.n_cols();
        let mut mean = vec![0.0; d];
        for i in 0..data.n_rows() {
            for (m, x) in mean.iter_mut().zip(data.row(i)) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for i in 0..data.n_rows() {
            for ((v, x), m) in var.iter_mut().zip(data.row(i)).zip(&mean) {
                *v += (x - m) * (x - m);
            }
        }
        let std: Vec<f64> = var.iter().map(|v| (v / n).sqrt()).collect();
        let constant = std
            .iter()
            .zip(&mean)
            .map(|(s, m)| *s <= 1e-12 * m.abs().max(1.0))
            .collect();
        Self { mean, std, constant }
    }

    pub fn active_columns(&self) -> Vec<usize> {
        (0..self.mean.len()).filter(|&j| !self.constant[j]).collect()
    }

    pub fn transform_value(&self, j: usize, x: f64) -> f64 {
        if self.constant[j] {
            0.0
        } else {
            (x - self.mean[j]) / self.std[j]
        }
    }
}
