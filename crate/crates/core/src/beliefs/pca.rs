use serde::{Deserialize, Serialize};

use super::BeliefsError;
use crate::linalg::{dot, symmetric_eigen};

/// Two-component principal-component projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaProjection {
    /// Unit, mutually orthogonal principal axes.
    pub components: [Vec<f64>; 2],
    pub mean: Vec<f64>,
    /// Per-input 2-d coordinates, in input order.
    pub projected: Vec<[f64; 2]>,
    /// Sample-covariance eigenvalues for the two axes, descending.
    pub explained_variance: [f64; 2],
    /// Sum of all covariance eigenvalues (trace of the sample covariance).
    pub total_variance: f64,
    /// Axes (0 or 1) along which the data has no variance.
    pub degenerate_axes: Vec<usize>,
}

/// Relative threshold below which an eigenvalue counts as zero.
const DEGENERATE_RELATIVE: f64 = 1e-12;

/// Sample covariance (divisor N-1) of row vectors, with their mean.
pub fn sample_covariance(rows: &[&[f64]]) -> (Vec<f64>, Vec<f64>) {
    let n = rows.len();
    let d = rows[0].len();
    let mut mean = vec![0.0; d];
    for row in rows {
        for (m, x) in mean.iter_mut().zip(row.iter()) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut cov = vec![0.0; d * d];
    let mut centered = vec![0.0; d];
    for row in rows {
        for ((c, x), m) in centered.iter_mut().zip(row.iter()).zip(&mean) {
            *c = x - m;
        }
        for i in 0..d {
            let ci = centered[i];
            if ci == 0.0 {
                continue;
            }
            for j in i..d {
                cov[i * d + j] += ci * centered[j];
            }
        }
    }
    let denom = (n - 1) as f64;
    for i in 0..d {
        for j in i..d {
            let value = cov[i * d + j] / denom;
            cov[i * d + j] = value;
            cov[j * d + i] = value;
        }
    }
    (mean, cov)
}

/// Flip `v` so that its largest-magnitude entry (first on ties) is positive.
fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() + 1e-12 {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Project row vectors onto their top two principal components.
///
/// Components come from the eigendecomposition of the sample covariance.
/// When the data has fewer than two directions of variance the missing axis
/// is still filled with a unit eigenvector from the null space and listed in
/// `degenerate_axes`.
pub fn pca_project<V: AsRef<[f64]>>(vectors: &[V]) -> Result<PcaProjection, BeliefsError> {
    if vectors.len() < 3 {
        return Err(BeliefsError::InsufficientData(format!(
            "PCA needs at least 3 vectors, got {}",
            vectors.len()
        )));
    }
    let rows: Vec<&[f64]> = vectors.iter().map(|v| v.as_ref()).collect();
    let d = rows[0].len();
    if d < 2 {
        return Err(BeliefsError::InsufficientData(format!(
            "PCA needs at least 2 dimensions, got {d}"
        )));
    }
    if let Some(bad) = rows.iter().find(|r| r.len() != d) {
        return Err(BeliefsError::LengthMismatch(d, bad.len()));
    }

    let (mean, cov) = sample_covariance(&rows);
    let eigen = symmetric_eigen(&cov, d);
    let total_variance: f64 = (0..d).map(|i| cov[i * d + i]).sum();
    let scale = total_variance.max(f64::MIN_POSITIVE);

    let mut components = [eigen.vectors[0].clone(), eigen.vectors[1].clone()];
    let mut explained = [eigen.values[0].max(0.0), eigen.values[1].max(0.0)];
    let mut degenerate_axes = Vec::new();
    for axis in 0..2 {
        if explained[axis] <= DEGENERATE_RELATIVE * scale {
            explained[axis] = 0.0;
            degenerate_axes.push(axis);
        }
        fix_sign(&mut components[axis]);
    }

    let projected = rows
        .iter()
        .map(|row| {
            let centered: Vec<f64> = row.iter().zip(&mean).map(|(x, m)| x - m).collect();
            [dot(&centered, &components[0]), dot(&centered, &components[1])]
        })
        .collect();

    Ok(PcaProjection {
        components,
        mean,
        projected,
        explained_variance: explained,
        total_variance,
        degenerate_axes,
    })
}

impl PcaProjection {
    /// CSV with an explained-variance comment header followed by
    /// `user_id,x,y,label` rows.
    pub fn to_csv(&self, ids: &[String], labels: &[String]) -> String {
        let mut out = format!(
            "# explained_variance,{:.10},{:.10}\n# total_variance,{:.10}\nuser_id,x,y,label\n",
            self.explained_variance[0], self.explained_variance[1], self.total_variance
        );
        for ((id, label), [x, y]) in ids.iter().zip(labels).zip(&self.projected) {
            out.push_str(&format!("{id},{x:.10},{y:.10},{label}\n"));
        }
        out
    }
}
