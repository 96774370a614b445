//! Regularized binary logistic regression.
//!
//! Minimizes `R(w) + C * sum_i log(1 + exp(-y_i (w . x_i + b)))` with
//! `y_i` in {-1, +1}, `R(w) = 0.5 ||w||^2` (L2) or `||w||_1` (L1) and an
//! unpenalized intercept. Features are standardized with training
//! statistics before fitting.
//!
//! The solver is a proximal Newton method: each outer iteration builds a
//! quadratic model of the loss, minimizes model + penalty by cyclic
//! coordinate descent (soft-thresholding for L1), then backtracks along the
//! resulting direction until the true objective decreases sufficiently. The
//! objective is therefore non-increasing across iterations for both
//! penalties.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::dataset::{DatasetMatrix, Standardizer};
use super::LearnError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Penalty {
    L1,
    L2,
}

impl fmt::Display for Penalty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Penalty::L1 => "L1",
            Penalty::L2 => "L2",
        })
    }
}

impl FromStr for Penalty {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "L1" => Ok(Penalty::L1),
            "L2" => Ok(Penalty::L2),
            other => Err(format!("unknown penalty {other:?}, expected L1 or L2")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-4,
            max_iterations: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitStatus {
    pub converged: bool,
    pub iterations: usize,
    /// Final objective value in the unscaled form `R(w) + C * loss`.
    pub objective: f64,
}

/// Training matrix in column-major layout with labels in {-1, +1}.
#[derive(Debug, Clone)]
pub struct Problem {
    n: usize,
    cols: Vec<Vec<f64>>,
    y: Vec<f64>,
}

impl Problem {
    /// Use the columns of `data` as they are.
    pub fn raw(data: &DatasetMatrix) -> Self {
        let cols = (0..data.n_cols())
            .map(|j| (0..data.n_rows()).map(|i| data.get(i, j)).collect())
            .collect();
        Self::from_parts(data.labels(), cols)
    }

    /// Standardized non-constant columns of `data`.
    pub fn standardized(data: &DatasetMatrix, standardizer: &Standardizer) -> Self {
        let cols = standardizer
            .active_columns()
            .into_iter()
            .map(|j| {
                (0..data.n_rows())
                    .map(|i| standardizer.transform_value(j, data.get(i, j)))
                    .collect()
            })
            .collect();
        Self::from_parts(data.labels(), cols)
    }

    fn from_parts(labels: &[u8], cols: Vec<Vec<f64>>) -> Self {
        Self {
            n: labels.len(),
            cols,
            y: labels.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect(),
        }
    }

    pub fn n_features(&self) -> usize {
        self.cols.len()
    }

    fn margins(&self, w: &[f64], b: f64) -> Vec<f64> {
        let mut m = vec![b; self.n];
        for (col, &wj) in self.cols.iter().zip(w) {
            if wj != 0.0 {
                for (mi, x) in m.iter_mut().zip(col) {
                    *mi += wj * x;
                }
            }
        }
        m
    }
}

/// `log(1 + exp(z))` without overflow.
pub fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn penalty_value(penalty: Penalty, w: &[f64]) -> f64 {
    match penalty {
        Penalty::L1 => w.iter().map(|x| x.abs()).sum(),
        Penalty::L2 => 0.5 * w.iter().map(|x| x * x).sum::<f64>(),
    }
}

/// The unscaled training objective on a fixed [`Problem`].
pub struct LogisticObjective<'a> {
    problem: &'a Problem,
    penalty: Penalty,
    c: f64,
}

impl<'a> LogisticObjective<'a> {
    pub fn new(problem: &'a Problem, penalty: Penalty, c: f64) -> Self {
        Self { problem, penalty, c }
    }

    pub fn value(&self, w: &[f64], b: f64) -> f64 {
        let m = self.problem.margins(w, b);
        let loss: f64 = m.iter().zip(&self.problem.y).map(|(mi, yi)| softplus(-yi * mi)).sum();
        penalty_value(self.penalty, w) + self.c * loss
    }

    /// Gradient with respect to `(w, b)`; the intercept derivative is last.
    /// For L1 the penalty contributes `sign(w_j)` (0 at `w_j = 0`).
    pub fn gradient(&self, w: &[f64], b: f64) -> Vec<f64> {
        let m = self.problem.margins(w, b);
        let r: Vec<f64> = m
            .iter()
            .zip(&self.problem.y)
            .map(|(mi, yi)| -yi * sigmoid(-yi * mi) * self.c)
            .collect();
        let mut grad: Vec<f64> = self
            .problem
            .cols
            .iter()
            .zip(w)
            .map(|(col, &wj)| {
                let loss: f64 = col.iter().zip(&r).map(|(x, ri)| x * ri).sum();
                loss + match self.penalty {
                    Penalty::L2 => wj,
                    Penalty::L1 => {
                        if wj == 0.0 {
                            0.0
                        } else {
                            wj.signum()
                        }
                    }
                }
            })
            .collect();
        grad.push(r.iter().sum());
        grad
    }
}

/// Raw solver output on a [`Problem`].
#[derive(Debug, Clone)]
pub struct Solution {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub status: FitStatus,
    /// Objective after initialization and after every accepted step.
    pub objective_trace: Vec<f64>,
}

fn soft_threshold(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

/// Second-order model of the scaled objective around `w`.
struct Quadratic<'q> {
    problem: &'q Problem,
    /// Loss gradient per feature.
    g: &'q [f64],
    gb: f64,
    /// Diagonal of the loss Hessian per feature.
    a: &'q [f64],
    ab: f64,
    /// Per-row curvature.
    h: &'q [f64],
    w: &'q [f64],
    lambda: f64,
}

impl Quadratic<'_> {
    /// L1 step by cyclic coordinate descent on the model. Coordinates at 0
    /// whose gradient lies inside the penalty band stay at 0; the outer
    /// optimality check still covers them. Returns the intercept step.
    fn coordinate_step(&self, step: &mut [f64], xd: &mut [f64]) -> f64 {
        step.iter_mut().for_each(|s| *s = 0.0);
        xd.iter_mut().for_each(|x| *x = 0.0);
        let active: Vec<usize> = (0..self.w.len())
            .filter(|&j| self.w[j] != 0.0 || self.g[j].abs() >= self.lambda)
            .collect();
        let mut db = 0.0;
        let mut first_sweep = None;
        let mut full = true;
        let mut sweeps = 0;
        while sweeps < 100 {
            sweeps += 1;
            let mut largest: f64 = 0.0;
            for &j in &active {
                let u0 = self.w[j] + step[j];
                if !full && u0 == 0.0 {
                    continue;
                }
                let col = &self.problem.cols[j];
                let s = self.g[j] + col.iter().zip(self.h).zip(xd.iter()).map(|((x, hi), xdi)| x * hi * xdi).sum::<f64>();
                let u = soft_threshold(u0 - s / self.a[j], self.lambda / self.a[j]);
                let delta = u - u0;
                if delta != 0.0 {
                    step[j] += delta;
                    for (xdi, x) in xd.iter_mut().zip(col) {
                        *xdi += delta * x;
                    }
                    largest = largest.max(self.a[j] * delta * delta);
                }
            }
            let sb = self.gb + self.h.iter().zip(xd.iter()).map(|(hi, xdi)| hi * xdi).sum::<f64>();
            let delta = -sb / self.ab;
            if delta != 0.0 {
                db += delta;
                xd.iter_mut().for_each(|x| *x += delta);
                largest = largest.max(self.ab * delta * delta);
            }
            let first = *first_sweep.get_or_insert(largest);
            let settled = largest <= 1e-8 * first || largest < 1e-30;
            if settled && full {
                break;
            }
            // cycle over the nonzero coordinates until they settle, then
            // check every candidate again
            full = settled;
        }
        db
    }

    /// L2 Newton step by diagonally preconditioned conjugate gradient,
    /// stopped once the residual is small relative to the gradient.
    /// Returns the intercept step.
    fn conjugate_gradient_step(&self, step: &mut [f64], xd: &mut [f64]) -> f64 {
        let d = self.w.len();
        let cols = &self.problem.cols;
        let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
        let hessian_times = |v: &[f64], out: &mut [f64], u: &mut [f64]| {
            u.iter_mut().for_each(|x| *x = v[d]);
            for (col, &vj) in cols.iter().zip(v) {
                if vj != 0.0 {
                    for (ui, x) in u.iter_mut().zip(col) {
                        *ui += vj * x;
                    }
                }
            }
            u.iter_mut().zip(self.h).for_each(|(ui, hi)| *ui *= hi);
            for j in 0..d {
                out[j] = dot(&cols[j], u) + self.lambda * v[j];
            }
            out[d] = u.iter().sum::<f64>() + 1e-12 * v[d];
        };
        let precond: Vec<f64> = self.a.iter().map(|aj| aj + self.lambda).chain([self.ab]).collect();
        let mut x = vec![0.0; d + 1];
        let mut r: Vec<f64> = (0..d)
            .map(|j| -(self.g[j] + self.lambda * self.w[j]))
            .chain([-self.gb])
            .collect();
        let mut z: Vec<f64> = r.iter().zip(&precond).map(|(ri, pi)| ri / pi).collect();
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let r0 = dot(&r, &r).sqrt();
        let target = r0 * r0.sqrt().min(0.1);
        let mut hp = vec![0.0; d + 1];
        let mut u = vec![0.0; xd.len()];
        for _ in 0..(d + 1).max(50) {
            if dot(&r, &r).sqrt() <= target {
                break;
            }
            hessian_times(&p, &mut hp, &mut u);
            let curvature = dot(&p, &hp);
            if !(curvature > 0.0) {
                break;
            }
            let alpha = rz / curvature;
            x.iter_mut().zip(&p).for_each(|(xi, pi)| *xi += alpha * pi);
            r.iter_mut().zip(&hp).for_each(|(ri, hi)| *ri -= alpha * hi);
            z.iter_mut().zip(r.iter().zip(&precond)).for_each(|(zi, (ri, pi))| *zi = ri / pi);
            let rz_next = dot(&r, &z);
            let beta = rz_next / rz;
            rz = rz_next;
            p.iter_mut().zip(&z).for_each(|(pi, zi)| *pi = zi + beta * *pi);
        }
        step.copy_from_slice(&x[..d]);
        xd.iter_mut().for_each(|v| *v = x[d]);
        for (col, &sj) in cols.iter().zip(step.iter()) {
            if sj != 0.0 {
                for (xdi, xv) in xd.iter_mut().zip(col) {
                    *xdi += sj * xv;
                }
            }
        }
        x[d]
    }
}

/// Minimize the objective on `problem`, optionally warm-started.
pub fn solve(
    problem: &Problem,
    penalty: Penalty,
    c: f64,
    options: &SolverOptions,
    warm_start: Option<(&[f64], f64)>,
) -> Solution {
    let n = problem.n;
    let nf = n as f64;
    let d = problem.n_features();
    // Internally minimize G = F / (C n) = lambda * R(w) + mean loss.
    let lambda = 1.0 / (c * nf);
    let (mut w, mut b) = match warm_start {
        Some((w0, b0)) => (w0.to_vec(), b0),
        None => {
            // the optimal intercept at w = 0
            let pos = problem.y.iter().filter(|&&y| y > 0.0).count() as f64;
            let b0 = if pos > 0.0 && pos < nf { (pos / (nf - pos)).ln() } else { 0.0 };
            (vec![0.0; d], b0)
        }
    };
    let mut m = problem.margins(&w, b);
    let scaled = |m: &[f64], w: &[f64]| -> f64 {
        let loss: f64 = m.iter().zip(&problem.y).map(|(mi, yi)| softplus(-yi * mi)).sum();
        lambda * penalty_value(penalty, w) + loss / nf
    };
    let mut current = scaled(&m, &w);
    let mut trace = vec![current * c * nf];

    let mut r = vec![0.0; n];
    let mut h = vec![0.0; n];
    let mut g = vec![0.0; d];
    let mut a = vec![0.0; d];
    let mut step = vec![0.0; d];
    let mut xd = vec![0.0; n];
    let mut trial_m = vec![0.0; n];
    let mut trial_w = vec![0.0; d];

    let mut converged = false;
    let mut iterations = 0;
    while iterations < options.max_iterations {
        for i in 0..n {
            let p = sigmoid(m[i]);
            let yi = problem.y[i];
            r[i] = -yi * sigmoid(-yi * m[i]) / nf;
            h[i] = (p * (1.0 - p)).max(1e-12) / nf;
        }
        let gb: f64 = r.iter().sum();
        let mut violation = gb.abs();
        for j in 0..d {
            let col = &problem.cols[j];
            g[j] = col.iter().zip(&r).map(|(x, ri)| x * ri).sum();
            a[j] = col.iter().zip(&h).map(|(x, hi)| x * x * hi).sum::<f64>() + 1e-12;
            let v = match penalty {
                Penalty::L2 => (g[j] + lambda * w[j]).abs(),
                Penalty::L1 if w[j] > 0.0 => (g[j] + lambda).abs(),
                Penalty::L1 if w[j] < 0.0 => (g[j] - lambda).abs(),
                Penalty::L1 => (g[j].abs() - lambda).max(0.0),
            };
            violation = violation.max(v);
        }
        if violation < options.tolerance {
            converged = true;
            break;
        }
        iterations += 1;

        let quad = Quadratic {
            problem,
            g: &g,
            gb,
            a: &a,
            ab: h.iter().sum::<f64>() + 1e-12,
            h: &h,
            w: &w,
            lambda,
        };
        let db = match penalty {
            Penalty::L1 => quad.coordinate_step(&mut step, &mut xd),
            Penalty::L2 => quad.conjugate_gradient_step(&mut step, &mut xd),
        };

        for j in 0..d {
            trial_w[j] = w[j] + step[j];
        }
        let predicted = g.iter().zip(&step).map(|(gj, sj)| gj * sj).sum::<f64>()
            + gb * db
            + lambda * (penalty_value(penalty, &trial_w) - penalty_value(penalty, &w));
        if !(predicted < 0.0) {
            // no descent direction left at machine precision
            converged = violation < options.tolerance.sqrt();
            break;
        }

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..50 {
            for j in 0..d {
                trial_w[j] = w[j] + t * step[j];
            }
            for i in 0..n {
                trial_m[i] = m[i] + t * xd[i];
            }
            let value = scaled(&trial_m, &trial_w);
            if value <= current + 1e-2 * t * predicted {
                accepted = Some(value);
                break;
            }
            t *= 0.5;
        }
        let Some(value) = accepted else {
            converged = violation < options.tolerance.sqrt();
            break;
        };
        std::mem::swap(&mut w, &mut trial_w);
        std::mem::swap(&mut m, &mut trial_m);
        b += t * db;
        let decrease = current - value;
        current = value;
        trace.push(current * c * nf);
        if decrease <= options.tolerance * options.tolerance * current.abs().max(1.0) {
            converged = true;
            break;
        }
    }

    Solution {
        weights: w,
        intercept: b,
        status: FitStatus {
            converged,
            iterations,
            objective: current * c * nf,
        },
        objective_trace: trace,
    }
}

/// A fitted model. Weights live in standardized feature space; constant
/// training features carry weight 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub feature_names: Vec<String>,
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub penalty: Penalty,
    pub c: f64,
    pub solver: SolverOptions,
    pub standardizer: Standardizer,
    pub status: FitStatus,
    pub objective_trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub labels: Vec<u8>,
    pub probabilities: Vec<f64>,
}

fn check_trainable(data: &DatasetMatrix, c: f64) -> Result<(), LearnError> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(LearnError::InvalidConfig(format!("C must be positive and finite, got {c}")));
    }
    let (neg, pos) = data.class_counts();
    if neg == 0 || pos == 0 {
        return Err(LearnError::SingleClass);
    }
    Ok(())
}

fn into_model(
    data: &DatasetMatrix,
    standardizer: &Standardizer,
    solution: Solution,
    penalty: Penalty,
    c: f64,
    options: &SolverOptions,
) -> TrainedModel {
    if !solution.status.converged {
        log::warn!(
            "logistic regression ({penalty}, C={c}) stopped after {} iterations without converging",
            solution.status.iterations
        );
    }
    let mut weights = vec![0.0; data.n_cols()];
    for (k, j) in standardizer.active_columns().into_iter().enumerate() {
        weights[j] = solution.weights[k];
    }
    TrainedModel {
        feature_names: data.feature_names().to_vec(),
        weights,
        intercept: solution.intercept,
        penalty,
        c,
        solver: *options,
        standardizer: standardizer.clone(),
        status: solution.status,
        objective_trace: solution.objective_trace,
    }
}

/// Fit one model.
pub fn train_logreg(
    data: &DatasetMatrix,
    penalty: Penalty,
    c: f64,
    options: &SolverOptions,
) -> Result<TrainedModel, LearnError> {
    check_trainable(data, c)?;
    let standardizer = Standardizer::fit(data);
    let problem = Problem::standardized(data, &standardizer);
    let solution = solve(&problem, penalty, c, options, None);
    Ok(into_model(data, &standardizer, solution, penalty, c, options))
}

/// Fit one model per value of `cs`, warm-starting each fit from the
/// previous one in increasing-C order. Results are in the order of `cs`.
pub fn train_path(
    data: &DatasetMatrix,
    penalty: Penalty,
    cs: &[f64],
    options: &SolverOptions,
) -> Result<Vec<TrainedModel>, LearnError> {
    for &c in cs {
        check_trainable(data, c)?;
    }
    let standardizer = Standardizer::fit(data);
    let problem = Problem::standardized(data, &standardizer);
    let mut order: Vec<usize> = (0..cs.len()).collect();
    order.sort_by(|&x, &y| cs[x].total_cmp(&cs[y]));
    let mut models: Vec<Option<TrainedModel>> = vec![None; cs.len()];
    let mut warm: Option<(Vec<f64>, f64)> = None;
    for k in order {
        let start = warm.as_ref().map(|(w, b)| (w.as_slice(), *b));
        let solution = solve(&problem, penalty, cs[k], options, start);
        warm = Some((solution.weights.clone(), solution.intercept));
        models[k] = Some(into_model(data, &standardizer, solution, penalty, cs[k], options));
    }
    Ok(models.into_iter().map(|m| m.expect("every C fitted")).collect())
}

impl TrainedModel {
    /// Linear score `w . standardize(x) + b`.
    pub fn decision(&self, row: &[f64]) -> Result<f64, LearnError> {
        if row.len() != self.weights.len() {
            return Err(LearnError::DimensionMismatch {
                expected: self.weights.len(),
                found: row.len(),
            });
        }
        Ok(row
            .iter()
            .enumerate()
            .map(|(j, &x)| self.weights[j] * self.standardizer.transform_value(j, x))
            .sum::<f64>()
            + self.intercept)
    }

    pub fn probability(&self, row: &[f64]) -> Result<f64, LearnError> {
        Ok(sigmoid(self.decision(row)?))
    }

    /// Probabilities of label 1 and labels (probability >= 0.5).
    pub fn predict(&self, data: &DatasetMatrix) -> Result<Prediction, LearnError> {
        let probabilities = (0..data.n_rows())
            .map(|i| self.probability(data.row(i)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Prediction {
            labels: probabilities.iter().map(|&p| u8::from(p >= 0.5)).collect(),
            probabilities,
        })
    }

    /// `feature_name<TAB>weight` lines, in feature order.
    pub fn weights_tsv(&self) -> String {
        let mut out = String::from("feature\tweight\n");
        for (name, w) in self.feature_names.iter().zip(&self.weights) {
            out.push_str(&format!("{name}\t{w}\n"));
        }
        out.push_str(&format!("(intercept)\t{}\n", self.intercept));
        out
    }
}

/// Empirical log-odds `ln(n1 / n0)` of the labels.
pub fn log_odds(labels: &[u8]) -> f64 {
    let pos = labels.iter().filter(|&&y| y == 1).count() as f64;
    (pos / (labels.len() as f64 - pos)).ln()
}
