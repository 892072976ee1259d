//! Soft-margin RBF support vector machine solved by SMO.
//!
//! Working-set selection uses second-order information (maximal violating
//! `i`, then the `j` with the largest guaranteed decrease). The full kernel
//! matrix is computed once up front. Features are standardized internally
//! with population mean and standard deviation; a constant feature keeps
//! scale 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numcore::{squared_euclidean, Matrix};

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmConfig {
    pub cost: f64,
    /// Kernel width; `None` means `1/M`.
    pub gamma: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            cost: 1.0,
            gamma: None,
            tol: 1e-3,
            max_iter: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScaler {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

impl FeatureScaler {
    pub fn fit(x: &Matrix) -> FeatureScaler {
        let mean = x.column_means();
        let n = x.n_rows().max(1) as f64;
        let mut sd = vec![0.0; x.n_cols()];
        for row in x.rows() {
            for ((s, v), m) in sd.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        for s in sd.iter_mut() {
            *s = (*s / n).sqrt();
            if !(*s > 0.0) {
                *s = 1.0;
            }
        }
        FeatureScaler { mean, sd }
    }

    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        for (((o, v), m), s) in out.iter_mut().zip(x).zip(&self.mean).zip(&self.sd) {
            *o = (v - m) / s;
        }
    }

    pub fn apply(&self, x: &Matrix) -> Matrix {
        let mut out = x.clone();
        for i in 0..x.n_rows() {
            self.apply_into(x.row(i), out.row_mut(i));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    /// Support vectors in standardized coordinates.
    pub support_vectors: Matrix,
    /// `α_i·y_i` for each support vector.
    pub dual_coef: Vec<f64>,
    pub bias: f64,
    pub gamma: f64,
    pub cost: f64,
    pub scaler: FeatureScaler,
    /// Training indices of the support vectors.
    pub support_indices: Vec<usize>,
    /// Full dual vector over the training rows.
    pub alpha: Vec<f64>,
    pub n_iterations: usize,
    pub converged: bool,
    /// Dual objective `Σα − ½αᵀQα` after each SMO update, starting at 0.
    pub objective_trace: Vec<f64>,
}

fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    (-gamma * squared_euclidean(a, b)).exp()
}

pub fn svm_fit(x: &Matrix, y: &[bool], cfg: &SvmConfig) -> Result<SvmModel> {
    if x.is_empty() {
        return Err(Error::EmptyData);
    }
    if y.len() != x.n_rows() {
        return Err(Error::LengthMismatch {
            left: x.n_rows(),
            right: y.len(),
        });
    }
    let n_pos = y.iter().filter(|&&v| v).count();
    if n_pos == 0 || n_pos == y.len() {
        return Err(Error::SingleClass);
    }
    if !(cfg.cost > 0.0) || !(cfg.tol > 0.0) {
        return Err(Error::InvalidArgument(
            "SVM cost and tol must be positive".into(),
        ));
    }
    let gamma = cfg.gamma.unwrap_or(1.0 / x.n_cols().max(1) as f64);
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidArgument(format!("SVM gamma = {gamma}")));
    }
    let scaler = FeatureScaler::fit(x);
    let xs = scaler.apply(x);
    let n = xs.n_rows();
    let c = cfg.cost;
    let ys: Vec<f64> = y.iter().map(|&v| if v { 1.0 } else { -1.0 }).collect();

    let mut kernel = vec![0.0; n * n];
    for i in 0..n {
        kernel[i * n + i] = 1.0;
        for j in 0..i {
            let k = rbf(xs.row(i), xs.row(j), gamma);
            kernel[i * n + j] = k;
            kernel[j * n + i] = k;
        }
    }
    let k = |i: usize, j: usize| kernel[i * n + j];

    let mut alpha = vec![0.0; n];
    // gradient of ½αᵀQα − Σα
    let mut grad = vec![-1.0; n];
    let mut objective = 0.0;
    let mut trace = vec![objective];
    let mut converged = false;
    let mut iterations = 0;
    let in_up = |a: f64, yt: f64| (yt > 0.0 && a < c) || (yt < 0.0 && a > 0.0);
    let in_low = |a: f64, yt: f64| (yt > 0.0 && a > 0.0) || (yt < 0.0 && a < c);

    while iterations < cfg.max_iter {
        let mut g_max = f64::NEG_INFINITY;
        let mut i_sel = usize::MAX;
        for t in 0..n {
            if in_up(alpha[t], ys[t]) {
                let v = -ys[t] * grad[t];
                if v > g_max {
                    g_max = v;
                    i_sel = t;
                }
            }
        }
        let mut g_min = f64::INFINITY;
        let mut j_sel = usize::MAX;
        let mut best_obj = f64::INFINITY;
        for t in 0..n {
            if !in_low(alpha[t], ys[t]) {
                continue;
            }
            let v = -ys[t] * grad[t];
            g_min = g_min.min(v);
            if i_sel != usize::MAX {
                let b = g_max - v;
                if b > 0.0 {
                    let mut a = k(i_sel, i_sel) + k(t, t) - 2.0 * k(i_sel, t);
                    if a <= 0.0 {
                        a = TAU;
                    }
                    let obj = -(b * b) / a;
                    if obj <= best_obj {
                        best_obj = obj;
                        j_sel = t;
                    }
                }
            }
        }
        if i_sel == usize::MAX || j_sel == usize::MAX || g_max - g_min < cfg.tol {
            converged = true;
            break;
        }
        let (i, j) = (i_sel, j_sel);
        let (old_ai, old_aj) = (alpha[i], alpha[j]);
        let mut quad = k(i, i) + k(j, j) - 2.0 * k(i, j);
        if quad <= 0.0 {
            quad = TAU;
        }
        if ys[i] != ys[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_ai, alpha[j] - old_aj);
        for t in 0..n {
            grad[t] += ys[t] * (ys[i] * k(t, i) * di + ys[j] * k(t, j) * dj);
        }
        // dual objective = −Σ α_t (G_t − 1)/2
        objective = -0.5
            * alpha
                .iter()
                .zip(&grad)
                .map(|(a, g)| a * (g - 1.0))
                .sum::<f64>();
        trace.push(objective);
        iterations += 1;
    }

    let bias = -threshold(&alpha, &grad, &ys, c);
    let support_indices: Vec<usize> = (0..n).filter(|&t| alpha[t] > 0.0).collect();
    let support_vectors = xs.select_rows(&support_indices);
    let dual_coef = support_indices.iter().map(|&t| alpha[t] * ys[t]).collect();
    Ok(SvmModel {
        support_vectors,
        dual_coef,
        bias,
        gamma,
        cost: c,
        scaler,
        support_indices,
        alpha,
        n_iterations: iterations,
        converged,
        objective_trace: trace,
    })
}

/// `ρ` with decision `f(x) = Σ α_i y_i K(x_i, x) − ρ`: the mean of `y_i G_i`
/// over free multipliers, or the midpoint of the feasible interval.
fn threshold(alpha: &[f64], grad: &[f64], ys: &[f64], c: f64) -> f64 {
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum, mut n_free) = (0.0, 0usize);
    for ((&a, &g), &yt) in alpha.iter().zip(grad).zip(ys) {
        let yg = yt * g;
        let at_upper = a >= c;
        let at_lower = a <= 0.0;
        if at_upper {
            if yt < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if at_lower {
            if yt > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum += yg;
        }
    }
    if n_free > 0 {
        sum / n_free as f64
    } else {
        (ub + lb) / 2.0
    }
}

/// Raw decision value `Σ α_i y_i K(x_i, x) + b`.
pub fn svm_score(model: &SvmModel, x: &[f64]) -> Result<f64> {
    if x.len() != model.scaler.mean.len() {
        return Err(Error::DimensionMismatch {
            expected: model.scaler.mean.len(),
            got: x.len(),
        });
    }
    let mut z = vec![0.0; x.len()];
    model.scaler.apply_into(x, &mut z);
    let sum: f64 = model
        .support_vectors
        .rows()
        .zip(&model.dual_coef)
        .map(|(sv, coef)| coef * rbf(sv, &z, model.gamma))
        .sum();
    Ok(sum + model.bias)
}
