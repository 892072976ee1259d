//! Binary logistic regression by damped Newton (IRLS).
//!
//! Minimizes `−Σ log-likelihood + ½·ridge·‖w‖²`; the intercept is not
//! penalized. Each Newton step is halved until the objective decreases.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numcore::{cholesky, dot, Matrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogisticConfig {
    pub max_iter: usize,
    pub tol: f64,
    pub ridge: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        LogisticConfig {
            max_iter: 100,
            tol: 1e-8,
            ridge: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub converged: bool,
    pub n_iterations: usize,
    /// Objective after each accepted step, starting from the zero model.
    pub objective_trace: Vec<f64>,
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^t)` without overflow.
fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

/// Penalized negative log-likelihood at `(weights, intercept)`.
pub fn penalized_nll(x: &Matrix, y: &[bool], weights: &[f64], intercept: f64, ridge: f64) -> f64 {
    let mut total = 0.0;
    for (row, &label) in x.rows().zip(y) {
        let eta = intercept + dot(row, weights);
        total += softplus(eta) - if label { eta } else { 0.0 };
    }
    total + 0.5 * ridge * weights.iter().map(|w| w * w).sum::<f64>()
}

/// Gradient of [`penalized_nll`], ordered `[intercept, w_1, …, w_M]`.
pub fn penalized_gradient(
    x: &Matrix,
    y: &[bool],
    weights: &[f64],
    intercept: f64,
    ridge: f64,
) -> Vec<f64> {
    let m = x.n_cols();
    let mut g = vec![0.0; m + 1];
    for (row, &label) in x.rows().zip(y) {
        let r = sigmoid(intercept + dot(row, weights)) - if label { 1.0 } else { 0.0 };
        g[0] += r;
        for (gj, v) in g[1..].iter_mut().zip(row) {
            *gj += r * v;
        }
    }
    for (gj, w) in g[1..].iter_mut().zip(weights) {
        *gj += ridge * w;
    }
    g
}

pub fn logreg_fit(x: &Matrix, y: &[bool], cfg: &LogisticConfig) -> Result<LogisticModel> {
    if x.n_rows() < 2 {
        return Err(Error::EmptyData);
    }
    if y.len() != x.n_rows() {
        return Err(Error::LengthMismatch {
            left: x.n_rows(),
            right: y.len(),
        });
    }
    let m = x.n_cols();
    let p = m + 1;
    let mut weights = vec![0.0; m];
    let mut intercept = 0.0;
    let mut objective = penalized_nll(x, y, &weights, intercept, cfg.ridge);
    let mut trace = vec![objective];
    let mut converged = false;
    let mut iterations = 0;
    let mut design = vec![0.0; p];
    for _ in 0..cfg.max_iter {
        let grad = penalized_gradient(x, y, &weights, intercept, cfg.ridge);
        if grad.iter().fold(0.0_f64, |a, g| a.max(g.abs())) <= cfg.tol {
            converged = true;
            break;
        }
        let mut hess = Matrix::zeros(p, p);
        for row in x.rows() {
            let mu = sigmoid(intercept + dot(row, &weights));
            let w = mu * (1.0 - mu);
            design[0] = 1.0;
            design[1..].copy_from_slice(row);
            for a in 0..p {
                let wa = w * design[a];
                for b in a..p {
                    hess[(a, b)] += wa * design[b];
                }
            }
        }
        for a in 1..p {
            hess[(a, a)] += cfg.ridge;
        }
        for a in 0..p {
            for b in 0..a {
                hess[(a, b)] = hess[(b, a)];
            }
        }
        let step = cholesky(&hess, 0.0)?.solve(&grad)?;
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let cand_b = intercept - scale * step[0];
            let cand_w: Vec<f64> = weights
                .iter()
                .zip(&step[1..])
                .map(|(w, s)| w - scale * s)
                .collect();
            let obj = penalized_nll(x, y, &cand_w, cand_b, cfg.ridge);
            if obj < objective {
                weights = cand_w;
                intercept = cand_b;
                objective = obj;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            // no descent available at machine precision
            let grad = penalized_gradient(x, y, &weights, intercept, cfg.ridge);
            converged = grad.iter().fold(0.0_f64, |a, g| a.max(g.abs())) <= cfg.tol;
            break;
        }
        iterations += 1;
        trace.push(objective);
    }
    if !converged && iterations == cfg.max_iter {
        let grad = penalized_gradient(x, y, &weights, intercept, cfg.ridge);
        converged = grad.iter().fold(0.0_f64, |a, g| a.max(g.abs())) <= cfg.tol;
    }
    if weights.iter().any(|w| !w.is_finite()) || !intercept.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(LogisticModel {
        weights,
        intercept,
        converged,
        n_iterations: iterations,
        objective_trace: trace,
    })
}

/// Positive-class probability.
pub fn logreg_score(model: &LogisticModel, x: &[f64]) -> Result<f64> {
    if x.len() != model.weights.len() {
        return Err(Error::DimensionMismatch {
            expected: model.weights.len(),
            got: x.len(),
        });
    }
    Ok(sigmoid(model.intercept + dot(x, &model.weights)))
}
