//! Gaussian mixture models fitted by EM, with BIC-driven choice of the
//! component count.
//!
//! Each EM run starts from k-means++ means, the pooled covariance and uniform
//! weights. A run stops on `|Δℓ| < rel_tolerance·(1+|ℓ|)`, on the iteration
//! cap, or when an M-step would lower the log-likelihood (possible only when
//! the collapse guard perturbs the exact update); in the last case the
//! previous parameters are kept, so every recorded trace is non-decreasing.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numcore::{cholesky, mvn_sample, CholeskyFactor, Matrix, RngStream};
use crate::resamplers::kmeans_pp_seeds;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Collapsing components get this fraction of the pooled `trace/M` added to
/// their covariance diagonal.
const COLLAPSE_RIDGE: f64 = 1e-4;
const COLLAPSE_WEIGHT_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponent {
    weight: f64,
    mean: Vec<f64>,
    covariance: Matrix,
    cholesky: CholeskyFactor,
}

impl GaussianComponent {
    /// Builds a component, factoring the covariance with ridge escalation.
    pub fn new(weight: f64, mean: Vec<f64>, covariance: Matrix) -> Result<Self> {
        if !(weight > 0.0 && weight <= 1.0) {
            return Err(Error::InvalidArgument(format!("component weight {weight}")));
        }
        if covariance.n_rows() != mean.len() {
            return Err(Error::DimensionMismatch {
                expected: mean.len(),
                got: covariance.n_rows(),
            });
        }
        let cholesky = cholesky(&covariance, 0.0)?;
        Ok(GaussianComponent {
            weight,
            mean,
            covariance,
            cholesky,
        })
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn covariance(&self) -> &Matrix {
        &self.covariance
    }

    pub fn cholesky(&self) -> &CholeskyFactor {
        &self.cholesky
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// `ln N(x | μ, Σ)`, reusing `buf` as scratch (length M).
    fn log_density_with(&self, x: &[f64], buf: &mut [f64]) -> f64 {
        let l = self.cholesky.lower();
        let m = self.mean.len();
        let mut d2 = 0.0;
        for i in 0..m {
            let row = l.row(i);
            let mut s = x[i] - self.mean[i];
            for k in 0..i {
                s -= row[k] * buf[k];
            }
            let z = s / row[i];
            buf[i] = z;
            d2 += z * z;
        }
        -0.5 * (m as f64 * LN_2PI + self.cholesky.log_determinant() + d2)
    }
}

/// EM settings. `min_effective_count: None` means `M + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EmConfig {
    pub max_iterations: usize,
    pub rel_tolerance: f64,
    pub n_restarts: usize,
    pub min_effective_count: Option<f64>,
}

impl Default for EmConfig {
    fn default() -> Self {
        EmConfig {
            max_iterations: 200,
            rel_tolerance: 1e-6,
            n_restarts: 5,
            min_effective_count: None,
        }
    }
}

impl EmConfig {
    fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 || self.n_restarts == 0 || !(self.rel_tolerance > 0.0) {
            return Err(Error::InvalidArgument(
                "EM settings must be positive".into(),
            ));
        }
        if let Some(v) = self.min_effective_count {
            if !(v > 0.0) {
                return Err(Error::InvalidArgument(
                    "min_effective_count must be positive".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Fitted (or hand-built) mixture.
///
/// Hand-built models from [`GmmModel::from_components`] carry `NaN` for the
/// fit statistics and empty traces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmmModel {
    components: Vec<GaussianComponent>,
    dim: usize,
    n_samples: usize,
    log_likelihood: f64,
    n_iterations: usize,
    converged: bool,
    bic: f64,
    param_count: usize,
    traces: Vec<Vec<f64>>,
    min_support: f64,
    supported: bool,
}

impl GmmModel {
    /// Assembles a model from explicit components. Weights are renormalized.
    pub fn from_components(components: Vec<GaussianComponent>, n_samples: usize) -> Result<Self> {
        let first = components.first().ok_or(Error::EmptyData)?;
        let dim = first.dim();
        if let Some(c) = components.iter().find(|c| c.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: c.dim(),
            });
        }
        let mut components = components;
        normalize_weights(&mut components);
        let param_count = param_count(components.len(), dim);
        Ok(GmmModel {
            components,
            dim,
            n_samples,
            log_likelihood: f64::NAN,
            n_iterations: 0,
            converged: false,
            bic: f64::NAN,
            param_count,
            traces: Vec::new(),
            min_support: f64::NAN,
            supported: true,
        })
    }

    pub fn components(&self) -> &[GaussianComponent] {
        &self.components
    }

    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Rows the model was fitted on.
    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn log_likelihood(&self) -> f64 {
        self.log_likelihood
    }

    pub fn n_iterations(&self) -> usize {
        self.n_iterations
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn bic(&self) -> f64 {
        self.bic
    }

    /// ν = (C−1) + C·M + C·M(M+1)/2.
    pub fn param_count(&self) -> usize {
        self.param_count
    }

    /// Smallest effective row count `Σ_i r_ic` over the components.
    pub fn min_support(&self) -> f64 {
        self.min_support
    }

    /// `false` when some component is backed by fewer than
    /// `min_effective_count` rows, i.e. it only survives through the
    /// collapse guard.
    pub fn is_supported(&self) -> bool {
        self.supported
    }

    /// Log-likelihood per iteration, one trace per restart.
    pub fn traces(&self) -> &[Vec<f64>] {
        &self.traces
    }

    /// `ln Σ_c π_c N(x | μ_c, Σ_c)`.
    pub fn log_density(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let mut buf = vec![0.0; self.dim];
        let logs: Vec<f64> = self
            .components
            .iter()
            .map(|c| c.weight.ln() + c.log_density_with(x, &mut buf))
            .collect();
        Ok(log_sum_exp(&logs))
    }
}

pub fn param_count(c: usize, m: usize) -> usize {
    (c - 1) + c * m + c * m * (m + 1) / 2
}

/// `−2ℓ + ν·ln n`. Also stores the value on the model.
pub fn bic(model: &mut GmmModel, n: usize) -> f64 {
    let v = bic_value(model.log_likelihood, model.param_count, n);
    model.bic = v;
    v
}

pub fn bic_value(log_likelihood: f64, param_count: usize, n: usize) -> f64 {
    -2.0 * log_likelihood + param_count as f64 * (n.max(1) as f64).ln()
}

/// Candidate component counts `1..=min(9, ⌊N/(M+2)⌋)`, never empty.
pub fn default_c_range(n: usize, m: usize) -> Vec<usize> {
    let hi = (n / (m + 2)).clamp(1, 9);
    (1..=hi).collect()
}

/// Total log-likelihood of the rows of `x`.
pub fn gmm_loglik(model: &GmmModel, x: &Matrix) -> Result<f64> {
    if x.n_cols() != model.dim && !x.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: model.dim,
            got: x.n_cols(),
        });
    }
    let mut buf = vec![0.0; model.dim];
    let mut logs = vec![0.0; model.components.len()];
    let mut per_row = Vec::with_capacity(x.n_rows());
    for row in x.rows() {
        for (l, c) in logs.iter_mut().zip(&model.components) {
            *l = c.weight.ln() + c.log_density_with(row, &mut buf);
        }
        // sorted summation makes the result independent of component and row order
        logs.sort_by(f64::total_cmp);
        per_row.push(log_sum_exp(&logs));
    }
    per_row.sort_by(f64::total_cmp);
    Ok(per_row.iter().sum())
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

fn normalize_weights(components: &mut [GaussianComponent]) {
    let total: f64 = components.iter().map(|c| c.weight).sum();
    for c in components.iter_mut() {
        c.weight /= total;
    }
}

struct RunOutcome {
    components: Vec<GaussianComponent>,
    log_likelihood: f64,
    n_iterations: usize,
    converged: bool,
    trace: Vec<f64>,
    min_support: f64,
}

/// Fits a `c`-component mixture, keeping the best of `cfg.n_restarts` runs.
///
/// Runs whose components all keep at least `min_effective_count` rows of
/// support beat runs that do not; within each group the higher
/// log-likelihood wins and ties go to the earlier restart.
pub fn em_fit(x: &Matrix, c: usize, cfg: &EmConfig, rng: &RngStream) -> Result<GmmModel> {
    cfg.validate()?;
    let n = x.n_rows();
    if n == 0 || x.n_cols() == 0 {
        return Err(Error::EmptyData);
    }
    if c == 0 {
        return Err(Error::InvalidArgument(
            "component count must be >= 1".into(),
        ));
    }
    if c > n {
        return Err(Error::TooManyComponents {
            components: c,
            samples: n,
        });
    }
    let m = x.n_cols();
    let min_eff = cfg.min_effective_count.unwrap_or((m + 1) as f64);
    let pooled = x.covariance_mle();
    let pooled_scale = {
        let t = pooled.trace() / m as f64;
        if t > 0.0 {
            t
        } else {
            1.0
        }
    };

    let mut best: Option<RunOutcome> = None;
    let mut traces = Vec::with_capacity(cfg.n_restarts);
    for r in 0..cfg.n_restarts {
        let mut stream = rng.derive(&format!("restart{r}"));
        let run = em_run(x, c, cfg, min_eff, &pooled, pooled_scale, &mut stream)?;
        traces.push(run.trace.clone());
        let better = best.as_ref().is_none_or(|b| {
            let (ra, rb) = (run.min_support >= min_eff, b.min_support >= min_eff);
            (ra && !rb) || (ra == rb && run.log_likelihood > b.log_likelihood)
        });
        if better {
            best = Some(run);
        }
    }
    let best = best.expect("at least one restart");
    let mut model = GmmModel {
        dim: m,
        n_samples: n,
        log_likelihood: best.log_likelihood,
        n_iterations: best.n_iterations,
        converged: best.converged,
        bic: f64::NAN,
        param_count: param_count(c, m),
        components: best.components,
        traces,
        min_support: best.min_support,
        supported: best.min_support >= min_eff,
    };
    bic(&mut model, n);
    Ok(model)
}

fn em_run(
    x: &Matrix,
    c: usize,
    cfg: &EmConfig,
    min_eff: f64,
    pooled: &Matrix,
    pooled_scale: f64,
    rng: &mut RngStream,
) -> Result<RunOutcome> {
    let seeds = kmeans_pp_seeds(x, c, rng)?;
    let mut components = Vec::with_capacity(c);
    for &s in &seeds {
        components.push(GaussianComponent::new(
            1.0 / c as f64,
            x.row(s).to_vec(),
            pooled.clone(),
        )?);
    }
    let mut resp = Matrix::zeros(x.n_rows(), c);
    let mut ll = e_step(x, &components, &mut resp);
    let mut trace = vec![ll];
    let mut converged = false;
    let mut iterations = 0;
    let mut next_resp = Matrix::zeros(x.n_rows(), c);
    for _ in 0..cfg.max_iterations {
        let candidate = m_step(x, &resp, &components, min_eff, pooled_scale)?;
        let new_ll = e_step(x, &candidate, &mut next_resp);
        if !(new_ll >= ll) {
            // guarded update lost likelihood; keep the previous parameters
            converged = true;
            break;
        }
        iterations += 1;
        components = candidate;
        std::mem::swap(&mut resp, &mut next_resp);
        let delta = new_ll - ll;
        ll = new_ll;
        trace.push(ll);
        if delta.abs() < cfg.rel_tolerance * (1.0 + ll.abs()) {
            converged = true;
            break;
        }
    }
    let mut support = vec![0.0; c];
    for row in resp.rows() {
        for (s, r) in support.iter_mut().zip(row) {
            *s += r;
        }
    }
    Ok(RunOutcome {
        components,
        log_likelihood: ll,
        n_iterations: iterations,
        converged,
        trace,
        min_support: support.into_iter().fold(f64::INFINITY, f64::min),
    })
}

/// Fills `resp` with posterior responsibilities and returns the log-likelihood.
fn e_step(x: &Matrix, components: &[GaussianComponent], resp: &mut Matrix) -> f64 {
    let c = components.len();
    let mut buf = vec![0.0; x.n_cols()];
    let log_w: Vec<f64> = components.iter().map(|k| k.weight.ln()).collect();
    let mut total = 0.0;
    for (i, row) in x.rows().enumerate() {
        let out = resp.row_mut(i);
        for k in 0..c {
            out[k] = log_w[k] + components[k].log_density_with(row, &mut buf);
        }
        let lse = log_sum_exp(out);
        total += lse;
        for v in out.iter_mut() {
            *v = (*v - lse).exp();
        }
    }
    total
}

fn m_step(
    x: &Matrix,
    resp: &Matrix,
    previous: &[GaussianComponent],
    min_eff: f64,
    pooled_scale: f64,
) -> Result<Vec<GaussianComponent>> {
    let n = x.n_rows();
    let m = x.n_cols();
    let c = previous.len();
    let mut counts = vec![0.0; c];
    let mut means = vec![vec![0.0; m]; c];
    for (i, row) in x.rows().enumerate() {
        let r = resp.row(i);
        for k in 0..c {
            counts[k] += r[k];
            for (mu, v) in means[k].iter_mut().zip(row) {
                *mu += r[k] * v;
            }
        }
    }
    for k in 0..c {
        if counts[k] > 0.0 {
            means[k].iter_mut().for_each(|v| *v /= counts[k]);
        } else {
            means[k] = previous[k].mean.clone();
        }
    }
    let mut covs = vec![Matrix::zeros(m, m); c];
    let mut diff = vec![0.0; m];
    for (i, row) in x.rows().enumerate() {
        let r = resp.row(i);
        for k in 0..c {
            if r[k] == 0.0 {
                continue;
            }
            for (d, (v, mu)) in diff.iter_mut().zip(row.iter().zip(&means[k])) {
                *d = v - mu;
            }
            let cov = &mut covs[k];
            for a in 0..m {
                let ra = r[k] * diff[a];
                for b in a..m {
                    cov[(a, b)] += ra * diff[b];
                }
            }
        }
    }
    let mut weights: Vec<f64> = counts.iter().map(|&nk| nk / n as f64).collect();
    for k in 0..c {
        let denom = if counts[k] > 0.0 { counts[k] } else { 1.0 };
        let cov = &mut covs[k];
        for a in 0..m {
            for b in a..m {
                let v = cov[(a, b)] / denom;
                cov[(a, b)] = v;
                cov[(b, a)] = v;
            }
        }
        if counts[k] < min_eff {
            let ridge = COLLAPSE_RIDGE * pooled_scale;
            for a in 0..m {
                cov[(a, a)] += ridge;
            }
            weights[k] = weights[k].max(COLLAPSE_WEIGHT_FLOOR);
        }
    }
    let total: f64 = weights.iter().sum();
    let mut out = Vec::with_capacity(c);
    for ((w, mean), cov) in weights.into_iter().zip(means).zip(covs) {
        let chol = cholesky(&cov, 0.0)?;
        out.push(GaussianComponent {
            weight: w / total,
            mean,
            covariance: cov,
            cholesky: chol,
        });
    }
    Ok(out)
}

/// Result of a BIC sweep: the winning model plus every candidate's score.
#[derive(Debug, Clone)]
pub struct BicSelection {
    pub best: GmmModel,
    pub candidates: Vec<(usize, f64)>,
}

/// Fits every count in `c_range` and returns the lowest-BIC model.
pub fn select_by_bic(
    x: &Matrix,
    c_range: &[usize],
    cfg: &EmConfig,
    rng: &RngStream,
) -> Result<GmmModel> {
    select_by_bic_detailed(x, c_range, cfg, rng).map(|s| s.best)
}

/// As [`select_by_bic`], also reporting each candidate's BIC.
///
/// Candidates with an unsupported component (see
/// [`GmmModel::is_supported`]) are only chosen when no supported candidate
/// exists. Ties go to the smaller component count.
pub fn select_by_bic_detailed(
    x: &Matrix,
    c_range: &[usize],
    cfg: &EmConfig,
    rng: &RngStream,
) -> Result<BicSelection> {
    if c_range.is_empty() {
        return Err(Error::InvalidArgument("empty component range".into()));
    }
    let mut counts = c_range.to_vec();
    counts.sort_unstable();
    counts.dedup();
    let mut best: Option<GmmModel> = None;
    let mut candidates = Vec::with_capacity(counts.len());
    for c in counts {
        let model = em_fit(x, c, cfg, &rng.derive(&format!("C{c}")))?;
        candidates.push((c, model.bic));
        let better = best.as_ref().is_none_or(|b| {
            (model.supported && !b.supported)
                || (model.supported == b.supported && model.bic < b.bic)
        });
        if better {
            best = Some(model);
        }
    }
    Ok(BicSelection {
        best: best.expect("non-empty range"),
        candidates,
    })
}

/// Draws `n` rows: a component by weight, then a normal draw from it.
pub fn gmm_sample(model: &GmmModel, n: usize, rng: &mut RngStream) -> Result<Matrix> {
    let mut out = Matrix::with_cols(model.dim);
    for _ in 0..n {
        let k = pick_component(model, rng);
        let comp = &model.components[k];
        let row = mvn_sample(&comp.mean, &comp.cholesky, rng)?;
        out.push_row(&row)?;
    }
    Ok(out)
}

/// Index of a component drawn with probability equal to its weight.
pub fn pick_component(model: &GmmModel, rng: &mut RngStream) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (k, c) in model.components.iter().enumerate() {
        acc += c.weight;
        if u < acc {
            return k;
        }
    }
    model.components.len() - 1
}
