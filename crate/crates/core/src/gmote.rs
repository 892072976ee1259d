//! GMOTE: Gaussian-mixture oversampling with local-outlier filtering.
//!
//! 1. Fit a mixture to the minority rows, choosing the component count by BIC.
//! 2. Flag rows whose aggregate tail probability is below `alpha`.
//! 3. Refit (again choosing the count by BIC) on the retained rows.
//! 4. Draw from the refitted mixture, discarding any draw that the refitted
//!    mixture itself would flag, until `ceil(gamma·|P|)` rows are accepted.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gmm::{default_c_range, gmm_sample, select_by_bic, EmConfig, GmmModel};
use crate::numcore::{Matrix, RngStream};
use crate::outlier::{detect_outliers, is_inlier, OutlierPolicy, TailProbabilityReport};

/// GMOTE settings. The cut-off lives in `policy.alpha`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GmoteConfig {
    pub gamma: f64,
    pub em: EmConfig,
    /// Candidate component counts; `None` uses [`default_c_range`] on the
    /// rows being fitted.
    pub c_range: Option<Vec<usize>>,
    pub policy: OutlierPolicy,
    pub max_attempts_factor: usize,
    pub seed: u64,
}

impl Default for GmoteConfig {
    fn default() -> Self {
        GmoteConfig {
            gamma: 1.0,
            em: EmConfig::default(),
            c_range: None,
            policy: OutlierPolicy::default(),
            max_attempts_factor: 1000,
            seed: 0,
        }
    }
}

impl GmoteConfig {
    pub fn alpha(&self) -> f64 {
        self.policy.alpha
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.policy.alpha = alpha;
        self
    }

    fn validate(&self) -> Result<()> {
        self.policy.validate()?;
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(Error::InvalidArgument(format!("gamma = {}", self.gamma)));
        }
        if self.max_attempts_factor == 0 {
            return Err(Error::InvalidArgument(
                "max_attempts_factor must be >= 1".into(),
            ));
        }
        Ok(())
    }

    fn range_for(&self, n: usize, m: usize) -> Vec<usize> {
        match &self.c_range {
            Some(r) => {
                let kept: Vec<usize> = r.iter().copied().filter(|&c| c >= 1 && c <= n).collect();
                if kept.is_empty() {
                    vec![1]
                } else {
                    kept
                }
            }
            None => default_c_range(n, m),
        }
    }
}

/// Fitted GMOTE state.
#[derive(Debug, Clone, PartialEq)]
pub struct GmoteModel {
    pub initial_gmm: GmmModel,
    pub outlier_report: TailProbabilityReport,
    pub cleaned_gmm: GmmModel,
    pub retained_count: usize,
    /// Set when every row (or all but one) was flagged and the refit used all
    /// rows instead.
    pub all_flagged_fallback: bool,
}

/// Synthetic minority rows with generation bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSet {
    pub instances: Matrix,
    pub method: String,
    pub seed: u64,
    /// Candidates inspected.
    pub attempts: usize,
    /// Candidates discarded as outliers.
    pub rejected: usize,
}

/// `ceil(gamma·n)`, robust to representation error in `gamma`.
pub fn target_count(gamma: f64, n: usize) -> usize {
    let raw = gamma * n as f64;
    (raw - 1e-9 * raw.max(1.0)).ceil().max(0.0) as usize
}

/// Fits the initial mixture, flags local outliers and refits on the rest.
pub fn gmote_fit(p: &Matrix, cfg: &GmoteConfig) -> Result<GmoteModel> {
    cfg.validate()?;
    if p.n_rows() < 2 {
        return Err(Error::TooFewInstances {
            got: p.n_rows(),
            need: 2,
        });
    }
    let m = p.n_cols();
    let root = RngStream::new(cfg.seed, "gmote");
    let initial_gmm = select_by_bic(
        p,
        &cfg.range_for(p.n_rows(), m),
        &cfg.em,
        &root.derive("initial"),
    )?;
    let outlier_report = detect_outliers(p, &initial_gmm, &cfg.policy)?;
    let mut retained = outlier_report.inlier_indices();
    let all_flagged_fallback = retained.len() < 2;
    if all_flagged_fallback {
        retained = (0..p.n_rows()).collect();
    }
    let kept = p.select_rows(&retained);
    let cleaned_gmm = select_by_bic(
        &kept,
        &cfg.range_for(kept.n_rows(), m),
        &cfg.em,
        &root.derive("cleaned"),
    )?;
    Ok(GmoteModel {
        initial_gmm,
        outlier_report,
        cleaned_gmm,
        retained_count: retained.len(),
        all_flagged_fallback,
    })
}

/// Rejection-samples `ceil(gamma·minority_count)` inliers of the cleaned
/// mixture, drawing in batches of `max(64, remaining)`.
pub fn gmote_generate(
    model: &GmoteModel,
    minority_count: usize,
    cfg: &GmoteConfig,
) -> Result<SyntheticSet> {
    cfg.validate()?;
    let target = target_count(cfg.gamma, minority_count);
    generate_count(model, target, cfg)
}

/// As [`gmote_generate`] but with an explicit row count.
pub fn generate_count(
    model: &GmoteModel,
    target: usize,
    cfg: &GmoteConfig,
) -> Result<SyntheticSet> {
    let gmm = &model.cleaned_gmm;
    let mut rng = RngStream::new(cfg.seed, "gmote/generate");
    let mut instances = Matrix::with_cols(gmm.dim());
    let mut attempts = 0usize;
    let mut rejected = 0usize;
    let limit = cfg.max_attempts_factor.saturating_mul(target);
    while instances.n_rows() < target {
        if attempts >= limit {
            return Err(Error::AcceptanceStarvation {
                target,
                accepted: instances.n_rows(),
                attempts,
            });
        }
        let remaining = target - instances.n_rows();
        let batch = gmm_sample(gmm, remaining.max(64), &mut rng)?;
        for row in batch.rows() {
            if instances.n_rows() == target || attempts >= limit {
                break;
            }
            attempts += 1;
            if is_inlier(row, gmm, &cfg.policy)? {
                instances.push_row(row)?;
            } else {
                rejected += 1;
            }
        }
    }
    Ok(SyntheticSet {
        instances,
        method: "GMOTE".into(),
        seed: cfg.seed,
        attempts,
        rejected,
    })
}

/// Fit then generate `ceil(gamma·|P|)` rows.
pub fn gmote_oversample(p: &Matrix, cfg: &GmoteConfig) -> Result<SyntheticSet> {
    let model = gmote_fit(p, cfg)?;
    gmote_generate(&model, p.n_rows(), cfg)
}
