//! Local-outlier detection against a fitted mixture.
//!
//! For each instance and component the squared Mahalanobis distance is turned
//! into an upper-tail probability, either under `χ²_M` or under the scaled
//! `F_{M,n−M}` law of Hotelling's T². The per-component probabilities are then
//! aggregated and compared with the cut-off `alpha`.
//!
//! The default aggregate is the maximum over components: an instance is a
//! local outlier only if it falls outside the `alpha` contour of every
//! component. The minimum is available as an option.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gmm::{GaussianComponent, GmmModel};
use crate::numcore::{chi_sq_sf, f_sf, mahalanobis_sq, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregate {
    MaxOverComponents,
    MinOverComponents,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailStatistic {
    ChiSquare,
    HotellingF,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutlierPolicy {
    pub alpha: f64,
    pub aggregate: Aggregate,
    pub statistic: TailStatistic,
}

impl Default for OutlierPolicy {
    fn default() -> Self {
        OutlierPolicy {
            alpha: 0.05,
            aggregate: Aggregate::MaxOverComponents,
            statistic: TailStatistic::ChiSquare,
        }
    }
}

impl OutlierPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(Error::InvalidArgument(format!(
                "alpha = {} outside [0, 1)",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Tail probabilities and flags for a batch of instances.
#[derive(Debug, Clone, PartialEq)]
pub struct TailProbabilityReport {
    /// N×C matrix of per-component tail probabilities.
    pub per_component: Matrix,
    pub aggregate: Vec<f64>,
    /// `true` marks an outlier.
    pub flags: Vec<bool>,
    pub policy: OutlierPolicy,
}

impl TailProbabilityReport {
    pub fn n_flagged(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }

    pub fn inlier_indices(&self) -> Vec<usize> {
        (0..self.flags.len()).filter(|&i| !self.flags[i]).collect()
    }
}

/// `P(d² > d(x, μ_c, Σ_c)²)` for one component.
///
/// With `HotellingF` the statistic `d²·(n−M)/(M(n−1))` is referred to
/// `F_{M, n−M}`, where `n` is `effective_n`.
pub fn component_tail_prob(
    x: &[f64],
    comp: &GaussianComponent,
    statistic: TailStatistic,
    effective_n: usize,
) -> Result<f64> {
    let d2 = mahalanobis_sq(x, comp.mean(), comp.cholesky())?;
    tail_from_distance(d2, comp.dim(), statistic, effective_n)
}

fn tail_from_distance(d2: f64, m: usize, statistic: TailStatistic, n: usize) -> Result<f64> {
    match statistic {
        TailStatistic::ChiSquare => chi_sq_sf(d2, m),
        TailStatistic::HotellingF => {
            if n <= m + 1 {
                return Err(Error::InsufficientSampleSize {
                    effective_n: n,
                    dim: m,
                });
            }
            let (mf, nf) = (m as f64, n as f64);
            f_sf(d2 * (nf - mf) / (mf * (nf - 1.0)), m, n - m)
        }
    }
}

/// Per-component effective sample sizes `round(π_c·N)` used by the F branch.
fn effective_sizes(model: &GmmModel) -> Vec<usize> {
    model
        .components()
        .iter()
        .map(|c| (c.weight() * model.n_samples() as f64).round() as usize)
        .collect()
}

fn aggregate(values: &[f64], how: Aggregate) -> f64 {
    match how {
        Aggregate::MaxOverComponents => values.iter().copied().fold(0.0, f64::max),
        Aggregate::MinOverComponents => values.iter().copied().fold(1.0, f64::min),
    }
}

fn tail_row(
    x: &[f64],
    model: &GmmModel,
    policy: &OutlierPolicy,
    sizes: &[usize],
    out: &mut [f64],
) -> Result<()> {
    for ((p, comp), &n) in out.iter_mut().zip(model.components()).zip(sizes) {
        *p = component_tail_prob(x, comp, policy.statistic, n)?;
    }
    Ok(())
}

/// Tail probabilities of every row of `x`; a row is flagged when its
/// aggregate probability is below `policy.alpha`.
pub fn detect_outliers(
    x: &Matrix,
    model: &GmmModel,
    policy: &OutlierPolicy,
) -> Result<TailProbabilityReport> {
    policy.validate()?;
    if !x.is_empty() && x.n_cols() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: x.n_cols(),
        });
    }
    let c = model.n_components();
    let sizes = effective_sizes(model);
    let mut per_component = Matrix::zeros(x.n_rows(), c);
    let mut agg = Vec::with_capacity(x.n_rows());
    for (i, row) in x.rows().enumerate() {
        let out = per_component.row_mut(i);
        tail_row(row, model, policy, &sizes, out)?;
        agg.push(aggregate(out, policy.aggregate));
    }
    let flags = agg.iter().map(|&p| p < policy.alpha).collect();
    Ok(TailProbabilityReport {
        per_component,
        aggregate: agg,
        flags,
        policy: *policy,
    })
}

/// Aggregate tail probability of a single instance.
pub fn aggregate_tail_prob(x: &[f64], model: &GmmModel, policy: &OutlierPolicy) -> Result<f64> {
    if x.len() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: x.len(),
        });
    }
    let sizes = effective_sizes(model);
    let mut out = vec![0.0; model.n_components()];
    tail_row(x, model, policy, &sizes, &mut out)?;
    Ok(aggregate(&out, policy.aggregate))
}

/// `true` when `x` would not be flagged by [`detect_outliers`].
pub fn is_inlier(x: &[f64], model: &GmmModel, policy: &OutlierPolicy) -> Result<bool> {
    policy.validate()?;
    Ok(aggregate_tail_prob(x, model, policy)? >= policy.alpha)
}
