use serde::{Deserialize, Serialize};

use super::ranks::average_ranks;
use crate::error::{Error, Result};
use crate::numcore::Matrix;

/// Binary confusion counts; the minority class is positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub true_pos: usize,
    pub false_pos: usize,
    pub false_neg: usize,
    pub true_neg: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.true_pos + self.false_pos + self.false_neg + self.true_neg
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub accuracy: f64,
    pub recall: f64,
    /// Absent when nothing was predicted positive.
    pub precision: Option<f64>,
    pub f1: Option<f64>,
    pub gmean: f64,
    pub auc: Option<f64>,
}

pub fn confusion(y_true: &[bool], y_pred: &[bool]) -> Result<ConfusionCounts> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch {
            left: y_true.len(),
            right: y_pred.len(),
        });
    }
    let mut c = ConfusionCounts::default();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t, p) {
            (true, true) => c.true_pos += 1,
            (false, true) => c.false_pos += 1,
            (true, false) => c.false_neg += 1,
            (false, false) => c.true_neg += 1,
        }
    }
    Ok(c)
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Threshold metrics. Recall and specificity with an empty denominator are
/// reported as 0.
pub fn metrics_from_counts(c: ConfusionCounts) -> Result<MetricSet> {
    let n = c.total();
    if n == 0 {
        return Err(Error::EmptyCounts);
    }
    let accuracy = ratio(c.true_pos + c.true_neg, n);
    let recall = ratio(c.true_pos, c.true_pos + c.false_neg);
    let specificity = ratio(c.true_neg, c.true_neg + c.false_pos);
    let precision =
        (c.true_pos + c.false_pos > 0).then(|| ratio(c.true_pos, c.true_pos + c.false_pos));
    let f1 = precision.map(|p| {
        if p + recall > 0.0 {
            2.0 * p * recall / (p + recall)
        } else {
            0.0
        }
    });
    Ok(MetricSet {
        accuracy,
        recall,
        precision,
        f1,
        gmean: (recall * specificity).sqrt(),
        auc: None,
    })
}

/// Area under the ROC curve via the Mann–Whitney statistic; tied scores
/// count one half.
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: scores.len(),
            right: labels.len(),
        });
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite);
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    let ranks = average_ranks(scores);
    let pos_rank_sum: f64 = ranks
        .iter()
        .zip(labels)
        .filter(|(_, &l)| l)
        .map(|(r, _)| r)
        .sum();
    let (p, q) = (n_pos as f64, n_neg as f64);
    Ok(((pos_rank_sum - p * (p + 1.0) / 2.0) / (p * q)).clamp(0.0, 1.0))
}

/// Mean of the present values and the number of absent ones.
pub fn mean_skip_na(values: &[Option<f64>]) -> (Option<f64>, usize) {
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    let na = values.len() - present.len();
    if present.is_empty() {
        (None, na)
    } else {
        (Some(present.iter().sum::<f64>() / present.len() as f64), na)
    }
}

/// Per-feature min-max scaling to the training range. Constant features map
/// to 0.5; values outside the training range are not clipped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(train: &Matrix) -> Result<MinMaxScaler> {
        if train.is_empty() {
            return Err(Error::EmptyData);
        }
        let m = train.n_cols();
        let mut min = vec![f64::INFINITY; m];
        let mut max = vec![f64::NEG_INFINITY; m];
        for row in train.rows() {
            for j in 0..m {
                min[j] = min[j].min(row[j]);
                max[j] = max[j].max(row[j]);
            }
        }
        Ok(MinMaxScaler { min, max })
    }

    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        if x.n_cols() != self.min.len() {
            return Err(Error::DimensionMismatch {
                expected: self.min.len(),
                got: x.n_cols(),
            });
        }
        let mut out = x.clone();
        for i in 0..x.n_rows() {
            for (j, v) in out.row_mut(i).iter_mut().enumerate() {
                let range = self.max[j] - self.min[j];
                *v = if range > 0.0 {
                    (*v - self.min[j]) / range
                } else {
                    0.5
                };
            }
        }
        Ok(out)
    }
}
