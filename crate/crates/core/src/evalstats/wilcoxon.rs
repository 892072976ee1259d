use serde::{Deserialize, Serialize};

use super::ranks::average_ranks;
use crate::error::{Error, Result};
use crate::numcore::normal_cdf;

/// Largest number of non-zero differences handled by the exact null law.
pub const EXACT_MAX_N: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    /// `x` tends to exceed `y`.
    Greater,
    Less,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WilcoxonMethod {
    Exact,
    NormalApprox,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// Sum of the ranks of positive differences.
    pub statistic: f64,
    pub n_effective: usize,
    pub p_one_sided: f64,
    pub alternative: Alternative,
    pub method: WilcoxonMethod,
}

/// "***", "**", "*" or "" for p below 0.001, 0.01, 0.05.
pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

/// One-sided paired signed-rank test on `x − y`. Zero differences are
/// dropped; when nothing is left the p-value is 1 with `n_effective = 0`.
pub fn wilcoxon_signed_rank(
    x: &[f64],
    y: &[f64],
    alternative: Alternative,
) -> Result<WilcoxonResult> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let diffs: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(a, b)| a - b)
        .filter(|d| *d != 0.0)
        .collect();
    if diffs.iter().any(|d| !d.is_finite()) {
        return Err(Error::NonFinite);
    }
    let n = diffs.len();
    if n == 0 {
        return Ok(WilcoxonResult {
            statistic: 0.0,
            n_effective: 0,
            p_one_sided: 1.0,
            alternative,
            method: WilcoxonMethod::Exact,
        });
    }
    let magnitudes: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&magnitudes);
    let statistic: f64 = ranks
        .iter()
        .zip(&diffs)
        .filter(|(_, d)| **d > 0.0)
        .map(|(r, _)| r)
        .sum();
    let (p, method) = if n <= EXACT_MAX_N {
        (
            exact_p(&ranks, statistic, alternative),
            WilcoxonMethod::Exact,
        )
    } else {
        (
            normal_p(&ranks, statistic, alternative),
            WilcoxonMethod::NormalApprox,
        )
    };
    Ok(WilcoxonResult {
        statistic,
        n_effective: n,
        p_one_sided: p.clamp(0.0, 1.0),
        alternative,
        method,
    })
}

/// Exact null law of the positive-rank sum, conditional on the observed
/// (possibly tied) ranks. Doubled ranks are integers, so the distribution
/// is a subset-sum convolution.
fn exact_p(ranks: &[f64], statistic: f64, alternative: Alternative) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    let mut dist = vec![0.0f64; total + 1];
    dist[0] = 1.0;
    let mut reach = 0;
    for &r in &doubled {
        for s in (0..=reach).rev() {
            let v = dist[s] * 0.5;
            dist[s] = v;
            dist[s + r] += v;
        }
        reach += r;
    }
    let observed = (2.0 * statistic).round() as usize;
    match alternative {
        Alternative::Greater => dist[observed..].iter().sum(),
        Alternative::Less => dist[..=observed].iter().sum(),
    }
}

fn normal_p(ranks: &[f64], statistic: f64, alternative: Alternative) -> f64 {
    let n = ranks.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    let mut sorted = ranks.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    let sd = var.max(0.0).sqrt();
    if sd == 0.0 {
        return 1.0;
    }
    match alternative {
        Alternative::Greater => 1.0 - normal_cdf((statistic - mean - 0.5) / sd),
        Alternative::Less => normal_cdf((statistic - mean + 0.5) / sd),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_positive_differences() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y = [0.0; 5];
        let r = wilcoxon_signed_rank(&x, &y, Alternative::Greater).unwrap();
        assert_eq!(r.p_one_sided, 1.0 / 32.0);
        assert_eq!(r.statistic, 15.0);
        assert_eq!(r.method, WilcoxonMethod::Exact);
        let r = wilcoxon_signed_rank(&x, &y, Alternative::Less).unwrap();
        assert_eq!(r.p_one_sided, 1.0);
    }

    #[test]
    fn identical_samples() {
        let r = wilcoxon_signed_rank(&[1.0, 2.0], &[1.0, 2.0], Alternative::Less).unwrap();
        assert_eq!((r.p_one_sided, r.n_effective), (1.0, 0));
    }

    #[test]
    fn stars() {
        assert_eq!(significance_stars(0.0005), "***");
        assert_eq!(significance_stars(0.005), "**");
        assert_eq!(significance_stars(0.04), "*");
        assert_eq!(significance_stars(0.05), "");
    }
}
