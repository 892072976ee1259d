//! Mean tables per metric and paired Wilcoxon comparisons against a
//! baseline method.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use gmote_core::evalstats::{
    mean_skip_na, rank_methods, significance_stars, wilcoxon_signed_rank, Alternative,
};
use gmote_core::learners::ClassifierKind;
use serde::{Deserialize, Serialize};

use crate::config::method_rank;
use crate::results::{Metric, RunResult};

/// Mean of one (classifier, method, dataset) cell over folds and repeats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryCell {
    pub mean: Option<f64>,
    /// Folds whose value was NA and left out of the mean.
    pub na_count: usize,
    pub best: bool,
    pub worst: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub classifier: String,
    pub method: String,
    /// One cell per entry of [`MetricTable::datasets`].
    pub cells: Vec<SummaryCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricTable {
    pub metric: Metric,
    pub datasets: Vec<String>,
    pub rows: Vec<SummaryRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportTables {
    pub tables: Vec<MetricTable>,
}

fn classifier_rank(name: &str) -> usize {
    ClassifierKind::from_name(name).map_or(usize::MAX, |k| k as usize)
}

/// Datasets in first-seen order.
fn dataset_order(results: &[RunResult]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for r in results {
        if !out.contains(&r.dataset) {
            out.push(r.dataset.clone());
        }
    }
    out
}

/// (classifier, method) pairs in report order.
fn row_keys(results: &[RunResult]) -> Vec<(String, String)> {
    let mut keys: Vec<(String, String)> = results
        .iter()
        .map(|r| (r.classifier.clone(), r.method.clone()))
        .collect();
    keys.sort_by(|a, b| {
        (classifier_rank(&a.0), &a.0, method_rank(&a.1), &a.1).cmp(&(
            classifier_rank(&b.0),
            &b.0,
            method_rank(&b.1),
            &b.1,
        ))
    });
    keys.dedup();
    keys
}

fn mark_extremes(rows: &mut [SummaryRow], classifier: &str, col: usize) {
    let values: Vec<f64> = rows
        .iter()
        .filter(|r| r.classifier == classifier)
        .filter_map(|r| r.cells[col].mean)
        .collect();
    if values.len() < 2 {
        return;
    }
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    if hi == lo {
        return;
    }
    for r in rows.iter_mut().filter(|r| r.classifier == classifier) {
        let cell = &mut r.cells[col];
        cell.best = cell.mean == Some(hi);
        cell.worst = cell.mean == Some(lo);
    }
}

/// One table per metric: rows are (classifier, method), columns are
/// datasets, cells are means skipping NA folds. Within each classifier and
/// dataset the highest and lowest means are flagged.
pub fn summarize(results: &[RunResult]) -> ReportTables {
    let datasets = dataset_order(results);
    let keys = row_keys(results);
    let mut grouped: BTreeMap<(&str, &str, &str), Vec<&RunResult>> = BTreeMap::new();
    for r in results {
        grouped
            .entry((&r.classifier, &r.method, &r.dataset))
            .or_default()
            .push(r);
    }
    let tables = Metric::ALL
        .into_iter()
        .map(|metric| {
            let mut rows: Vec<SummaryRow> = keys
                .iter()
                .map(|(c, m)| SummaryRow {
                    classifier: c.clone(),
                    method: m.clone(),
                    cells: datasets
                        .iter()
                        .map(|d| {
                            let values: Vec<Option<f64>> = grouped
                                .get(&(c.as_str(), m.as_str(), d.as_str()))
                                .map(|v| v.iter().map(|r| r.metrics.get(metric)).collect())
                                .unwrap_or_default();
                            let (mean, na_count) = mean_skip_na(&values);
                            SummaryCell {
                                mean,
                                na_count,
                                best: false,
                                worst: false,
                            }
                        })
                        .collect(),
                })
                .collect();
            let mut classifiers: Vec<String> = keys.iter().map(|k| k.0.clone()).collect();
            classifiers.dedup();
            for c in &classifiers {
                for col in 0..datasets.len() {
                    mark_extremes(&mut rows, c, col);
                }
            }
            MetricTable {
                metric,
                datasets: datasets.clone(),
                rows,
            }
        })
        .collect();
    ReportTables { tables }
}

impl ReportTables {
    pub fn table(&self, metric: Metric) -> Option<&MetricTable> {
        self.tables.iter().find(|t| t.metric == metric)
    }
}

fn fmt_mean(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".into(), |x| format!("{x:.3}"))
}

impl MetricTable {
    /// Aligned text. Best cells carry a trailing `*`, worst cells a `_`.
    pub fn to_text(&self) -> String {
        let mut header = vec!["classifier".to_string(), "method".to_string()];
        header.extend(self.datasets.iter().cloned());
        let mut lines = vec![header];
        for r in &self.rows {
            let mut line = vec![r.classifier.clone(), r.method.clone()];
            line.extend(r.cells.iter().map(|c| {
                let mark = if c.best {
                    "*"
                } else if c.worst {
                    "_"
                } else {
                    " "
                };
                format!("{}{mark}", fmt_mean(c.mean))
            }));
            lines.push(line);
        }
        let widths: Vec<usize> = (0..lines[0].len())
            .map(|j| {
                lines
                    .iter()
                    .map(|l| l[j].chars().count())
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut out = format!("Averages of {}\n", self.metric);
        for line in &lines {
            let cells: Vec<String> = line
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(j, (s, w))| {
                    if j < 2 {
                        format!("{s:<w$}")
                    } else {
                        format!("{s:>w$}")
                    }
                })
                .collect();
            out.push_str(cells.join("  ").trim_end());
            out.push('\n');
        }
        out
    }

    /// Long-format CSV: `metric,classifier,method,dataset,mean,na_folds,best,worst`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,classifier,method,dataset,mean,na_folds,best,worst\n");
        for r in &self.rows {
            for (d, c) in self.datasets.iter().zip(&r.cells) {
                let mean = c.mean.map_or_else(|| "NA".into(), |v| v.to_string());
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    self.metric, r.classifier, r.method, d, mean, c.na_count, c.best, c.worst
                );
            }
        }
        out
    }
}

/// What is paired in the Wilcoxon tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pairing {
    /// One pair per dataset: means over folds and repeats.
    Dataset,
    /// One pair per (dataset, repeat, fold).
    Fold,
}

/// Whether a test compares raw scores or per-unit ranks among all methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Score,
    Rank,
}

/// Baseline against one competitor for one classifier and metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub classifier: String,
    pub metric: Metric,
    pub method: String,
    pub measure: Measure,
    pub n_pairs: usize,
    /// P-value for "baseline is better"; `None` when untestable.
    pub p_better: Option<f64>,
    /// P-value for "baseline is worse".
    pub p_worse: Option<f64>,
    /// `'+'` when the baseline is significantly better, `'-'` when worse.
    pub sign: Option<char>,
    /// 1, 2 or 3 for p below 0.05, 0.01, 0.001.
    pub strength: usize,
}

impl ComparisonRow {
    pub fn testable(&self) -> bool {
        self.p_better.is_some()
    }

    /// `+`, `++`, `---` and so on; empty when not significant.
    pub fn marks(&self) -> String {
        self.sign
            .map_or_else(String::new, |s| s.to_string().repeat(self.strength))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub baseline: String,
    pub pairing: Pairing,
    pub rows: Vec<ComparisonRow>,
}

/// Fewest pairs for which a test is attempted.
pub const MIN_PAIRS: usize = 2;

type UnitKey = (String, usize, usize);

/// Per-unit values of one classifier and metric, keyed by method.
fn unit_values(
    results: &[RunResult],
    classifier: &str,
    metric: Metric,
    pairing: Pairing,
) -> BTreeMap<UnitKey, BTreeMap<String, Option<f64>>> {
    let mut raw: BTreeMap<UnitKey, BTreeMap<String, Vec<Option<f64>>>> = BTreeMap::new();
    for r in results.iter().filter(|r| r.classifier == classifier) {
        let key = match pairing {
            Pairing::Dataset => (r.dataset.clone(), 0, 0),
            Pairing::Fold => (r.dataset.clone(), r.repeat, r.fold),
        };
        raw.entry(key)
            .or_default()
            .entry(r.method.clone())
            .or_default()
            .push(r.metrics.get(metric));
    }
    raw.into_iter()
        .map(|(k, per_method)| {
            let means = per_method
                .into_iter()
                .map(|(m, v)| (m, mean_skip_na(&v).0))
                .collect();
            (k, means)
        })
        .collect()
}

fn test_pairs(x: &[f64], y: &[f64]) -> (Option<f64>, Option<f64>) {
    if x.len() < MIN_PAIRS {
        return (None, None);
    }
    let better = wilcoxon_signed_rank(x, y, Alternative::Greater)
        .ok()
        .map(|r| r.p_one_sided);
    let worse = wilcoxon_signed_rank(x, y, Alternative::Less)
        .ok()
        .map(|r| r.p_one_sided);
    match (better, worse) {
        (Some(b), Some(w)) => (Some(b), Some(w)),
        _ => (None, None),
    }
}

fn signed(p_better: Option<f64>, p_worse: Option<f64>) -> (Option<char>, usize) {
    let strength = |p: f64| significance_stars(p).len();
    match (p_better, p_worse) {
        (Some(b), _) if strength(b) > 0 => (Some('+'), strength(b)),
        (_, Some(w)) if strength(w) > 0 => (Some('-'), strength(w)),
        _ => (None, 0),
    }
}

/// Paired one-sided Wilcoxon tests of `baseline` against every other method,
/// in both directions, on scores and on ranks, for accuracy and F1 (or the
/// given metrics). Ranks are computed per pairing unit among all methods
/// present there, NA ranking last; a better rank counts as "better".
pub fn compare(
    results: &[RunResult],
    baseline: &str,
    metrics: &[Metric],
    pairing: Pairing,
) -> ComparisonReport {
    let keys = row_keys(results);
    let mut classifiers: Vec<String> = keys.iter().map(|k| k.0.clone()).collect();
    classifiers.dedup();
    let mut methods: Vec<String> = keys.iter().map(|k| k.1.clone()).collect();
    methods.sort_by_key(|m| (method_rank(m), m.clone()));
    methods.dedup();
    let mut rows = Vec::new();
    for classifier in &classifiers {
        for &metric in metrics {
            let units = unit_values(results, classifier, metric, pairing);
            for method in methods.iter().filter(|m| *m != baseline) {
                let mut score_x = Vec::new();
                let mut score_y = Vec::new();
                let mut rank_x = Vec::new();
                let mut rank_y = Vec::new();
                for per_method in units.values() {
                    let (Some(b), Some(o)) = (per_method.get(baseline), per_method.get(method))
                    else {
                        continue;
                    };
                    let names: Vec<&String> = per_method.keys().collect();
                    let values: Vec<Option<f64>> = per_method.values().copied().collect();
                    let ranks = rank_methods(&values);
                    let at = |name: &str| names.iter().position(|n| *n == name).expect("present");
                    // negated so that a better (smaller) rank is larger
                    rank_x.push(-ranks[at(baseline)]);
                    rank_y.push(-ranks[at(method)]);
                    if let (Some(b), Some(o)) = (b, o) {
                        score_x.push(*b);
                        score_y.push(*o);
                    }
                }
                for (measure, x, y) in [
                    (Measure::Score, &score_x, &score_y),
                    (Measure::Rank, &rank_x, &rank_y),
                ] {
                    let (p_better, p_worse) = test_pairs(x, y);
                    let (sign, strength) = signed(p_better, p_worse);
                    rows.push(ComparisonRow {
                        classifier: classifier.clone(),
                        metric,
                        method: method.clone(),
                        measure,
                        n_pairs: x.len(),
                        p_better,
                        p_worse,
                        sign,
                        strength,
                    });
                }
            }
        }
    }
    ComparisonReport {
        baseline: baseline.to_string(),
        pairing,
        rows,
    }
}

impl ComparisonReport {
    pub fn to_text(&self) -> String {
        let fmt_p = |p: Option<f64>| p.map_or_else(|| "untestable".into(), |v| format!("{v:.4}"));
        let mut out = format!(
            "{} against each method ({:?} pairing)\n",
            self.baseline, self.pairing
        );
        let _ = writeln!(
            out,
            "{:<10} {:<9} {:<8} {:<6} {:>5} {:>10} {:>10}  marks",
            "classifier", "metric", "method", "on", "pairs", "p_better", "p_worse"
        );
        for r in &self.rows {
            let on = match r.measure {
                Measure::Score => "score",
                Measure::Rank => "rank",
            };
            let _ = writeln!(
                out,
                "{:<10} {:<9} {:<8} {:<6} {:>5} {:>10} {:>10}  {}",
                r.classifier,
                r.metric.name(),
                r.method,
                on,
                r.n_pairs,
                fmt_p(r.p_better),
                fmt_p(r.p_worse),
                r.marks()
            );
        }
        out
    }
}
