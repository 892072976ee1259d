//! Per-cell result rows and their CSV form.
//!
//! Columns: `dataset,method,classifier,repeat,fold,accuracy,precision,recall,
//! f1,gmean,auc,n_synth,n_outliers,fallback`. Missing metrics are written as
//! `NA`, and `fallback` is `none` when nothing degraded.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use gmote_core::evalstats::MetricSet;
use serde::{Deserialize, Serialize};

use crate::error::{io_error, HarnessError, Result};

pub const RESULT_COLUMNS: [&str; 14] = [
    "dataset",
    "method",
    "classifier",
    "repeat",
    "fold",
    "accuracy",
    "precision",
    "recall",
    "f1",
    "gmean",
    "auc",
    "n_synth",
    "n_outliers",
    "fallback",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Accuracy,
    Precision,
    Recall,
    F1,
    Gmean,
    Auc,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::Accuracy,
        Metric::Precision,
        Metric::Recall,
        Metric::F1,
        Metric::Gmean,
        Metric::Auc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Accuracy => "accuracy",
            Metric::Precision => "precision",
            Metric::Recall => "recall",
            Metric::F1 => "f1",
            Metric::Gmean => "gmean",
            Metric::Auc => "auc",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Metric> {
        let lower = s.to_ascii_lowercase();
        let key = match lower.as_str() {
            "f1-score" | "f1score" => "f1",
            "g-mean" => "gmean",
            other => other,
        };
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == key)
            .ok_or_else(|| HarnessError::Unknown {
                kind: "metric",
                name: s.to_string(),
            })
    }
}

/// Metric values of one cell; `None` is NA.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricValues {
    pub accuracy: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub gmean: Option<f64>,
    pub auc: Option<f64>,
}

impl MetricValues {
    pub fn get(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::Accuracy => self.accuracy,
            Metric::Precision => self.precision,
            Metric::Recall => self.recall,
            Metric::F1 => self.f1,
            Metric::Gmean => self.gmean,
            Metric::Auc => self.auc,
        }
    }
}

impl From<MetricSet> for MetricValues {
    fn from(m: MetricSet) -> Self {
        MetricValues {
            accuracy: Some(m.accuracy),
            precision: m.precision,
            recall: Some(m.recall),
            f1: m.f1,
            gmean: Some(m.gmean),
            auc: m.auc,
        }
    }
}

/// One (dataset, method, classifier, repeat, fold) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub dataset: String,
    pub method: String,
    pub classifier: String,
    pub repeat: usize,
    pub fold: usize,
    pub metrics: MetricValues,
    pub n_synth: usize,
    pub n_outliers: usize,
    pub fallback: Option<String>,
}

fn fmt_value(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

fn parse_value(s: &str) -> std::result::Result<Option<f64>, String> {
    if s == "NA" {
        return Ok(None);
    }
    s.parse::<f64>()
        .map(Some)
        .map_err(|_| format!("bad number `{s}`"))
}

/// Serializes rows in the given order.
pub fn results_to_csv(rows: &[RunResult]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(RESULT_COLUMNS)?;
    for r in rows {
        let m = &r.metrics;
        w.write_record([
            r.dataset.clone(),
            r.method.clone(),
            r.classifier.clone(),
            r.repeat.to_string(),
            r.fold.to_string(),
            fmt_value(m.accuracy),
            fmt_value(m.precision),
            fmt_value(m.recall),
            fmt_value(m.f1),
            fmt_value(m.gmean),
            fmt_value(m.auc),
            r.n_synth.to_string(),
            r.n_outliers.to_string(),
            r.fallback.clone().unwrap_or_else(|| "none".into()),
        ])?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| HarnessError::InvalidSpec(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("utf-8 fields"))
}

pub fn write_results(path: impl AsRef<Path>, rows: &[RunResult]) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_error(dir))?;
    }
    fs::write(path, results_to_csv(rows)?).map_err(io_error(path))
}

pub fn parse_results(text: &str) -> Result<Vec<RunResult>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    if headers.iter().ne(RESULT_COLUMNS) {
        return Err(HarnessError::InvalidSpec(format!(
            "results header {:?} does not match the expected columns",
            headers.iter().collect::<Vec<_>>()
        )));
    }
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let bad =
            |msg: String| HarnessError::InvalidSpec(format!("results row {}: {msg}", line + 1));
        let count = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| bad(format!("bad count `{s}`")))
        };
        let value = |s: &str| parse_value(s).map_err(bad);
        rows.push(RunResult {
            dataset: record[0].to_string(),
            method: record[1].to_string(),
            classifier: record[2].to_string(),
            repeat: count(&record[3])?,
            fold: count(&record[4])?,
            metrics: MetricValues {
                accuracy: value(&record[5])?,
                precision: value(&record[6])?,
                recall: value(&record[7])?,
                f1: value(&record[8])?,
                gmean: value(&record[9])?,
                auc: value(&record[10])?,
            },
            n_synth: count(&record[11])?,
            n_outliers: count(&record[12])?,
            fallback: Some(record[13].to_string()).filter(|f| f != "none"),
        });
    }
    Ok(rows)
}

pub fn read_results(path: impl AsRef<Path>) -> Result<Vec<RunResult>> {
    let path = path.as_ref();
    parse_results(&fs::read_to_string(path).map_err(io_error(path))?)
}
