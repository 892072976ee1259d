//! Cross-validated benchmark runner.
//!
//! Work is split into units of (dataset, repeat, fold, method). A unit
//! normalizes if its method asks for it, oversamples the training minority
//! once, then trains and scores every classifier on that augmented set. Each
//! unit draws from its own stream labelled `dataset|method|repeat|fold`, so
//! results do not depend on scheduling.

use std::collections::HashSet;
use std::path::Path;

use gmote_core::evalstats::{
    auc, confusion, metrics_from_counts, stratified_kfold, FoldPlan, MinMaxScaler,
};
use gmote_core::gmote::{generate_count, gmote_fit};
use gmote_core::learners::{Classifier, ClassifierKind, LearnerConfig};
use gmote_core::resamplers::oversample;
use gmote_core::{Matrix, RngStream};
use rand::RngCore;
use rayon::prelude::*;

use crate::config::{ExperimentSpec, MethodSpec, SamplingRule};
use crate::dataset::DatasetRecord;
use crate::error::{HarnessError, Result};
use crate::results::{MetricValues, RunResult};

/// Training and test data of one unit after normalization and oversampling.
#[derive(Debug, Clone)]
pub struct PreparedFold {
    pub repeat: usize,
    pub fold: usize,
    /// Original training rows first, synthetic rows after them.
    pub train_x: Matrix,
    pub train_y: Vec<bool>,
    pub test_x: Matrix,
    pub test_y: Vec<bool>,
    /// Dataset row index of every original training row.
    pub train_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
    pub n_synth: usize,
    pub n_outliers: usize,
    pub fallback: Option<String>,
}

impl PreparedFold {
    pub fn n_original_train(&self) -> usize {
        self.train_rows.len()
    }

    pub fn synthetic_rows(&self) -> Matrix {
        let idx: Vec<usize> = (self.n_original_train()..self.train_x.n_rows()).collect();
        self.train_x.select_rows(&idx)
    }
}

/// Fold assignment for one dataset and repeat.
pub fn fold_plan(
    data: &DatasetRecord,
    folds: usize,
    master_seed: u64,
    repeat: usize,
) -> Result<FoldPlan> {
    let seed = RngStream::new(master_seed, format!("{}|folds|{repeat}", data.name)).next_u64();
    Ok(stratified_kfold(&data.y, folds, seed)?)
}

/// Stream owned by one unit.
pub fn unit_stream(
    master_seed: u64,
    dataset: &str,
    method: &str,
    repeat: usize,
    fold: usize,
) -> RngStream {
    RngStream::new(master_seed, format!("{dataset}|{method}|{repeat}|{fold}"))
}

/// Splits, optionally normalizes on the training range, and appends
/// synthetic minority rows to the training part.
#[allow(clippy::too_many_arguments)]
pub fn prepare_fold(
    data: &DatasetRecord,
    plan: &FoldPlan,
    repeat: usize,
    fold: usize,
    method: &MethodSpec,
    normalize: bool,
    sampling: SamplingRule,
    rng: &mut RngStream,
) -> Result<PreparedFold> {
    let train_rows = plan.train_indices(fold);
    let test_rows = plan.test_indices(fold);
    let mut train_x = data.x.select_rows(&train_rows);
    let mut test_x = data.x.select_rows(&test_rows);
    if normalize {
        let scaler = MinMaxScaler::fit(&train_x)?;
        train_x = scaler.apply(&train_x)?;
        test_x = scaler.apply(&test_x)?;
    }
    let train_y: Vec<bool> = train_rows.iter().map(|&i| data.y[i]).collect();
    let test_y = test_rows.iter().map(|&i| data.y[i]).collect();
    let min_idx: Vec<usize> = (0..train_y.len()).filter(|&i| train_y[i]).collect();
    let maj_idx: Vec<usize> = (0..train_y.len()).filter(|&i| !train_y[i]).collect();
    let x_min = train_x.select_rows(&min_idx);
    let x_maj = train_x.select_rows(&maj_idx);
    let target = sampling.synthetic_count(min_idx.len(), maj_idx.len());
    let mut n_outliers = 0;
    let mut fallback = None;
    let synthetic = match method {
        MethodSpec::Original => Matrix::with_cols(train_x.n_cols()),
        MethodSpec::Baseline(params) => {
            let out = oversample(params, &x_min, &x_maj, target, rng)?;
            fallback = out.fallback.map(|f| f.as_str().to_string());
            out.rows
        }
        MethodSpec::Gmote(cfg) => {
            let mut cfg = cfg.clone();
            cfg.seed = rng.next_u64();
            let model = gmote_fit(&x_min, &cfg)?;
            n_outliers = model.outlier_report.n_flagged();
            if model.all_flagged_fallback {
                fallback = Some("all_flagged".into());
            }
            generate_count(&model, target, &cfg)?.instances
        }
    };
    let n_synth = synthetic.n_rows();
    let train_x = train_x.vstack(&synthetic)?;
    let mut train_y = train_y;
    train_y.extend(std::iter::repeat_n(true, n_synth));
    Ok(PreparedFold {
        repeat,
        fold,
        train_x,
        train_y,
        test_x,
        test_y,
        train_rows,
        test_rows,
        n_synth,
        n_outliers,
        fallback,
    })
}

/// Fits `kind` on the prepared training data and scores the test part.
pub fn evaluate(
    prepared: &PreparedFold,
    kind: ClassifierKind,
    learners: &LearnerConfig,
) -> Result<MetricValues> {
    let model = Classifier::fit(kind, &prepared.train_x, &prepared.train_y, learners)?;
    let scores = model.score_rows(&prepared.test_x)?;
    let threshold = model.decision_threshold();
    let predicted: Vec<bool> = scores.iter().map(|&s| s > threshold).collect();
    let metrics = metrics_from_counts(confusion(&prepared.test_y, &predicted)?)?;
    let mut values = MetricValues::from(metrics);
    values.auc = auc(&scores, &prepared.test_y).ok();
    Ok(values)
}

struct Unit<'a> {
    data: &'a DatasetRecord,
    dataset_idx: usize,
    plan: &'a FoldPlan,
    repeat: usize,
    fold: usize,
    method: &'a MethodSpec,
    method_idx: usize,
}

fn run_unit(spec: &ExperimentSpec, unit: &Unit) -> Vec<(usize, usize, usize, RunResult)> {
    let method_name = unit.method.name();
    let mut rng = unit_stream(
        spec.seed,
        &unit.data.name,
        method_name,
        unit.repeat,
        unit.fold,
    );
    let prepared = prepare_fold(
        unit.data,
        unit.plan,
        unit.repeat,
        unit.fold,
        unit.method,
        spec.normalizes(unit.method),
        spec.sampling,
        &mut rng,
    );
    spec.classifiers
        .iter()
        .enumerate()
        .map(|(ci, &kind)| {
            let mut row = RunResult {
                dataset: unit.data.name.clone(),
                method: method_name.to_string(),
                classifier: kind.name().to_string(),
                repeat: unit.repeat,
                fold: unit.fold,
                metrics: MetricValues::default(),
                n_synth: 0,
                n_outliers: 0,
                fallback: None,
            };
            match &prepared {
                Ok(p) => {
                    row.n_synth = p.n_synth;
                    row.n_outliers = p.n_outliers;
                    row.fallback = p.fallback.clone();
                    match evaluate(p, kind, &spec.learners) {
                        Ok(m) => row.metrics = m,
                        Err(e) => row.fallback = Some(format!("error: {e}")),
                    }
                }
                Err(e) => row.fallback = Some(format!("error: {e}")),
            }
            (unit.dataset_idx, unit.method_idx, ci, row)
        })
        .collect()
}

/// Runs every (dataset, method, classifier, repeat, fold) cell on loaded
/// datasets; `spec.datasets` is ignored. Rows come back ordered by dataset and method as listed, then
/// classifier, repeat and fold. Failures inside a cell become rows with NA
/// metrics and an `error: …` fallback note.
pub fn run_on_datasets(
    spec: &ExperimentSpec,
    datasets: &[DatasetRecord],
) -> Result<Vec<RunResult>> {
    spec.validate_settings()?;
    if datasets.is_empty() {
        return Err(HarnessError::InvalidSpec("no datasets given".into()));
    }
    let mut seen = HashSet::new();
    for d in datasets {
        if !seen.insert(d.name.as_str()) {
            return Err(HarnessError::InvalidSpec(format!(
                "dataset name {} used twice",
                d.name
            )));
        }
    }
    let methods = spec.effective_methods();
    let mut plans = Vec::new();
    for (di, data) in datasets.iter().enumerate() {
        for repeat in 0..spec.repeats {
            plans.push((di, repeat, fold_plan(data, spec.folds, spec.seed, repeat)?));
        }
    }
    let mut units = Vec::new();
    for (di, repeat, plan) in &plans {
        for fold in 0..spec.folds {
            for (mi, method) in methods.iter().enumerate() {
                units.push(Unit {
                    data: &datasets[*di],
                    dataset_idx: *di,
                    plan,
                    repeat: *repeat,
                    fold,
                    method,
                    method_idx: mi,
                });
            }
        }
    }
    let mut rows: Vec<(usize, usize, usize, RunResult)> = units
        .par_iter()
        .flat_map_iter(|u| run_unit(spec, u))
        .collect();
    rows.sort_by_key(|(d, m, c, r)| (*d, *m, *c, r.repeat, r.fold));
    Ok(rows.into_iter().map(|(_, _, _, r)| r).collect())
}

/// Loads the spec's datasets (relative paths against `base_dir`) and runs it.
pub fn run_experiment(spec: &ExperimentSpec, base_dir: &Path) -> Result<Vec<RunResult>> {
    let datasets = spec
        .datasets
        .iter()
        .map(|s| s.load(base_dir))
        .collect::<Result<Vec<_>>>()?;
    run_on_datasets(spec, &datasets)
}
