//! Benchmark harness around `gmote_core`: dataset loading, cross-validated
//! experiment runs, result files and report tables.

pub mod config;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod report;
pub mod results;

pub use config::{DatasetSource, ExperimentSpec, MethodSpec, SamplingRule};
pub use dataset::DatasetRecord;
pub use error::{HarnessError, Result};
pub use experiment::{run_experiment, run_on_datasets};
pub use results::{Metric, MetricValues, RunResult};
