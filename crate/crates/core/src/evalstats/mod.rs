//! Evaluation metrics, cross-validation folds and paired significance tests.

mod folds;
mod metrics;
mod ranks;
mod wilcoxon;

pub use folds::{stratified_kfold, FoldPlan};
pub use metrics::{
    auc, confusion, mean_skip_na, metrics_from_counts, ConfusionCounts, MetricSet, MinMaxScaler,
};
pub use ranks::{average_ranks, rank_methods};
pub use wilcoxon::{
    significance_stars, wilcoxon_signed_rank, Alternative, WilcoxonMethod, WilcoxonResult,
    EXACT_MAX_N,
};
