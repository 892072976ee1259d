//! Resampling laboratory for binary imbalanced classification.
//!
//! The centerpiece is [`gmote`]: a Gaussian mixture is fitted to the minority
//! class, instances whose Mahalanobis tail probability falls below a cut-off
//! under every component are dropped, the mixture is refitted, and synthetic
//! minority rows are drawn from it by rejection sampling so that no generated
//! row is itself an outlier.
//!
//! Around it sit the pieces needed to benchmark the method:
//!
//! - [`numcore`]: dense matrices, Cholesky factors, multivariate normal
//!   primitives, chi-square and F tail functions, seeded random streams.
//! - [`gmm`]: EM fitting with restarts and BIC model selection.
//! - [`outlier`]: per-component tail probabilities and local-outlier flags.
//! - [`resamplers`]: ROS, SMOTE, Borderline-SMOTE, Safe-level SMOTE, DBSMOTE,
//!   Cluster-SMOTE and RBO, plus k-means, DBSCAN and nearest-neighbour helpers.
//! - [`learners`]: CART, logistic regression and an RBF soft-margin SVM.
//! - [`evalstats`]: confusion metrics, AUC, min-max scaling, stratified folds,
//!   Wilcoxon signed-rank tests and method ranking.

// `!(x > 0.0)` style guards are used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod evalstats;
pub mod gmm;
pub mod gmote;
pub mod learners;
pub mod numcore;
pub mod outlier;
pub mod resamplers;

pub use error::{Error, Result};
pub use numcore::{Matrix, RngStream};
