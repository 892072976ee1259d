//! Baseline oversamplers behind one interface, plus the clustering and
//! neighbor utilities they rely on.
//!
//! Every method takes the minority rows, the majority rows, a target count
//! and a random stream, and returns exactly that many synthetic minority rows
//! together with per-row provenance (which input rows and which interpolation
//! gap produced each output). Provenance is what lets tests verify geometric
//! claims such as segment membership after the fact.

mod cluster;
mod dbsmote;
mod interpolation;
mod neighbors;
mod rbo;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numcore::{Matrix, RngStream};

pub use cluster::{dbscan, kmeans, kmeans_pp_seeds, ClusterAssignment, NOISE};
pub use dbsmote::{dbsmote, third_quartile_knn_distance, EpsRule};
pub use interpolation::{
    borderline_labels, borderline_smote, cluster_smote, largest_remainder, ros, safe_level_smote,
    safe_levels, smote, BorderlineLabel,
};
pub use neighbors::{knn_index, knn_within, NeighborIndex, SelfMatch};
pub use rbo::{mutual_potential, rbo};

/// How one synthetic row was produced. Indices refer to rows of the minority
/// input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Provenance {
    /// Exact copy of a minority row.
    Copy { source: usize },
    /// `x_from + gap·(x_to − x_from)`.
    Segment { from: usize, to: usize, gap: f64 },
    /// End point of a potential-descending random walk started at `start`.
    Walk {
        start: usize,
        start_potential: f64,
        end_potential: f64,
    },
}

/// Degraded-mode markers: the method could not run as specified and fell
/// back to plain SMOTE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fallback {
    NoDangerPoints,
    NoClusters,
    NoSafePairs,
}

impl Fallback {
    pub fn as_str(&self) -> &'static str {
        match self {
            Fallback::NoDangerPoints => "no_danger_points",
            Fallback::NoClusters => "no_clusters",
            Fallback::NoSafePairs => "no_safe_pairs",
        }
    }
}

/// Output of an oversampler.
#[derive(Debug, Clone, PartialEq)]
pub struct Oversampled {
    pub rows: Matrix,
    pub provenance: Vec<Provenance>,
    pub fallback: Option<Fallback>,
    /// Borderline-SMOTE's noise/danger/safe label per minority row.
    pub borderline_labels: Option<Vec<BorderlineLabel>>,
}

impl Oversampled {
    pub(crate) fn empty(cols: usize) -> Self {
        Oversampled {
            rows: Matrix::with_cols(cols),
            provenance: Vec::new(),
            fallback: None,
            borderline_labels: None,
        }
    }

    pub fn len(&self) -> usize {
        self.rows.n_rows()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmoteParams {
    pub k: usize,
}

impl Default for SmoteParams {
    fn default() -> Self {
        SmoteParams { k: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BorderlineParams {
    pub k: usize,
    pub c: usize,
}

impl Default for BorderlineParams {
    fn default() -> Self {
        BorderlineParams { k: 3, c: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SafeLevelParams {
    pub k: usize,
    pub c: usize,
}

impl Default for SafeLevelParams {
    fn default() -> Self {
        SafeLevelParams { k: 5, c: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DbsmoteParams {
    pub min_pts: usize,
    pub eps: EpsRule,
}

impl Default for DbsmoteParams {
    fn default() -> Self {
        DbsmoteParams {
            min_pts: 4,
            eps: EpsRule::ThirdQuartileOfKthNeighbor { k: 5 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterSmoteParams {
    pub clusters: usize,
    pub k: usize,
}

impl Default for ClusterSmoteParams {
    fn default() -> Self {
        ClusterSmoteParams { clusters: 3, k: 3 }
    }
}

/// `p` is accepted for configuration parity and not used by the walk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RboParams {
    pub gamma: f64,
    pub iterations: usize,
    pub step: f64,
    pub p: f64,
}

impl Default for RboParams {
    fn default() -> Self {
        RboParams {
            gamma: 1.0,
            iterations: 50,
            step: 0.05,
            p: 0.05,
        }
    }
}

/// A baseline oversampler and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ResamplerParams {
    #[serde(rename = "ROS")]
    Ros,
    #[serde(rename = "SMOTE")]
    Smote(SmoteParams),
    #[serde(rename = "BLSMOTE")]
    BorderlineSmote(BorderlineParams),
    #[serde(rename = "SLSMOTE")]
    SafeLevelSmote(SafeLevelParams),
    #[serde(rename = "DBSMOTE")]
    DbSmote(DbsmoteParams),
    #[serde(rename = "C-SMOTE")]
    ClusterSmote(ClusterSmoteParams),
    #[serde(rename = "RBO")]
    Rbo(RboParams),
}

impl ResamplerParams {
    pub fn name(&self) -> &'static str {
        match self {
            ResamplerParams::Ros => "ROS",
            ResamplerParams::Smote(_) => "SMOTE",
            ResamplerParams::BorderlineSmote(_) => "BLSMOTE",
            ResamplerParams::SafeLevelSmote(_) => "SLSMOTE",
            ResamplerParams::DbSmote(_) => "DBSMOTE",
            ResamplerParams::ClusterSmote(_) => "C-SMOTE",
            ResamplerParams::Rbo(_) => "RBO",
        }
    }

    /// Default parameters for a method name, or `None` if unknown.
    pub fn defaults_for(name: &str) -> Option<Self> {
        Some(match name {
            "ROS" => ResamplerParams::Ros,
            "SMOTE" => ResamplerParams::Smote(SmoteParams::default()),
            "BLSMOTE" => ResamplerParams::BorderlineSmote(BorderlineParams::default()),
            "SLSMOTE" => ResamplerParams::SafeLevelSmote(SafeLevelParams::default()),
            "DBSMOTE" => ResamplerParams::DbSmote(DbsmoteParams::default()),
            "C-SMOTE" => ResamplerParams::ClusterSmote(ClusterSmoteParams::default()),
            "RBO" => ResamplerParams::Rbo(RboParams::default()),
            _ => return None,
        })
    }

    /// Whether the method expects (0,1)-normalized inputs.
    pub fn wants_normalization(&self) -> bool {
        !matches!(self, ResamplerParams::Ros | ResamplerParams::Rbo(_))
    }
}

/// Runs the configured oversampler.
pub fn oversample(
    params: &ResamplerParams,
    x_min: &Matrix,
    x_maj: &Matrix,
    n_synth: usize,
    rng: &mut RngStream,
) -> Result<Oversampled> {
    match params {
        ResamplerParams::Ros => ros(x_min, n_synth, rng),
        ResamplerParams::Smote(p) => smote(x_min, p.k, n_synth, rng),
        ResamplerParams::BorderlineSmote(p) => {
            borderline_smote(x_min, x_maj, p.k, p.c, n_synth, rng)
        }
        ResamplerParams::SafeLevelSmote(p) => {
            safe_level_smote(x_min, x_maj, p.k, p.c, n_synth, rng)
        }
        ResamplerParams::DbSmote(p) => dbsmote(x_min, p.min_pts, p.eps, n_synth, rng),
        ResamplerParams::ClusterSmote(p) => cluster_smote(x_min, p.clusters, p.k, n_synth, rng),
        ResamplerParams::Rbo(p) => rbo(x_min, x_maj, p, n_synth, rng),
    }
}

pub(crate) fn require_minority(x_min: &Matrix, need: usize) -> Result<()> {
    if x_min.n_rows() < need {
        return Err(Error::TooFewMinority {
            got: x_min.n_rows(),
            need,
        });
    }
    Ok(())
}

pub(crate) fn check_same_width(x_min: &Matrix, x_maj: &Matrix) -> Result<()> {
    if !x_maj.is_empty() && x_maj.n_cols() != x_min.n_cols() {
        return Err(Error::DimensionMismatch {
            expected: x_min.n_cols(),
            got: x_maj.n_cols(),
        });
    }
    Ok(())
}
