//! Experiment description, read from JSON.
//!
//! ```json
//! {
//!   "datasets": [{"surrogate": {"name": "pima"}}, {"keel": "data/pima.dat"}],
//!   "methods": ["Original", "SMOTE", {"GMOTE": {"policy": {"alpha": 0.1}}}],
//!   "classifiers": ["CART", "LR", "SVM"],
//!   "folds": 5,
//!   "repeats": 1,
//!   "seed": 42,
//!   "output": "results.csv"
//! }
//! ```
//!
//! Optional keys: `sampling` (`{"ratio": 1.0}` or `"balance"`), `learners`
//! (classifier settings) and `normalize` (per-method override of the (0,1)
//! scaling rule, e.g. `{"GMOTE": true}`). Unknown keys are rejected.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use gmote_core::gmote::GmoteConfig;
use gmote_core::learners::{ClassifierKind, LearnerConfig};
use gmote_core::resamplers::ResamplerParams;
use serde::{Deserialize, Serialize};

use crate::dataset::{self, DatasetRecord};
use crate::error::{io_error, HarnessError, Result};

/// Method names in report order.
pub const METHOD_ORDER: [&str; 9] = [
    "Original", "ROS", "SMOTE", "BLSMOTE", "SLSMOTE", "DBSMOTE", "C-SMOTE", "RBO", "GMOTE",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSource {
    Keel(PathBuf),
    Csv {
        path: PathBuf,
        label_column: String,
        #[serde(default)]
        positive_label: Option<String>,
    },
    Toy {
        which: u8,
        #[serde(default)]
        seed: u64,
    },
    /// Synthetic stand-in shaped like a benchmark dataset.
    Surrogate {
        name: String,
        #[serde(default)]
        seed: u64,
    },
}

impl DatasetSource {
    /// Relative paths resolve against `base`.
    pub fn load(&self, base: &Path) -> Result<DatasetRecord> {
        match self {
            DatasetSource::Keel(p) => dataset::load_keel(base.join(p)),
            DatasetSource::Csv {
                path,
                label_column,
                positive_label,
            } => dataset::load_csv(base.join(path), label_column, positive_label.as_deref()),
            DatasetSource::Toy { which: 1, seed } => Ok(dataset::toy_example1(*seed)),
            DatasetSource::Toy { which: 2, seed } => Ok(dataset::toy_example2(*seed)),
            DatasetSource::Toy { which, .. } => Err(HarnessError::Unknown {
                kind: "toy example",
                name: which.to_string(),
            }),
            DatasetSource::Surrogate { name, seed } => dataset::profile(name)
                .map(|p| dataset::surrogate(p, *seed))
                .ok_or_else(|| HarnessError::Unknown {
                    kind: "dataset profile",
                    name: name.clone(),
                }),
        }
    }
}

/// An oversampling method, or none.
#[derive(Debug, Clone, PartialEq)]
pub enum MethodSpec {
    Original,
    Baseline(ResamplerParams),
    /// `gamma` inside the config is ignored; the experiment's sampling rule
    /// sets the synthetic count for every method.
    Gmote(GmoteConfig),
}

impl MethodSpec {
    pub fn name(&self) -> &str {
        match self {
            MethodSpec::Original => "Original",
            MethodSpec::Baseline(p) => p.name(),
            MethodSpec::Gmote(_) => "GMOTE",
        }
    }

    pub fn from_name(name: &str) -> Result<MethodSpec> {
        match name {
            "Original" => Ok(MethodSpec::Original),
            "GMOTE" => Ok(MethodSpec::Gmote(GmoteConfig::default())),
            other => ResamplerParams::defaults_for(other)
                .map(MethodSpec::Baseline)
                .ok_or_else(|| HarnessError::Unknown {
                    kind: "method",
                    name: other.to_string(),
                }),
        }
    }

    /// The nine methods with default parameters.
    pub fn all_defaults() -> Vec<MethodSpec> {
        METHOD_ORDER
            .iter()
            .map(|n| MethodSpec::from_name(n).expect("known name"))
            .collect()
    }

    /// Whether training and test rows are (0,1)-scaled on the training range
    /// before resampling.
    pub fn normalizes_by_default(&self) -> bool {
        match self {
            MethodSpec::Baseline(p) => p.wants_normalization(),
            MethodSpec::Original | MethodSpec::Gmote(_) => false,
        }
    }
}

/// Position in [`METHOD_ORDER`]; unknown names sort last.
pub fn method_rank(name: &str) -> usize {
    METHOD_ORDER
        .iter()
        .position(|m| *m == name)
        .unwrap_or(METHOD_ORDER.len())
}

impl Serialize for MethodSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        match self {
            MethodSpec::Original => s.serialize_str("Original"),
            MethodSpec::Baseline(p) => p.serialize(s),
            MethodSpec::Gmote(cfg) => {
                let mut map = s.serialize_map(Some(1))?;
                map.serialize_entry("GMOTE", cfg)?;
                map.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for MethodSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let value = serde_json::Value::deserialize(d)?;
        match &value {
            serde_json::Value::String(name) => {
                MethodSpec::from_name(name).map_err(D::Error::custom)
            }
            serde_json::Value::Object(map) if map.len() == 1 => {
                let (key, inner) = map.iter().next().expect("one entry");
                match key.as_str() {
                    "Original" => Ok(MethodSpec::Original),
                    "GMOTE" => serde_json::from_value(inner.clone())
                        .map(MethodSpec::Gmote)
                        .map_err(D::Error::custom),
                    _ => serde_json::from_value(value.clone())
                        .map(MethodSpec::Baseline)
                        .map_err(D::Error::custom),
                }
            }
            _ => Err(D::Error::custom(
                "method must be a name or a single-key object",
            )),
        }
    }
}

/// How many synthetic rows each resampler produces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingRule {
    /// `ceil(ratio · minority count)`.
    Ratio(f64),
    /// Enough to match the majority count.
    Balance,
}

impl Default for SamplingRule {
    fn default() -> Self {
        SamplingRule::Ratio(1.0)
    }
}

impl SamplingRule {
    pub fn synthetic_count(&self, n_minority: usize, n_majority: usize) -> usize {
        match *self {
            SamplingRule::Ratio(g) => gmote_core::gmote::target_count(g, n_minority),
            SamplingRule::Balance => n_majority.saturating_sub(n_minority),
        }
    }
}

fn default_folds() -> usize {
    5
}

fn default_repeats() -> usize {
    1
}

fn default_classifiers() -> Vec<ClassifierKind> {
    ClassifierKind::ALL.to_vec()
}

fn default_output() -> PathBuf {
    PathBuf::from("results.csv")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub datasets: Vec<DatasetSource>,
    pub methods: Vec<MethodSpec>,
    #[serde(default = "default_classifiers")]
    pub classifiers: Vec<ClassifierKind>,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default)]
    pub sampling: SamplingRule,
    #[serde(default)]
    pub learners: LearnerConfig,
    #[serde(default)]
    pub normalize: BTreeMap<String, bool>,
}

impl ExperimentSpec {
    /// Every method and classifier with defaults on the given datasets.
    pub fn full(datasets: Vec<DatasetSource>, seed: u64) -> ExperimentSpec {
        ExperimentSpec {
            datasets,
            methods: MethodSpec::all_defaults(),
            classifiers: default_classifiers(),
            folds: default_folds(),
            repeats: default_repeats(),
            seed,
            output: default_output(),
            sampling: SamplingRule::default(),
            learners: LearnerConfig::default(),
            normalize: BTreeMap::new(),
        }
    }

    pub fn from_json(text: &str) -> Result<ExperimentSpec> {
        let spec: ExperimentSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<ExperimentSpec> {
        let path = path.as_ref();
        Self::from_json(&fs::read_to_string(path).map_err(io_error(path))?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.datasets.is_empty() {
            return Err(HarnessError::InvalidSpec("no datasets listed".into()));
        }
        self.validate_settings()
    }

    /// Everything [`ExperimentSpec::validate`] checks except the dataset
    /// list, for runs on datasets loaded elsewhere.
    pub fn validate_settings(&self) -> Result<()> {
        let fail = |msg: String| Err(HarnessError::InvalidSpec(msg));
        if self.methods.is_empty() || self.classifiers.is_empty() {
            return fail("methods and classifiers must be non-empty".into());
        }
        if self.folds < 2 {
            return fail(format!("folds = {} (need at least 2)", self.folds));
        }
        if self.repeats == 0 {
            return fail("repeats must be at least 1".into());
        }
        if let SamplingRule::Ratio(g) = self.sampling {
            if !(g >= 0.0 && g.is_finite()) {
                return fail(format!("sampling ratio {g}"));
            }
        }
        let mut names: Vec<&str> = self.methods.iter().map(MethodSpec::name).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return fail("a method is listed twice".into());
        }
        for key in self.normalize.keys() {
            if !self.methods.iter().any(|m| m.name() == key) {
                return fail(format!("normalize override for unlisted method {key}"));
            }
        }
        Ok(())
    }

    /// Methods as run: the listed ones plus `Original` if it was left out.
    pub fn effective_methods(&self) -> Vec<MethodSpec> {
        let mut methods = self.methods.clone();
        if !methods.iter().any(|m| matches!(m, MethodSpec::Original)) {
            methods.insert(0, MethodSpec::Original);
        }
        methods
    }

    pub fn normalizes(&self, method: &MethodSpec) -> bool {
        self.normalize
            .get(method.name())
            .copied()
            .unwrap_or_else(|| method.normalizes_by_default())
    }
}
