//! The three benchmark classifiers behind a common fit/score interface.
//!
//! Scores are oriented so that larger means "more likely positive": leaf
//! proportions for CART, probabilities for logistic regression and raw
//! decision values for the SVM.

mod cart;
mod logistic;
mod svm;

pub use cart::{cart_fit, cart_score, CartConfig, CartModel, Node};
pub use logistic::{
    logreg_fit, logreg_score, penalized_gradient, penalized_nll, LogisticConfig, LogisticModel,
};
pub use svm::{svm_fit, svm_score, FeatureScaler, SvmConfig, SvmModel};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::numcore::Matrix;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearnerConfig {
    pub cart: CartConfig,
    pub logreg: LogisticConfig,
    pub svm: SvmConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClassifierKind {
    #[serde(rename = "CART")]
    Cart,
    #[serde(rename = "LR")]
    Logistic,
    #[serde(rename = "SVM")]
    Svm,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 3] = [
        ClassifierKind::Cart,
        ClassifierKind::Logistic,
        ClassifierKind::Svm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::Cart => "CART",
            ClassifierKind::Logistic => "LR",
            ClassifierKind::Svm => "SVM",
        }
    }

    pub fn from_name(name: &str) -> Option<ClassifierKind> {
        ClassifierKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(name))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Classifier {
    Cart(CartModel),
    Logistic(LogisticModel),
    Svm(SvmModel),
}

impl Classifier {
    pub fn fit(kind: ClassifierKind, x: &Matrix, y: &[bool], cfg: &LearnerConfig) -> Result<Self> {
        Ok(match kind {
            ClassifierKind::Cart => Classifier::Cart(cart_fit(x, y, &cfg.cart)?),
            ClassifierKind::Logistic => Classifier::Logistic(logreg_fit(x, y, &cfg.logreg)?),
            ClassifierKind::Svm => Classifier::Svm(svm_fit(x, y, &cfg.svm)?),
        })
    }

    pub fn kind(&self) -> ClassifierKind {
        match self {
            Classifier::Cart(_) => ClassifierKind::Cart,
            Classifier::Logistic(_) => ClassifierKind::Logistic,
            Classifier::Svm(_) => ClassifierKind::Svm,
        }
    }

    pub fn score(&self, x: &[f64]) -> Result<f64> {
        match self {
            Classifier::Cart(m) => cart_score(m, x),
            Classifier::Logistic(m) => logreg_score(m, x),
            Classifier::Svm(m) => svm_score(m, x),
        }
    }

    /// Score at which the predicted label switches to positive (exclusive).
    pub fn decision_threshold(&self) -> f64 {
        match self {
            Classifier::Svm(_) => 0.0,
            _ => 0.5,
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<bool> {
        Ok(self.score(x)? > self.decision_threshold())
    }

    pub fn score_rows(&self, x: &Matrix) -> Result<Vec<f64>> {
        x.rows().map(|r| self.score(r)).collect()
    }
}
