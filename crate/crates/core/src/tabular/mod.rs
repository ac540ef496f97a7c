//! Feature-based classifiers: logistic regression, ridge classifier with
//! leave-one-out alpha search, k-nearest neighbors, and Gaussian naive
//! Bayes. All models are immutable after training and safe to use from
//! concurrent predictors.

mod dataset;
mod gnb;
mod knn;
mod linalg;
mod logistic;
mod ridge;

pub use dataset::{read_feature_csv, write_feature_csv, TabularDataset};
pub use gnb::{fit_gnb, GnbModel};
pub use knn::{fit_knn, KnnModel};
pub use logistic::{fit_logistic, LogisticConfig, LogisticModel};
pub use ridge::{default_alpha_grid, fit_ridge_classifier, RidgeClassifierModel};

use crate::segmentation::ContextClass;

/// A trained feature-based classifier.
#[derive(Debug, Clone)]
pub enum FittedModel {
    Logistic(LogisticModel),
    Ridge(RidgeClassifierModel),
    Knn(KnnModel),
    Gnb(GnbModel),
}

impl FittedModel {
    pub fn predict(&self, row: &[f64]) -> ContextClass {
        match self {
            FittedModel::Logistic(m) => m.predict(row),
            FittedModel::Ridge(m) => m.predict(row),
            FittedModel::Knn(m) => m.predict(row),
            FittedModel::Gnb(m) => m.predict(row),
        }
    }

    pub fn predict_batch(&self, rows: &[Vec<f64>]) -> Vec<ContextClass> {
        rows.iter().map(|r| self.predict(r)).collect()
    }

    pub fn kind(&self) -> &'static str {
        match self {
            FittedModel::Logistic(_) => "logistic",
            FittedModel::Ridge(_) => "ridge",
            FittedModel::Knn(_) => "knn",
            FittedModel::Gnb(_) => "gnb",
        }
    }

    /// Model summary (selected alpha, coefficients, class priors, ...) for
    /// the CLI report.
    pub fn summary_json(&self) -> serde_json::Value {
        match self {
            FittedModel::Logistic(m) => serde_json::json!({
                "kind": "logistic",
                "weights": m.weights,
                "intercept": m.intercept,
                "class_weights": { "outdoor": m.class_weights[0], "indoor": m.class_weights[1] },
                "converged": m.converged,
                "iterations": m.iterations,
            }),
            FittedModel::Ridge(m) => serde_json::json!({
                "kind": "ridge",
                "selected_alpha": m.selected_alpha,
                "alphas": m.alphas,
                "loo_sse": m.loo_sse,
                "weights": m.weights,
                "degenerate_fallback": m.degenerate_fallback,
            }),
            FittedModel::Knn(m) => serde_json::json!({
                "kind": "knn",
                "k": m.k,
                "n_train": m.x_train.len(),
            }),
            FittedModel::Gnb(m) => serde_json::json!({
                "kind": "gnb",
                "class_priors": { "outdoor": m.class_priors[0], "indoor": m.class_priors[1] },
                "variance_floor": m.variance_floor,
            }),
        }
    }
}

/// Signed encoding used by the linear models: outdoor is -1, indoor is +1.
pub(crate) fn encode_label(class: ContextClass) -> f64 {
    match class {
        ContextClass::Outdoor => -1.0,
        ContextClass::Indoor => 1.0,
    }
}

pub(crate) fn decode_score(score: f64) -> ContextClass {
    if score >= 0.0 {
        ContextClass::Indoor
    } else {
        ContextClass::Outdoor
    }
}
