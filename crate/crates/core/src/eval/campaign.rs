//! Campaign execution: fit a model per fold on the train side only, predict
//! the test side, and aggregate metrics. Every fold records a checksum of
//! the exact inputs its fit received, so a report documents that nothing
//! computed from the test fold influenced the model.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::eval::folds::FoldPlan;
use crate::eval::metrics::{compute_metrics, FoldMetrics};
use crate::segmentation::ContextClass;
use crate::signal::zscore;
use crate::tabular::{
    fit_gnb, fit_knn, fit_logistic, fit_ridge_classifier, FittedModel, LogisticConfig,
    TabularDataset,
};
use crate::tsc::{
    fit_symbolic_linear, knn1_dtw_fit_predict, rocket_transform, MiniRocketConfig,
    MiniRocketTransformer, RocketKernelBank, SeriesDataset, SymbolicLinearConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
pub enum Normalization {
    Zscore,
    None,
}

impl std::fmt::Display for Normalization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Normalization::Zscore => write!(f, "zscore"),
            Normalization::None => write!(f, "none"),
        }
    }
}

/// The model side of a campaign.
#[derive(Debug, Clone, Serialize)]
pub enum ModelSpec {
    Logistic(LogisticConfig),
    Ridge { alphas: Vec<f64> },
    Knn { k: usize },
    Gnb,
    Rocket { num_kernels: usize, seed: u64 },
    MiniRocket(MiniRocketConfig),
    Knn1Dtw,
    Symbolic(SymbolicLinearConfig),
}

impl ModelSpec {
    pub fn id(&self) -> &'static str {
        match self {
            ModelSpec::Logistic(_) => "logistic",
            ModelSpec::Ridge { .. } => "ridge",
            ModelSpec::Knn { .. } => "knn",
            ModelSpec::Gnb => "gnb",
            ModelSpec::Rocket { .. } => "rocket",
            ModelSpec::MiniRocket(_) => "minirocket",
            ModelSpec::Knn1Dtw => "1nn-dtw",
            ModelSpec::Symbolic(_) => "symbolic",
        }
    }

    pub fn is_tabular(&self) -> bool {
        matches!(
            self,
            ModelSpec::Logistic(_) | ModelSpec::Ridge { .. } | ModelSpec::Knn { .. } | ModelSpec::Gnb
        )
    }

    /// Models that require all series to share one length.
    pub fn requires_fixed_length(&self) -> bool {
        matches!(self, ModelSpec::Rocket { .. } | ModelSpec::MiniRocket(_))
    }
}

#[derive(Debug, Clone)]
pub enum CampaignDataset {
    Tabular(TabularDataset),
    Series(SeriesDataset),
}

impl CampaignDataset {
    pub fn n(&self) -> usize {
        match self {
            CampaignDataset::Tabular(d) => d.n(),
            CampaignDataset::Series(d) => d.n(),
        }
    }

    pub fn labels(&self) -> &[ContextClass] {
        match self {
            CampaignDataset::Tabular(d) => &d.y,
            CampaignDataset::Series(d) => &d.y,
        }
    }

    pub fn subjects(&self) -> &[String] {
        match self {
            CampaignDataset::Tabular(d) => &d.subjects,
            CampaignDataset::Series(d) => &d.subjects,
        }
    }
}

/// FNV-1a over a byte stream; enough to fingerprint fold inputs.
pub fn fnv1a64(bytes: impl IntoIterator<Item = u8>) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

fn checksum_tabular(data: &TabularDataset) -> u64 {
    let bytes = data
        .x
        .iter()
        .zip(&data.y)
        .flat_map(|(row, &label)| {
            row.iter()
                .flat_map(|v| v.to_le_bytes())
                .chain(std::iter::once(label.index() as u8))
        });
    fnv1a64(bytes)
}

fn checksum_series(data: &SeriesDataset) -> u64 {
    let bytes = data
        .series
        .iter()
        .zip(&data.y)
        .flat_map(|(s, &label)| {
            s.values
                .iter()
                .flat_map(|v| v.to_le_bytes())
                .chain(std::iter::once(label.index() as u8))
        });
    fnv1a64(bytes)
}

#[derive(Debug, Clone, Serialize, serde::Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub subject: Option<String>,
    pub degenerate: bool,
    pub n_train: usize,
    pub n_test: usize,
    /// FNV-1a fingerprint of the train-side inputs handed to the fit.
    pub train_checksum: String,
    /// Compact fitted-model summary (selected alpha, class priors, ...).
    /// Coefficient vectors are included only when small.
    pub model_summary: serde_json::Value,
    pub metrics: FoldMetrics,
}

#[derive(Debug, Clone, Copy, Serialize, serde::Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

fn mean_std(values: &[f64]) -> Option<MeanStd> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Some(MeanStd {
        mean,
        std: var.sqrt(),
    })
}

/// Mean and population standard deviation over folds. Macro metrics average
/// only the folds where both classes appear in the test side (degenerate
/// folds contribute their accuracy alone).
#[derive(Debug, Clone, Serialize, serde::Deserialize)]
pub struct AggregateMetrics {
    pub accuracy: MeanStd,
    pub macro_precision: Option<MeanStd>,
    pub macro_recall: Option<MeanStd>,
    pub macro_f1: Option<MeanStd>,
    pub folds_in_macro: usize,
}

#[derive(Debug, Clone, Serialize, serde::Deserialize)]
pub struct MetricsReport {
    pub schema_version: u32,
    pub campaign_id: String,
    pub model: String,
    pub strategy: String,
    pub normalization: String,
    pub seed: u64,
    /// Full configuration snapshot; the CLI embeds its run config here.
    pub config: serde_json::Value,
    pub folds: Vec<FoldReport>,
    pub aggregate: AggregateMetrics,
}

impl MetricsReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn aggregate(folds: &[FoldReport]) -> AggregateMetrics {
    let accuracy: Vec<f64> = folds.iter().map(|f| f.metrics.accuracy).collect();
    let defined: Vec<&FoldReport> = folds.iter().filter(|f| f.metrics.macro_defined).collect();
    let pick = |get: fn(&FoldMetrics) -> f64| -> Option<MeanStd> {
        mean_std(&defined.iter().map(|f| get(&f.metrics)).collect::<Vec<f64>>())
    };
    AggregateMetrics {
        accuracy: mean_std(&accuracy).expect("at least one fold"),
        macro_precision: pick(|m| m.macro_precision),
        macro_recall: pick(|m| m.macro_recall),
        macro_f1: pick(|m| m.macro_f1),
        folds_in_macro: defined.len(),
    }
}

fn normalize_series_dataset(data: &SeriesDataset) -> SeriesDataset {
    SeriesDataset {
        series: data.series.iter().map(zscore).collect(),
        y: data.y.clone(),
        subjects: data.subjects.clone(),
        length_mode: data.length_mode,
    }
}

/// Compact per-fold summary; coefficient vectors appear only below this
/// dimensionality so kernel-transform reports stay readable.
const MAX_SUMMARY_COEFFS: usize = 64;

fn compact_summary(fitted: &FittedModel) -> serde_json::Value {
    match fitted {
        FittedModel::Logistic(m) => {
            let mut v = serde_json::json!({
                "kind": "logistic",
                "intercept": m.intercept,
                "class_weights": { "outdoor": m.class_weights[0], "indoor": m.class_weights[1] },
                "converged": m.converged,
                "iterations": m.iterations,
                "n_weights": m.weights.len(),
            });
            if m.weights.len() <= MAX_SUMMARY_COEFFS {
                v["weights"] = serde_json::json!(m.weights);
            }
            v
        }
        FittedModel::Ridge(m) => {
            let mut v = serde_json::json!({
                "kind": "ridge",
                "selected_alpha": m.selected_alpha,
                "loo_sse": m.loo_sse,
                "degenerate_fallback": m.degenerate_fallback,
                "n_weights": m.weights.len(),
            });
            if m.weights.len() <= MAX_SUMMARY_COEFFS {
                v["weights"] = serde_json::json!(m.weights);
            }
            v
        }
        FittedModel::Knn(m) => serde_json::json!({ "kind": "knn", "k": m.k, "n_train": m.x_train.len() }),
        FittedModel::Gnb(m) => serde_json::json!({
            "kind": "gnb",
            "class_priors": { "outdoor": m.class_priors[0], "indoor": m.class_priors[1] },
            "variance_floor": m.variance_floor,
        }),
    }
}

fn fit_predict_tabular(
    model: &ModelSpec,
    train: &TabularDataset,
    test_rows: &[Vec<f64>],
    normalization: Normalization,
) -> Result<(Vec<ContextClass>, u64, serde_json::Value)> {
    // Normalization statistics come from the training fold only.
    let (train_data, test_rows): (TabularDataset, Vec<Vec<f64>>) = match normalization {
        Normalization::Zscore => {
            let (scaled, scaler) = crate::dmo::zscore_feature_matrix(train)?;
            let mapped = test_rows.iter().map(|r| scaler.transform_row(r)).collect();
            (scaled, mapped)
        }
        Normalization::None => (train.clone(), test_rows.to_vec()),
    };
    let checksum = checksum_tabular(&train_data);
    let fitted = match model {
        ModelSpec::Logistic(cfg) => FittedModel::Logistic(fit_logistic(&train_data, cfg)?),
        ModelSpec::Ridge { alphas } => {
            FittedModel::Ridge(fit_ridge_classifier(&train_data, alphas)?)
        }
        ModelSpec::Knn { k } => FittedModel::Knn(fit_knn(&train_data, *k)?),
        ModelSpec::Gnb => FittedModel::Gnb(fit_gnb(&train_data)?),
        _ => unreachable!("tabular path only receives tabular specs"),
    };
    let summary = compact_summary(&fitted);
    Ok((fitted.predict_batch(&test_rows), checksum, summary))
}

/// Run one experimental campaign: per fold, fit on the train side only
/// (including normalization statistics, bias quantiles and breakpoint
/// fitting), predict the test side, and aggregate mean and std over folds.
pub fn run_campaign(
    dataset: &CampaignDataset,
    model: &ModelSpec,
    plan: &FoldPlan,
    normalization: Normalization,
    campaign_id: &str,
) -> Result<MetricsReport> {
    plan.validate(dataset.n())?;
    match (dataset, model.is_tabular()) {
        (CampaignDataset::Tabular(_), false) => {
            return Err(Error::invalid(format!(
                "model {} expects raw series but the dataset is tabular",
                model.id()
            )));
        }
        (CampaignDataset::Series(_), true) => {
            return Err(Error::invalid(format!(
                "model {} expects tabular features but the dataset is raw series",
                model.id()
            )));
        }
        _ => {}
    }
    if let (CampaignDataset::Series(series), true) = (dataset, model.requires_fixed_length()) {
        series.fixed_len().map_err(|_| {
            Error::invalid(format!(
                "model {} is not able to work with variable-length series; pad or resample first",
                model.id()
            ))
        })?;
    }

    // The full-bank convolution transform is data independent (kernels and
    // biases come from the seed alone), so it runs once up front; only its
    // ridge head is refit per fold.
    let rocket_features: Option<TabularDataset> = match (dataset, model) {
        (CampaignDataset::Series(series), ModelSpec::Rocket { num_kernels, seed }) => {
            let input = match normalization {
                Normalization::Zscore => normalize_series_dataset(series),
                Normalization::None => series.clone(),
            };
            let bank = RocketKernelBank::generate(*num_kernels, input.fixed_len()?, *seed)?;
            Some(rocket_transform(&input, &bank)?)
        }
        _ => None,
    };

    let mut fold_reports = Vec::with_capacity(plan.folds.len());
    for (fold_idx, fold) in plan.folds.iter().enumerate() {
        let (predictions, y_true, checksum, summary) = match dataset {
            CampaignDataset::Tabular(data) => {
                let train = data.subset(&fold.train)?;
                let test = data.subset(&fold.test)?;
                let (pred, checksum, summary) =
                    fit_predict_tabular(model, &train, &test.x, normalization)?;
                (pred, test.y, checksum, summary)
            }
            CampaignDataset::Series(data) => {
                let data = match normalization {
                    Normalization::Zscore => normalize_series_dataset(data),
                    Normalization::None => data.clone(),
                };
                let train = data.subset(&fold.train)?;
                let test = data.subset(&fold.test)?;
                match model {
                    ModelSpec::Rocket { .. } => {
                        let features = rocket_features.as_ref().expect("precomputed above");
                        let train_tab = features.subset(&fold.train)?;
                        let test_tab = features.subset(&fold.test)?;
                        let checksum = checksum_tabular(&train_tab);
                        let fitted =
                            fit_ridge_classifier(&train_tab, &crate::tabular::default_alpha_grid())?;
                        let summary = compact_summary(&FittedModel::Ridge(fitted.clone()));
                        let pred = test_tab.x.iter().map(|r| fitted.predict(r)).collect();
                        (pred, test.y, checksum, summary)
                    }
                    ModelSpec::MiniRocket(cfg) => {
                        let checksum = checksum_series(&train);
                        let mut transformer = MiniRocketTransformer::new(cfg.clone());
                        transformer.fit(&train)?;
                        let train_tab = transformer.transform(&train)?;
                        let test_tab = transformer.transform(&test)?;
                        let fitted =
                            fit_ridge_classifier(&train_tab, &crate::tabular::default_alpha_grid())?;
                        let summary = compact_summary(&FittedModel::Ridge(fitted.clone()));
                        let pred = test_tab.x.iter().map(|r| fitted.predict(r)).collect();
                        (pred, test.y, checksum, summary)
                    }
                    ModelSpec::Knn1Dtw => {
                        let checksum = checksum_series(&train);
                        let pred = knn1_dtw_fit_predict(&train, &test)?;
                        let summary = serde_json::json!({ "kind": "1nn-dtw", "n_train": train.n() });
                        (pred, test.y, checksum, summary)
                    }
                    ModelSpec::Symbolic(cfg) => {
                        let checksum = checksum_series(&train);
                        let fitted = fit_symbolic_linear(&train, cfg)?;
                        let summary = serde_json::json!({
                            "kind": "symbolic",
                            "vocabulary_size": fitted.vocabulary.len(),
                            "top_word": fitted.vocabulary.first().map(|(w, _)| w.clone()),
                        });
                        let pred = fitted.predict_batch(&test)?;
                        (pred, test.y, checksum, summary)
                    }
                    _ => unreachable!("series path only receives series specs"),
                }
            }
        };
        let metrics = compute_metrics(&y_true, &predictions)?;
        fold_reports.push(FoldReport {
            fold: fold_idx,
            subject: fold.subject.clone(),
            degenerate: fold.degenerate,
            n_train: fold.train.len(),
            n_test: fold.test.len(),
            train_checksum: format!("{checksum:016x}"),
            model_summary: summary,
            metrics,
        });
    }

    let aggregate = aggregate(&fold_reports);
    Ok(MetricsReport {
        schema_version: 1,
        campaign_id: campaign_id.to_string(),
        model: model.id().to_string(),
        strategy: plan.strategy.to_string(),
        normalization: normalization.to_string(),
        seed: plan.seed,
        config: serde_json::json!({ "model": model, "strategy": plan.strategy }),
        folds: fold_reports,
        aggregate,
    })
}
