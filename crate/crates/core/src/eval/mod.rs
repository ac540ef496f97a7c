//! Cross-validation protocols, classification metrics and campaign
//! execution. Folds run sequentially but models parallelize internally;
//! aggregation is order-independent.

mod campaign;
mod folds;
mod metrics;

pub use campaign::{
    fnv1a64, run_campaign, AggregateMetrics, CampaignDataset, FoldReport, MeanStd, MetricsReport,
    ModelSpec, Normalization,
};
pub use folds::{make_custom_folds, make_loso_folds, make_stratified_folds, Fold, FoldPlan, FoldStrategy};
pub use metrics::{compute_metrics, FoldMetrics};
