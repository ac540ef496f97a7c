//! Run configuration for `train-eval`: defaults, overridden by a flat
//! key=value config file, overridden again by command-line flags. The
//! resolved configuration is embedded in the report so any run can be
//! reproduced from its output alone.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use gaitctx::pipeline::{Channel, LengthHandling};
use gaitctx::signal::Axis;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetKind {
    WindowsDmo,
    BoutsDmo,
    WindowsSeries,
    BoutsSeries,
}

impl DatasetKind {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "windows-dmo" => DatasetKind::WindowsDmo,
            "bouts-dmo" => DatasetKind::BoutsDmo,
            "windows-series" => DatasetKind::WindowsSeries,
            "bouts-series" => DatasetKind::BoutsSeries,
            other => bail!(
                "unknown dataset {other:?} (expected windows-dmo, bouts-dmo, windows-series or bouts-series)"
            ),
        })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            DatasetKind::WindowsDmo => "windows-dmo",
            DatasetKind::BoutsDmo => "bouts-dmo",
            DatasetKind::WindowsSeries => "windows-series",
            DatasetKind::BoutsSeries => "bouts-series",
        }
    }

    pub fn is_tabular(&self) -> bool {
        matches!(self, DatasetKind::WindowsDmo | DatasetKind::BoutsDmo)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Logistic,
    Ridge,
    Knn,
    Gnb,
    Rocket,
    MiniRocket,
    Dtw,
    Symbolic,
}

impl ModelKind {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "logistic" => ModelKind::Logistic,
            "ridge" => ModelKind::Ridge,
            "knn" => ModelKind::Knn,
            "gnb" => ModelKind::Gnb,
            "rocket" => ModelKind::Rocket,
            "minirocket" => ModelKind::MiniRocket,
            "dtw" => ModelKind::Dtw,
            "symbolic" => ModelKind::Symbolic,
            other => bail!(
                "unknown model {other:?} (expected logistic, ridge, knn, gnb, rocket, minirocket, dtw or symbolic)"
            ),
        })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Logistic => "logistic",
            ModelKind::Ridge => "ridge",
            ModelKind::Knn => "knn",
            ModelKind::Gnb => "gnb",
            ModelKind::Rocket => "rocket",
            ModelKind::MiniRocket => "minirocket",
            ModelKind::Dtw => "dtw",
            ModelKind::Symbolic => "symbolic",
        }
    }

    pub fn is_tabular(&self) -> bool {
        matches!(
            self,
            ModelKind::Logistic | ModelKind::Ridge | ModelKind::Knn | ModelKind::Gnb
        )
    }

    pub fn requires_fixed_length(&self) -> bool {
        matches!(self, ModelKind::Rocket | ModelKind::MiniRocket)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FoldSpec {
    Stratified(usize),
    Loso,
    Custom(String),
}

impl FoldSpec {
    pub fn parse(s: &str) -> Result<Self> {
        if s == "loso" {
            return Ok(FoldSpec::Loso);
        }
        if s == "stratified" {
            return Ok(FoldSpec::Stratified(5));
        }
        if let Some(k) = s.strip_prefix("stratified:") {
            let k: usize = k.parse().with_context(|| format!("bad fold count in {s:?}"))?;
            return Ok(FoldSpec::Stratified(k));
        }
        if let Some(path) = s.strip_prefix("custom:") {
            return Ok(FoldSpec::Custom(path.to_string()));
        }
        bail!("unknown fold strategy {s:?} (expected stratified[:k], loso or custom:FILE)")
    }

    pub fn as_string(&self) -> String {
        match self {
            FoldSpec::Stratified(k) => format!("stratified:{k}"),
            FoldSpec::Loso => "loso".to_string(),
            FoldSpec::Custom(path) => format!("custom:{path}"),
        }
    }
}

/// Fully resolved train-eval configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub data_dir: String,
    pub dataset: DatasetKind,
    pub model: ModelKind,
    pub channel: Channel,
    pub length: LengthHandling,
    pub normalization: gaitctx::eval::Normalization,
    pub folds: FoldSpec,
    pub seed: u64,
    pub window_len_s: usize,
    pub axis: Axis,
    pub kernels: usize,
    pub knn_k: usize,
    pub l2_strength: f64,
    pub max_iter: usize,
    pub top_k_words: usize,
    pub jobs: Option<usize>,
}

impl RunConfig {
    /// The Table-style legal grid: tabular models pair with DMO datasets,
    /// series models with signal datasets, and native-length series only
    /// feed models that can handle them.
    pub fn validate(&self) -> Result<()> {
        if self.dataset.is_tabular() != self.model.is_tabular() {
            bail!(
                "model {} cannot run on dataset {}: feature-based models need DMO tables and raw-signal models need series",
                self.model.as_str(),
                self.dataset.as_str()
            );
        }
        if self.length == LengthHandling::Original && self.model.requires_fixed_length() {
            bail!(
                "length=original is incompatible with model {}: convolution transforms need equal-length series (use pad or resample)",
                self.model.as_str()
            );
        }
        if self.dataset.is_tabular() && self.length != LengthHandling::Pad {
            bail!("length applies only to series datasets (dataset is {})", self.dataset.as_str());
        }
        Ok(())
    }

    pub fn campaign_id(&self) -> String {
        if self.dataset.is_tabular() {
            format!(
                "{}-{}-{}-{}",
                self.dataset.as_str(),
                self.model.as_str(),
                self.normalization,
                self.folds.as_string().replace(':', "")
            )
        } else {
            format!(
                "{}-{}-{}-{}-{}-{}",
                self.dataset.as_str(),
                self.model.as_str(),
                self.channel,
                self.length,
                self.normalization,
                self.folds.as_string().replace(':', "")
            )
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "data_dir": self.data_dir,
            "dataset": self.dataset.as_str(),
            "model": self.model.as_str(),
            "channel": self.channel.to_string(),
            "length": self.length.to_string(),
            "normalization": self.normalization.to_string(),
            "folds": self.folds.as_string(),
            "seed": self.seed,
            "window_len_s": self.window_len_s,
            "axis": self.axis.to_string(),
            "kernels": self.kernels,
            "knn_k": self.knn_k,
            "l2_strength": self.l2_strength,
            "max_iter": self.max_iter,
            "top_k_words": self.top_k_words,
        })
    }
}

/// Flat key=value file ('#' starts a comment). Unknown keys are rejected so
/// typos fail loudly.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    const KNOWN: [&str; 15] = [
        "data", "dataset", "model", "channel", "length", "normalize", "folds", "seed", "window",
        "axis", "kernels", "knn-k", "l2", "max-iter", "top-k-words",
    ];
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    let mut out = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("{}:{}: expected key=value", path.display(), lineno + 1);
        };
        let key = key.trim();
        if !KNOWN.contains(&key) {
            bail!("{}:{}: unknown config key {key:?}", path.display(), lineno + 1);
        }
        out.insert(key.to_string(), value.trim().to_string());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fold_spec_round_trips() {
        assert_eq!(FoldSpec::parse("stratified:7").unwrap(), FoldSpec::Stratified(7));
        assert_eq!(FoldSpec::parse("stratified").unwrap(), FoldSpec::Stratified(5));
        assert_eq!(FoldSpec::parse("loso").unwrap(), FoldSpec::Loso);
        assert!(FoldSpec::parse("bogus").is_err());
    }

    #[test]
    fn config_file_rejects_unknown_keys() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "model = gnb\nbogus = 1\n").unwrap();
        assert!(read_config_file(&path).is_err());
        std::fs::write(&path, "model = gnb # comment\ndataset = bouts-dmo\n").unwrap();
        let map = read_config_file(&path).unwrap();
        assert_eq!(map["model"], "gnb");
        assert_eq!(map["dataset"], "bouts-dmo");
    }
}
