//! Multi-resolution symbolic bag-of-patterns linear classifier.
//!
//! Word-count features from SAX and SFA configurations over several window
//! lengths are concatenated, filtered to the top-K words by chi-squared
//! score against the class labels, and fed to an L2 logistic head.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::segmentation::ContextClass;
use crate::signal::UnivariateSeries;
use crate::tabular::{fit_logistic, LogisticConfig, LogisticModel, TabularDataset};
use crate::tsc::sax::{sax_words, Representation, SymbolicConfig};
use crate::tsc::sfa::{fit_sfa, SfaModel};
use crate::tsc::{SeriesDataset, WordBag};

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SymbolicLinearConfig {
    pub configs: Vec<SymbolicConfig>,
    /// Vocabulary size kept after the chi-squared filter.
    pub top_k_words: usize,
    pub logistic: LogisticConfig,
}

impl Default for SymbolicLinearConfig {
    fn default() -> Self {
        Self {
            configs: vec![
                SymbolicConfig::sax(vec![16, 32, 64], 8, 4),
                SymbolicConfig::sfa(vec![16, 32, 64], 6, 4, true),
            ],
            top_k_words: 10_000,
            logistic: LogisticConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SymbolicLinearModel {
    /// Fitted SFA models, index-aligned with the SAX/SFA config list.
    configs: Vec<SymbolicConfig>,
    sfa_models: Vec<Option<SfaModel>>,
    /// Retained vocabulary with chi-squared scores, in feature order.
    pub vocabulary: Vec<(String, f64)>,
    pub logistic: LogisticModel,
}

fn series_bag(
    series: &UnivariateSeries,
    configs: &[SymbolicConfig],
    sfa_models: &[Option<SfaModel>],
) -> Result<WordBag> {
    let mut bag = WordBag::new();
    for (cfg, sfa) in configs.iter().zip(sfa_models) {
        let part = match cfg.representation {
            Representation::Sax => sax_words(series, cfg)?,
            Representation::Sfa => sfa
                .as_ref()
                .expect("sfa model fitted for every sfa config")
                .words(series),
        };
        for (word, count) in part {
            *bag.entry(word).or_insert(0) += count;
        }
    }
    Ok(bag)
}

/// Chi-squared score of one word's class-conditional count sums against the
/// expectation under class independence.
fn chi_squared(observed: [f64; 2], class_fractions: [f64; 2]) -> f64 {
    let total = observed[0] + observed[1];
    if total == 0.0 {
        return 0.0;
    }
    let mut score = 0.0;
    for c in 0..2 {
        let expected = total * class_fractions[c];
        if expected > 0.0 {
            let diff = observed[c] - expected;
            score += diff * diff / expected;
        }
    }
    score
}

pub fn fit_symbolic_linear(
    train: &SeriesDataset,
    cfg: &SymbolicLinearConfig,
) -> Result<SymbolicLinearModel> {
    if cfg.configs.is_empty() {
        return Err(Error::invalid("symbolic classifier needs at least one configuration"));
    }
    for c in &cfg.configs {
        c.validate()?;
    }
    let mut distinct_lengths: Vec<usize> = cfg
        .configs
        .iter()
        .flat_map(|c| c.window_lengths.iter().copied())
        .collect();
    distinct_lengths.sort_unstable();
    distinct_lengths.dedup();
    if distinct_lengths.len() < 2 {
        return Err(Error::invalid(
            "the multi-resolution set must span at least 2 window lengths",
        ));
    }

    let sfa_models: Vec<Option<SfaModel>> = cfg
        .configs
        .iter()
        .map(|c| match c.representation {
            Representation::Sfa => fit_sfa(train, c).map(Some),
            Representation::Sax => Ok(None),
        })
        .collect::<Result<_>>()?;

    let bags: Vec<WordBag> = train
        .series
        .par_iter()
        .map(|s| series_bag(s, &cfg.configs, &sfa_models))
        .collect::<Result<_>>()?;

    // Class-conditional count sums per word.
    let counts = train.class_counts_of();
    let n = train.n() as f64;
    let class_fractions = [counts[0] as f64 / n, counts[1] as f64 / n];
    let mut observed: std::collections::BTreeMap<&str, [f64; 2]> = std::collections::BTreeMap::new();
    for (bag, &label) in bags.iter().zip(&train.y) {
        for (word, &count) in bag {
            observed.entry(word.as_str()).or_insert([0.0; 2])[label.index()] += count as f64;
        }
    }
    if observed.is_empty() {
        return Err(Error::DegenerateTraining(
            "symbolic transform produced an empty vocabulary".into(),
        ));
    }

    // Top-K by score, ties resolved lexicographically (BTreeMap order).
    let mut scored: Vec<(String, f64)> = observed
        .iter()
        .map(|(word, obs)| (word.to_string(), chi_squared(*obs, class_fractions)))
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.truncate(cfg.top_k_words);
    let vocabulary = scored;

    let word_index: std::collections::HashMap<&str, usize> = vocabulary
        .iter()
        .enumerate()
        .map(|(i, (w, _))| (w.as_str(), i))
        .collect();
    let mut x = vec![vec![0.0; vocabulary.len()]; train.n()];
    for (row, bag) in x.iter_mut().zip(&bags) {
        for (word, &count) in bag {
            if let Some(&j) = word_index.get(word.as_str()) {
                row[j] = count as f64;
            }
        }
    }

    // A vocabulary with no variation across samples cannot discriminate
    // anything (e.g. every training series is constant).
    let varies = (0..vocabulary.len()).any(|j| x.iter().any(|row| row[j] != x[0][j]));
    if !varies {
        return Err(Error::DegenerateTraining(
            "symbolic vocabulary carries no variation across training series".into(),
        ));
    }

    let tabular = TabularDataset::new(
        x,
        train.y.clone(),
        train.subjects.clone(),
        vocabulary.iter().map(|(w, _)| w.clone()).collect(),
    )?;
    let logistic = fit_logistic(&tabular, &cfg.logistic)?;

    Ok(SymbolicLinearModel {
        configs: cfg.configs.clone(),
        sfa_models,
        vocabulary,
        logistic,
    })
}

impl SymbolicLinearModel {
    fn feature_row(&self, series: &UnivariateSeries) -> Result<Vec<f64>> {
        let bag = series_bag(series, &self.configs, &self.sfa_models)?;
        let mut row = vec![0.0; self.vocabulary.len()];
        for (j, (word, _)) in self.vocabulary.iter().enumerate() {
            if let Some(&count) = bag.get(word) {
                row[j] = count as f64;
            }
        }
        Ok(row)
    }

    pub fn predict(&self, series: &UnivariateSeries) -> Result<ContextClass> {
        Ok(self.logistic.predict(&self.feature_row(series)?))
    }

    pub fn predict_batch(&self, data: &SeriesDataset) -> Result<Vec<ContextClass>> {
        data.series
            .par_iter()
            .map(|s| self.predict(s))
            .collect::<Result<Vec<_>>>()
    }
}

impl SeriesDataset {
    /// Rows per class, ordered as [`ContextClass::ALL`].
    pub fn class_counts_of(&self) -> [usize; 2] {
        let mut counts = [0usize; 2];
        for &c in &self.y {
            counts[c.index()] += 1;
        }
        counts
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tsc::LengthMode;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Class Indoor carries a strong sawtooth motif at a random position;
    /// class Outdoor is pure noise.
    fn planted_motif_dataset(n_per_class: usize, seed: u64) -> SeriesDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let len = 96usize;
        let motif: Vec<f64> = (0..24).map(|i| (i % 8) as f64 - 3.5).collect();
        let mut series = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..n_per_class {
            let mut noise: Vec<f64> = (0..len).map(|_| rng.random_range(-0.3..0.3)).collect();
            let pos = rng.random_range(0..len - motif.len());
            for (k, &m) in motif.iter().enumerate() {
                noise[pos + k] += m;
            }
            series.push(UnivariateSeries::new(noise).unwrap());
            labels.push(ContextClass::Indoor);

            let plain: Vec<f64> = (0..len).map(|_| rng.random_range(-0.3..0.3)).collect();
            series.push(UnivariateSeries::new(plain).unwrap());
            labels.push(ContextClass::Outdoor);
        }
        let n = series.len();
        SeriesDataset::new(series, labels, vec!["s".into(); n], LengthMode::Fixed).unwrap()
    }

    fn small_symbolic_config() -> SymbolicLinearConfig {
        SymbolicLinearConfig {
            configs: vec![
                SymbolicConfig::sax(vec![16, 24], 6, 4),
                SymbolicConfig::sfa(vec![16, 24], 4, 4, true),
            ],
            top_k_words: 500,
            logistic: LogisticConfig {
                l2_strength: 0.1,
                max_iter: 2000,
                ..LogisticConfig::default()
            },
        }
    }

    #[test]
    fn planted_motif_is_learned_with_perfect_holdout_accuracy() {
        let train = planted_motif_dataset(12, 1);
        let test = planted_motif_dataset(8, 2);
        let model = fit_symbolic_linear(&train, &small_symbolic_config()).unwrap();

        // The motif's word family should dominate the chi-squared ranking:
        // the top word's count mass must be heavily class-polarized.
        let top_word = &model.vocabulary[0].0;
        let mut class_counts = [0u32; 2];
        for (s, &label) in train.series.iter().zip(&train.y) {
            let bag = series_bag(s, &model.configs, &model.sfa_models).unwrap();
            class_counts[label.index()] += bag.get(top_word).copied().unwrap_or(0);
        }
        let lo = class_counts[0].min(class_counts[1]);
        let hi = class_counts[0].max(class_counts[1]);
        assert!(
            hi >= 2 * lo.max(1),
            "top word {top_word} is not class-polarized ({class_counts:?})"
        );

        let predictions = model.predict_batch(&test).unwrap();
        let correct = predictions
            .iter()
            .zip(&test.y)
            .filter(|(p, t)| p == t)
            .count();
        assert_eq!(correct, test.n(), "holdout accuracy below 1.0");
    }

    #[test]
    fn single_class_training_is_degenerate() {
        let mut data = planted_motif_dataset(6, 3);
        data.y = vec![ContextClass::Indoor; data.n()];
        assert!(matches!(
            fit_symbolic_linear(&data, &small_symbolic_config()),
            Err(Error::DegenerateTraining(_))
        ));
    }

    #[test]
    fn constant_series_are_degenerate() {
        let series: Vec<UnivariateSeries> = (0..8)
            .map(|_| UnivariateSeries::new(vec![5.0; 64]).unwrap())
            .collect();
        let labels: Vec<ContextClass> = (0..8)
            .map(|i| {
                if i % 2 == 0 {
                    ContextClass::Indoor
                } else {
                    ContextClass::Outdoor
                }
            })
            .collect();
        let data = SeriesDataset::new(series, labels, vec!["s".into(); 8], LengthMode::Fixed).unwrap();
        assert!(matches!(
            fit_symbolic_linear(&data, &small_symbolic_config()),
            Err(Error::DegenerateTraining(_))
        ));
    }

    #[test]
    fn vocabulary_respects_the_top_k_budget() {
        let train = planted_motif_dataset(10, 4);
        let mut cfg = small_symbolic_config();
        cfg.top_k_words = 25;
        let model = fit_symbolic_linear(&train, &cfg).unwrap();
        assert!(model.vocabulary.len() <= 25);
        // Scores are non-increasing.
        for pair in model.vocabulary.windows(2) {
            assert!(pair[0].1 >= pair[1].1);
        }
    }

    #[test]
    fn fewer_than_two_window_lengths_is_invalid() {
        let train = planted_motif_dataset(4, 5);
        let cfg = SymbolicLinearConfig {
            configs: vec![SymbolicConfig::sax(vec![16], 6, 4)],
            top_k_words: 100,
            logistic: LogisticConfig::default(),
        };
        assert!(matches!(
            fit_symbolic_linear(&train, &cfg),
            Err(Error::InvalidInput(_))
        ));
    }
}
