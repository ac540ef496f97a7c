//! Symbolic Fourier approximation with class-supervised binning.
//!
//! Each sliding window is reduced to the real/imaginary parts of its
//! leading Fourier coefficients (the imaginary part of the DC term is
//! identically zero and skipped). Breakpoints per coefficient position are
//! fitted on the training split by greedy information-gain splitting
//! against the class labels, falling back to equi-depth quantiles when a
//! coefficient carries no class information. Word emission includes
//! unigrams and, optionally, bigrams over adjacent non-overlapping windows.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::signal::UnivariateSeries;
use crate::tsc::sax::{symbol_char, symbol_for, Representation, SymbolicConfig};
use crate::tsc::{SeriesDataset, WordBag};

#[derive(Debug, Clone)]
pub struct SfaModel {
    pub cfg: SymbolicConfig,
    /// Per window length, per coefficient position: alphabet_size - 1
    /// ascending breakpoints.
    breakpoints: BTreeMap<usize, Vec<Vec<f64>>>,
}

/// Real/imaginary coefficient sequence of one window:
/// [Re c0, Re c1, Im c1, Re c2, Im c2, ...], truncated to `count` entries.
fn fourier_coefficients(window: &[f64], count: usize) -> Vec<f64> {
    let w = window.len();
    let mut out = Vec::with_capacity(count);
    let mut m = 0usize;
    while out.len() < count {
        let mut re = 0.0;
        let mut im = 0.0;
        let base = -2.0 * std::f64::consts::PI * m as f64 / w as f64;
        for (t, &v) in window.iter().enumerate() {
            let angle = base * t as f64;
            re += v * angle.cos();
            im += v * angle.sin();
        }
        out.push(re);
        if m > 0 && out.len() < count {
            out.push(im);
        }
        m += 1;
    }
    out
}

fn entropy(counts: &[usize; 2]) -> f64 {
    let total = (counts[0] + counts[1]) as f64;
    if total == 0.0 {
        return 0.0;
    }
    let mut h = 0.0;
    for &c in counts {
        if c > 0 {
            let p = c as f64 / total;
            h -= p * p.ln();
        }
    }
    h
}

/// Greedy multi-way information-gain binning of one coefficient position.
/// Returns `None` when the values are class-uninformative (no sequence of
/// positive-gain splits reaches the requested bin count).
fn information_gain_breakpoints(
    mut samples: Vec<(f64, usize)>,
    alphabet_size: usize,
) -> Option<Vec<f64>> {
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = samples.len();
    if n < 2 {
        return None;
    }

    // Segments over the sorted samples, split greedily by weighted gain.
    let mut segments: Vec<(usize, usize)> = vec![(0, n)];
    let mut breakpoints: Vec<f64> = Vec::new();
    while segments.len() < alphabet_size {
        let mut best: Option<(f64, usize, usize)> = None; // gain, segment idx, split point
        for (seg_idx, &(lo, hi)) in segments.iter().enumerate() {
            let mut total = [0usize; 2];
            for s in &samples[lo..hi] {
                total[s.1] += 1;
            }
            let h_total = entropy(&total);
            if h_total == 0.0 {
                continue;
            }
            let seg_n = (hi - lo) as f64;
            let mut left = [0usize; 2];
            for split in lo + 1..hi {
                left[samples[split - 1].1] += 1;
                if samples[split].0 <= samples[split - 1].0 {
                    continue; // not a boundary between distinct values
                }
                let right = [total[0] - left[0], total[1] - left[1]];
                let n_left = (split - lo) as f64;
                let n_right = seg_n - n_left;
                let gain = (h_total
                    - (n_left * entropy(&left) + n_right * entropy(&right)) / seg_n)
                    * seg_n;
                if gain > 1e-12 && best.map_or(true, |(g, _, _)| gain > g) {
                    best = Some((gain, seg_idx, split));
                }
            }
        }
        let (_, seg_idx, split) = best?;
        let (lo, hi) = segments[seg_idx];
        segments[seg_idx] = (lo, split);
        segments.insert(seg_idx + 1, (split, hi));
        breakpoints.push((samples[split - 1].0 + samples[split].0) / 2.0);
    }
    breakpoints.sort_by(f64::total_cmp);
    Some(breakpoints)
}

/// Equi-depth quantile breakpoints over the observed values.
fn equi_depth_breakpoints(mut values: Vec<f64>, alphabet_size: usize) -> Vec<f64> {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    (1..alphabet_size)
        .map(|k| {
            let pos = k as f64 / alphabet_size as f64 * (n - 1) as f64;
            let lo = pos.floor() as usize;
            let frac = pos - lo as f64;
            if lo + 1 < n {
                values[lo] * (1.0 - frac) + values[lo + 1] * frac
            } else {
                values[lo]
            }
        })
        .collect()
}

/// Fit SFA breakpoints on the training split.
pub fn fit_sfa(train: &SeriesDataset, cfg: &SymbolicConfig) -> Result<SfaModel> {
    if cfg.representation != Representation::Sfa {
        return Err(Error::invalid("fit_sfa requires an sfa configuration"));
    }
    cfg.validate()?;

    let mut breakpoints = BTreeMap::new();
    for &wl in &cfg.window_lengths {
        // Coefficient samples per position, tagged with the series class.
        let mut per_position: Vec<Vec<(f64, usize)>> = vec![Vec::new(); cfg.word_length];
        for (series, &label) in train.series.iter().zip(&train.y) {
            if series.len() < wl {
                continue;
            }
            for offset in 0..=series.len() - wl {
                let coeffs = fourier_coefficients(&series.values[offset..offset + wl], cfg.word_length);
                for (p, &c) in coeffs.iter().enumerate() {
                    per_position[p].push((c, label.index()));
                }
            }
        }
        if per_position[0].is_empty() {
            return Err(Error::invalid(format!(
                "no training series is long enough for window length {wl}"
            )));
        }

        let mut position_breakpoints = Vec::with_capacity(cfg.word_length);
        for samples in per_position {
            let values: Vec<f64> = samples.iter().map(|s| s.0).collect();
            let bps = information_gain_breakpoints(samples, cfg.alphabet_size)
                .unwrap_or_else(|| equi_depth_breakpoints(values, cfg.alphabet_size));
            position_breakpoints.push(bps);
        }
        breakpoints.insert(wl, position_breakpoints);
    }

    Ok(SfaModel {
        cfg: cfg.clone(),
        breakpoints,
    })
}

impl SfaModel {
    fn word_at(&self, window: &[f64], position_breakpoints: &[Vec<f64>]) -> String {
        let coeffs = fourier_coefficients(window, self.cfg.word_length);
        coeffs
            .iter()
            .zip(position_breakpoints)
            .map(|(&c, bps)| symbol_char(symbol_for(c, bps)))
            .collect()
    }

    /// Bag of SFA unigrams (and bigrams over adjacent non-overlapping
    /// windows when enabled) for one series.
    pub fn words(&self, series: &UnivariateSeries) -> WordBag {
        let mut bag = WordBag::new();
        for (&wl, position_breakpoints) in &self.breakpoints {
            if series.len() < wl {
                continue;
            }
            let words: Vec<String> = (0..=series.len() - wl)
                .map(|offset| self.word_at(&series.values[offset..offset + wl], position_breakpoints))
                .collect();
            for (offset, word) in words.iter().enumerate() {
                *bag.entry(format!("sfa:{wl}:{word}")).or_insert(0) += 1;
                if self.cfg.bigrams && offset >= wl {
                    let prev = &words[offset - wl];
                    *bag.entry(format!("sfa:{wl}:{prev}|{word}")).or_insert(0) += 1;
                }
            }
        }
        bag
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segmentation::ContextClass;
    use crate::tsc::LengthMode;

    fn sine_series(cycles_per_window: f64, window: usize, windows: usize, phase: f64) -> Vec<f64> {
        let n = window * windows;
        (0..n)
            .map(|i| {
                (2.0 * std::f64::consts::PI * cycles_per_window * i as f64 / window as f64 + phase)
                    .sin()
            })
            .collect()
    }

    fn spectral_dataset() -> SeriesDataset {
        let mut series = Vec::new();
        let mut labels = Vec::new();
        for k in 0..6 {
            let phase = k as f64 * 0.6;
            series.push(UnivariateSeries::new(sine_series(1.0, 16, 3, phase)).unwrap());
            labels.push(ContextClass::Outdoor);
            series.push(UnivariateSeries::new(sine_series(6.0, 16, 3, phase)).unwrap());
            labels.push(ContextClass::Indoor);
        }
        let n = series.len();
        SeriesDataset::new(series, labels, vec!["s".into(); n], LengthMode::Fixed).unwrap()
    }

    #[test]
    fn spectral_classes_yield_disjoint_word_histograms() {
        let train = spectral_dataset();
        let cfg = SymbolicConfig::sfa(vec![16], 4, 4, false);
        let model = fit_sfa(&train, &cfg).unwrap();

        let mut outdoor_words = std::collections::BTreeSet::new();
        let mut indoor_words = std::collections::BTreeSet::new();
        for (series, &label) in train.series.iter().zip(&train.y) {
            let bag = model.words(series);
            for word in bag.keys() {
                if label == ContextClass::Outdoor {
                    outdoor_words.insert(word.clone());
                } else {
                    indoor_words.insert(word.clone());
                }
            }
        }
        assert!(!outdoor_words.is_empty() && !indoor_words.is_empty());
        assert!(
            outdoor_words.is_disjoint(&indoor_words),
            "shared words: {:?}",
            outdoor_words.intersection(&indoor_words).collect::<Vec<_>>()
        );
    }

    #[test]
    fn bigrams_disabled_emits_only_unigrams() {
        let train = spectral_dataset();
        let cfg = SymbolicConfig::sfa(vec![16], 4, 3, false);
        let model = fit_sfa(&train, &cfg).unwrap();
        let bag = model.words(&train.series[0]);
        assert!(bag.keys().all(|k| !k.contains('|')));
    }

    #[test]
    fn bigrams_pair_adjacent_non_overlapping_windows() {
        let train = spectral_dataset();
        let cfg = SymbolicConfig::sfa(vec![16], 4, 3, true);
        let model = fit_sfa(&train, &cfg).unwrap();
        // 48 samples and window 16 leave offsets >= 16, so bigrams exist.
        let bag = model.words(&train.series[0]);
        assert!(bag.keys().any(|k| k.contains('|')));
    }

    #[test]
    fn single_window_series_emits_no_bigrams() {
        let train = spectral_dataset();
        let cfg = SymbolicConfig::sfa(vec![16], 4, 3, true);
        let model = fit_sfa(&train, &cfg).unwrap();
        let short = UnivariateSeries::new(sine_series(2.0, 16, 1, 0.0)).unwrap();
        assert_eq!(short.len(), 16);
        let bag = model.words(&short);
        assert!(!bag.is_empty());
        assert!(bag.keys().all(|k| !k.contains('|')));
    }

    #[test]
    fn uninformative_labels_fall_back_to_equi_depth() {
        // All windows share one class: information gain is impossible.
        let series: Vec<UnivariateSeries> = (0..4)
            .map(|k| UnivariateSeries::new(sine_series(2.0, 16, 2, k as f64)).unwrap())
            .collect();
        let n = series.len();
        let train = SeriesDataset::new(
            series,
            vec![ContextClass::Indoor; n],
            vec!["s".into(); n],
            LengthMode::Fixed,
        )
        .unwrap();
        let cfg = SymbolicConfig::sfa(vec![16], 3, 4, false);
        let model = fit_sfa(&train, &cfg).unwrap();
        let bps = &model.breakpoints[&16];
        assert_eq!(bps.len(), 3);
        for position in bps {
            assert_eq!(position.len(), 3);
            for pair in position.windows(2) {
                assert!(pair[0] <= pair[1]);
            }
        }
    }

    #[test]
    fn information_gain_split_separates_constructed_classes() {
        // Class 0 values cluster near -1, class 1 near +1.
        let samples: Vec<(f64, usize)> = (0..40)
            .map(|i| {
                if i % 2 == 0 {
                    (-1.0 + (i as f64) * 1e-3, 0)
                } else {
                    (1.0 + (i as f64) * 1e-3, 1)
                }
            })
            .collect();
        let bps = information_gain_breakpoints(samples, 2).unwrap();
        assert_eq!(bps.len(), 1);
        assert!(bps[0] > -0.9 && bps[0] < 1.0, "breakpoint {}", bps[0]);
    }

    #[test]
    fn dc_imaginary_part_is_skipped() {
        let window: Vec<f64> = (0..8).map(|i| i as f64).collect();
        let coeffs = fourier_coefficients(&window, 3);
        // Position 0 is Re(c0) = sum; positions 1 and 2 are Re/Im of c1.
        assert!((coeffs[0] - 28.0).abs() < 1e-9);
        let re1: f64 = (0..8)
            .map(|t| window[t] * (-2.0 * std::f64::consts::PI * t as f64 / 8.0).cos())
            .sum();
        assert!((coeffs[1] - re1).abs() < 1e-9);
    }
}
