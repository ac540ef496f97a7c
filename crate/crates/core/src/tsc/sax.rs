//! Symbolic aggregate approximation: sliding windows are z-normalized,
//! piecewise-aggregated to a fixed word length and quantized against
//! equiprobable standard-normal breakpoints. Consecutive duplicate words are
//! dropped (numerosity reduction). Words are prefixed with their
//! representation and window length so multi-resolution bags stay disjoint.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{zscore_values, UnivariateSeries};
use crate::tsc::WordBag;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Representation {
    Sax,
    Sfa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Binning {
    /// Equiprobable standard-normal breakpoints (SAX).
    Gaussian,
    /// Class-supervised information-gain breakpoints with an equi-depth
    /// fallback (SFA).
    InformationGain,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymbolicConfig {
    pub representation: Representation,
    pub window_lengths: Vec<usize>,
    pub word_length: usize,
    pub alphabet_size: usize,
    pub binning: Binning,
    pub bigrams: bool,
}

impl SymbolicConfig {
    pub fn sax(window_lengths: Vec<usize>, word_length: usize, alphabet_size: usize) -> Self {
        Self {
            representation: Representation::Sax,
            window_lengths,
            word_length,
            alphabet_size,
            binning: Binning::Gaussian,
            bigrams: false,
        }
    }

    pub fn sfa(
        window_lengths: Vec<usize>,
        word_length: usize,
        alphabet_size: usize,
        bigrams: bool,
    ) -> Self {
        Self {
            representation: Representation::Sfa,
            window_lengths,
            word_length,
            alphabet_size,
            binning: Binning::InformationGain,
            bigrams,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window_lengths.is_empty() {
            return Err(Error::invalid("symbolic config needs at least one window length"));
        }
        if self.alphabet_size < 2 {
            return Err(Error::invalid("alphabet size must be at least 2"));
        }
        let min_window = *self.window_lengths.iter().min().unwrap();
        if self.word_length == 0 || self.word_length > min_window {
            return Err(Error::invalid(format!(
                "word length {} must be in 1..={min_window}",
                self.word_length
            )));
        }
        match (self.representation, self.binning) {
            (Representation::Sax, Binning::Gaussian) | (Representation::Sfa, Binning::InformationGain) => {
                Ok(())
            }
            _ => Err(Error::invalid(
                "binning strategy does not match the representation (sax uses gaussian, sfa information gain)",
            )),
        }
    }
}

/// Inverse standard-normal CDF (Acklam's rational approximation, absolute
/// error below 1.2e-9 on (0, 1)).
pub(crate) fn inverse_normal_cdf(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    const A: [f64; 6] = [
        -39.696830286653757,
        220.94609842452050,
        -275.92851044696869,
        138.35775186726900,
        -30.664798066147160,
        2.5066282774592392,
    ];
    const B: [f64; 5] = [
        -54.476098798224058,
        161.58583685804089,
        -155.69897985988661,
        66.801311887719720,
        -13.280681552885721,
    ];
    const C: [f64; 6] = [
        -0.0077848940024302926,
        -0.32239645804113648,
        -2.4007582771618381,
        -2.5497325393437338,
        4.3746641414649678,
        2.9381639826987831,
    ];
    const D: [f64; 4] = [
        0.0077846957090414622,
        0.32246712907003983,
        2.4451341556158431,
        3.7544086619074162,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

/// Equiprobable standard-normal breakpoints for the given alphabet size.
pub fn gaussian_breakpoints(alphabet_size: usize) -> Vec<f64> {
    (1..alphabet_size)
        .map(|k| inverse_normal_cdf(k as f64 / alphabet_size as f64))
        .collect()
}

/// Symbol index: the number of breakpoints strictly below the value. A value
/// exactly on a breakpoint falls in the lower bin, which sends the all-zero
/// degenerate window to the median symbol ('a' for a two-letter alphabet).
pub(crate) fn symbol_for(value: f64, breakpoints: &[f64]) -> usize {
    breakpoints.iter().filter(|&&b| value > b).count()
}

pub(crate) fn symbol_char(index: usize) -> char {
    (b'a' + index as u8) as char
}

/// Piecewise aggregate approximation with integer segment boundaries
/// floor(k n / w).
pub(crate) fn paa(values: &[f64], segments: usize) -> Vec<f64> {
    let n = values.len();
    (0..segments)
        .map(|k| {
            let lo = k * n / segments;
            let hi = ((k + 1) * n / segments).max(lo + 1);
            values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

/// SAX word of one window.
pub fn sax_word(window: &[f64], word_length: usize, alphabet_size: usize) -> String {
    let normalized = zscore_values(window);
    let segments = paa(&normalized, word_length);
    let breakpoints = gaussian_breakpoints(alphabet_size);
    segments
        .iter()
        .map(|&v| symbol_char(symbol_for(v, &breakpoints)))
        .collect()
}

/// Bag of SAX words over every configured window length, with numerosity
/// reduction applied per window-length stream.
pub fn sax_words(series: &UnivariateSeries, cfg: &SymbolicConfig) -> Result<WordBag> {
    if cfg.representation != Representation::Sax {
        return Err(Error::invalid("sax_words requires a sax configuration"));
    }
    cfg.validate()?;
    let mut bag = WordBag::new();
    for &wl in &cfg.window_lengths {
        let mut previous: Option<String> = None;
        if series.len() < wl {
            continue;
        }
        for offset in 0..=series.len() - wl {
            let word = sax_word(&series.values[offset..offset + wl], cfg.word_length, cfg.alphabet_size);
            if previous.as_deref() == Some(word.as_str()) {
                continue;
            }
            *bag.entry(format!("sax:{wl}:{word}")).or_insert(0) += 1;
            previous = Some(word);
        }
    }
    Ok(bag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn inverse_normal_cdf_matches_reference_quantiles() {
        let cases = [
            (0.5, 0.0),
            (0.75, 0.674489750196),
            (0.9, 1.281551565545),
            (1.0 / 3.0, -0.430727299295),
            (0.025, -1.959963984540),
        ];
        for (p, expected) in cases {
            assert!(
                (inverse_normal_cdf(p) - expected).abs() < 1e-8,
                "p = {p}: {} vs {expected}",
                inverse_normal_cdf(p)
            );
        }
    }

    #[test]
    fn two_letter_breakpoints_are_zero() {
        let b = gaussian_breakpoints(2);
        assert_eq!(b.len(), 1);
        assert!(b[0].abs() < 1e-12);
    }

    #[test]
    fn monotone_ramp_maps_to_aabb() {
        let ramp: Vec<f64> = (0..16).map(|i| i as f64).collect();
        assert_eq!(sax_word(&ramp, 4, 2), "aabb");
    }

    #[test]
    fn constant_window_maps_to_median_symbol() {
        let flat = vec![3.5; 12];
        assert_eq!(sax_word(&flat, 3, 2), "aaa");
        assert_eq!(sax_word(&flat, 3, 3), "bbb");
        assert_eq!(sax_word(&flat, 3, 4), "bbb");
    }

    /// Plain scalar re-implementation used as the oracle: z-normalize,
    /// average equal integer segments, quantize against the same
    /// breakpoints.
    fn oracle_words(series: &[f64], wl: usize, word_length: usize, alphabet: usize) -> Vec<String> {
        let breakpoints = gaussian_breakpoints(alphabet);
        let mut out = Vec::new();
        for offset in 0..=series.len() - wl {
            let window = &series[offset..offset + wl];
            let mean = window.iter().sum::<f64>() / wl as f64;
            let var = window.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / wl as f64;
            let normalized: Vec<f64> = if var > 0.0 {
                window.iter().map(|v| (v - mean) / var.sqrt()).collect()
            } else {
                vec![0.0; wl]
            };
            let mut word = String::new();
            for k in 0..word_length {
                let lo = k * wl / word_length;
                let hi = ((k + 1) * wl / word_length).max(lo + 1);
                let seg = normalized[lo..hi].iter().sum::<f64>() / (hi - lo) as f64;
                let idx = breakpoints.iter().filter(|&&b| seg > b).count();
                word.push((b'a' + idx as u8) as char);
            }
            out.push(word);
        }
        out
    }

    #[test]
    fn bag_matches_scalar_reference_with_numerosity_reduction() {
        let values: Vec<f64> = (0..120).map(|i| ((i as f64) * 0.23).sin() * (1.0 + i as f64 / 90.0)).collect();
        let series = UnivariateSeries::new(values.clone()).unwrap();
        let cfg = SymbolicConfig::sax(vec![24], 4, 3);
        let bag = sax_words(&series, &cfg).unwrap();

        let raw = oracle_words(&values, 24, 4, 3);
        let mut expected = WordBag::new();
        let mut prev: Option<&String> = None;
        for w in &raw {
            if prev == Some(w) {
                continue;
            }
            *expected.entry(format!("sax:24:{w}")).or_insert(0) += 1;
            prev = Some(w);
        }
        assert_eq!(bag, expected);
    }

    #[test]
    fn multi_resolution_bags_are_disjoint_by_prefix() {
        let values: Vec<f64> = (0..64).map(|i| (i as f64 * 0.4).cos()).collect();
        let series = UnivariateSeries::new(values).unwrap();
        let cfg = SymbolicConfig::sax(vec![16, 32], 4, 3);
        let bag = sax_words(&series, &cfg).unwrap();
        assert!(bag.keys().any(|k| k.starts_with("sax:16:")));
        assert!(bag.keys().any(|k| k.starts_with("sax:32:")));
    }

    proptest! {
        #[test]
        fn words_are_invariant_under_positive_affine_maps(
            values in proptest::collection::vec(-4.0f64..4.0, 30..60),
            scale in 0.1f64..8.0,
            shift in -10.0f64..10.0
        ) {
            let cfg = SymbolicConfig::sax(vec![16], 4, 3);
            let base = UnivariateSeries::new(values.clone()).unwrap();
            let mapped = UnivariateSeries::new(
                values.iter().map(|v| v * scale + shift).collect()
            ).unwrap();
            let a = sax_words(&base, &cfg).unwrap();
            let b = sax_words(&mapped, &cfg).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
