//! Minimal random convolutional kernel transform.
//!
//! The kernel space is fixed: all 84 ways to place three weights of value 2
//! among nine taps of value -1 (every kernel sums to zero). Per kernel, up
//! to 32 dilations follow the floor(2^x) law over uniformly spaced
//! exponents, and biases are quantiles of convolution outputs sampled from
//! the training split, which makes the transform training-dependent. All
//! features are PPV-only.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tabular::TabularDataset;
use crate::tsc::SeriesDataset;

const KERNEL_LEN: usize = 9;
const NUM_KERNELS: usize = 84;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MiniRocketConfig {
    /// Feature budget; the emitted count is the largest multiple of 84 that
    /// fits.
    pub num_features: usize,
    pub max_dilations_per_kernel: usize,
    pub seed: u64,
}

impl Default for MiniRocketConfig {
    fn default() -> Self {
        Self {
            num_features: 10_000,
            max_dilations_per_kernel: 32,
            seed: 0,
        }
    }
}

/// One dilation of one kernel with its fitted quantile biases.
#[derive(Debug, Clone)]
struct DilationPlan {
    dilation: usize,
    padding: bool,
    biases: Vec<f64>,
}

#[derive(Debug, Clone)]
struct FittedParams {
    input_len: usize,
    /// Index triples of the three positive taps per kernel.
    kernels: Vec<[usize; 3]>,
    /// Per kernel, the fitted dilation plans.
    plans: Vec<Vec<DilationPlan>>,
    n_features: usize,
}

#[derive(Debug, Clone)]
pub struct MiniRocketTransformer {
    cfg: MiniRocketConfig,
    fitted: Option<FittedParams>,
}

fn kernel_triples() -> Vec<[usize; 3]> {
    let mut out = Vec::with_capacity(NUM_KERNELS);
    for a in 0..KERNEL_LEN {
        for b in a + 1..KERNEL_LEN {
            for c in b + 1..KERNEL_LEN {
                out.push([a, b, c]);
            }
        }
    }
    debug_assert_eq!(out.len(), NUM_KERNELS);
    out
}

/// Dilated convolution of a {-1, 2} kernel over a zero-padded series,
/// accumulated tap-major as contiguous streaming multiply-adds.
fn convolve(values: &[f64], triple: &[usize; 3], dilation: usize, padding: bool) -> Vec<f64> {
    let n = values.len();
    let pad = if padding { (KERNEL_LEN - 1) * dilation / 2 } else { 0 };
    let extent = (KERNEL_LEN - 1) * dilation;
    let Some(out_len) = (n + 2 * pad).checked_sub(extent).filter(|&l| l > 0) else {
        return Vec::new();
    };
    let mut weights = [-1.0f64; KERNEL_LEN];
    for &j in triple {
        weights[j] = 2.0;
    }

    let mut out = vec![0.0; out_len];
    for (j, &w) in weights.iter().enumerate() {
        let shift = j * dilation;
        let lo = pad.saturating_sub(shift).min(out_len);
        let hi = (n + pad).saturating_sub(shift).min(out_len).max(lo);
        if hi == lo {
            continue;
        }
        let src = shift + lo - pad;
        for (o, &v) in out[lo..hi].iter_mut().zip(&values[src..src + (hi - lo)]) {
            *o += w * v;
        }
    }
    out
}

/// Linear-interpolation quantile of already sorted values.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let frac = pos - lo as f64;
    if lo + 1 < sorted.len() {
        sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac
    } else {
        sorted[lo]
    }
}

impl MiniRocketTransformer {
    pub fn new(cfg: MiniRocketConfig) -> Self {
        Self { cfg, fitted: None }
    }

    pub fn is_fitted(&self) -> bool {
        self.fitted.is_some()
    }

    pub fn n_features(&self) -> Option<usize> {
        self.fitted.as_ref().map(|f| f.n_features)
    }

    /// Unique dilations per kernel (after fitting).
    pub fn dilation_counts(&self) -> Option<Vec<usize>> {
        self.fitted
            .as_ref()
            .map(|f| f.plans.iter().map(|p| p.len()).collect())
    }

    /// Fit bias quantiles on the training split.
    pub fn fit(&mut self, train: &SeriesDataset) -> Result<()> {
        let input_len = train.fixed_len()?;
        if input_len < KERNEL_LEN {
            return Err(Error::invalid(format!(
                "series length {input_len} is shorter than the kernel length {KERNEL_LEN}"
            )));
        }
        let features_per_kernel = self.cfg.num_features / NUM_KERNELS;
        if features_per_kernel == 0 {
            return Err(Error::invalid(format!(
                "feature budget {} is below the kernel count {NUM_KERNELS}",
                self.cfg.num_features
            )));
        }
        let num_exponents = features_per_kernel.min(self.cfg.max_dilations_per_kernel).max(1);

        // floor(2^x) over uniformly spaced exponents in [0, max_exponent].
        let max_exponent = ((input_len - 1) as f64 / (KERNEL_LEN - 1) as f64).log2().max(0.0);
        let exponent_step = if num_exponents > 1 {
            max_exponent / (num_exponents - 1) as f64
        } else {
            0.0
        };
        let dilations: Vec<usize> = (0..num_exponents)
            .map(|i| ((exponent_step * i as f64).exp2().floor() as usize).max(1))
            .collect();

        // Per-exponent bias quota: features_per_kernel spread evenly with the
        // remainder on the earliest (smallest) dilations.
        let base = features_per_kernel / num_exponents;
        let remainder = features_per_kernel % num_exponents;
        let quotas: Vec<usize> = (0..num_exponents)
            .map(|i| base + usize::from(i < remainder))
            .collect();

        // Merge duplicate dilation values, summing their quotas.
        let mut merged: Vec<(usize, usize)> = Vec::new();
        for (d, q) in dilations.iter().zip(&quotas) {
            match merged.last_mut() {
                Some((prev, quota)) if prev == d => *quota += q,
                _ => merged.push((*d, *q)),
            }
        }

        let kernels = kernel_triples();
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        let mut plans: Vec<Vec<DilationPlan>> = Vec::with_capacity(NUM_KERNELS);
        for (k_idx, triple) in kernels.iter().enumerate() {
            let mut kernel_plans = Vec::with_capacity(merged.len());
            for (d_idx, &(dilation, quota)) in merged.iter().enumerate() {
                let padding = (k_idx + d_idx) % 2 == 0;
                let sample_idx = rng.random_range(0..train.n());
                let mut outputs = convolve(&train.series[sample_idx].values, triple, dilation, padding);
                if outputs.is_empty() {
                    // Padding off and the extent does not fit; fall back to
                    // the padded response for bias fitting.
                    outputs = convolve(&train.series[sample_idx].values, triple, dilation, true);
                }
                outputs.sort_by(f64::total_cmp);
                let biases: Vec<f64> = (0..quota)
                    .map(|i| quantile_sorted(&outputs, (i + 1) as f64 / (quota + 1) as f64))
                    .collect();
                kernel_plans.push(DilationPlan {
                    dilation,
                    padding,
                    biases,
                });
            }
            plans.push(kernel_plans);
        }

        self.fitted = Some(FittedParams {
            input_len,
            kernels,
            n_features: NUM_KERNELS * features_per_kernel,
            plans,
        });
        Ok(())
    }

    /// PPV features over the fitted (kernel, dilation, bias) grid.
    pub fn transform(&self, data: &SeriesDataset) -> Result<TabularDataset> {
        let fitted = self
            .fitted
            .as_ref()
            .ok_or_else(|| Error::NotFitted("minirocket biases have not been fitted".into()))?;
        let len = data.fixed_len()?;
        if len != fitted.input_len {
            return Err(Error::invalid(format!(
                "transformer fitted on length {}, dataset has length {len}",
                fitted.input_len
            )));
        }

        let rows: Vec<Vec<f64>> = data
            .series
            .par_iter()
            .map(|s| {
                let mut row = Vec::with_capacity(fitted.n_features);
                for (triple, plans) in fitted.kernels.iter().zip(&fitted.plans) {
                    for plan in plans {
                        let outputs = convolve(&s.values, triple, plan.dilation, plan.padding);
                        if outputs.is_empty() {
                            row.extend(std::iter::repeat_n(0.0, plan.biases.len()));
                            continue;
                        }
                        for &bias in &plan.biases {
                            let ppv = outputs.iter().filter(|&&v| v > bias).count() as f64
                                / outputs.len() as f64;
                            row.push(ppv);
                        }
                    }
                }
                row
            })
            .collect();

        let mut feature_names = Vec::with_capacity(fitted.n_features);
        for (k, plans) in fitted.plans.iter().enumerate() {
            for (d, plan) in plans.iter().enumerate() {
                for b in 0..plan.biases.len() {
                    feature_names.push(format!("mk{k}_d{d}_b{b}"));
                }
            }
        }
        TabularDataset::new(rows, data.y.clone(), data.subjects.clone(), feature_names)
    }
}
