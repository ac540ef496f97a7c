//! Random convolutional kernel transform.
//!
//! Each kernel has length 7, 9 or 11, mean-centered Gaussian weights, a
//! uniform bias in (-1, 1), a dilation drawn as floor(2^a) with
//! a ~ U(0, log2((L_in - 1) / (L_k - 1))), and a random zero-padding flag.
//! Every (series, kernel) pair contributes two features: the proportion of
//! positive convolution outputs (PPV) and the maximum output.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tabular::TabularDataset;
use crate::tsc::SeriesDataset;

const KERNEL_LENGTHS: [usize; 3] = [7, 9, 11];

#[derive(Debug, Clone)]
pub struct RocketKernel {
    pub length: usize,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub dilation: usize,
    pub padding: bool,
}

impl RocketKernel {
    fn pad(&self) -> usize {
        if self.padding {
            ((self.length - 1) * self.dilation) / 2
        } else {
            0
        }
    }
}

/// Seeded descriptor from which a bank can be regenerated bit-identically.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BankDescriptor {
    pub schema_version: u32,
    pub seed: u64,
    pub num_kernels: usize,
    pub input_len: usize,
}

#[derive(Debug, Clone)]
pub struct RocketKernelBank {
    pub kernels: Vec<RocketKernel>,
    pub seed: u64,
    pub input_len: usize,
}

impl RocketKernelBank {
    /// Draw a bank for series of length `input_len`. All sampling happens in
    /// a fixed per-kernel order from one seeded stream, so a given
    /// (seed, num_kernels, input_len) triple always produces the same bank.
    pub fn generate(num_kernels: usize, input_len: usize, seed: u64) -> Result<Self> {
        if num_kernels == 0 {
            return Err(Error::invalid("kernel count must be positive"));
        }
        if input_len < 2 {
            return Err(Error::invalid("input length must be at least 2"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut kernels = Vec::with_capacity(num_kernels);
        for _ in 0..num_kernels {
            let length = KERNEL_LENGTHS[rng.random_range(0..KERNEL_LENGTHS.len())];
            let mut weights: Vec<f64> = (0..length)
                .map(|_| <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
                .collect();
            let mean = weights.iter().sum::<f64>() / length as f64;
            for w in &mut weights {
                *w -= mean;
            }
            let bias = rng.random_range(-1.0..1.0);
            let max_exponent = ((input_len - 1) as f64 / (length - 1) as f64).log2();
            let exponent = rng.random_range(0.0..=max_exponent.max(0.0));
            let dilation = (exponent.exp2().floor() as usize).max(1);
            let padding = rng.random_range(0..2) == 1;
            kernels.push(RocketKernel {
                length,
                weights,
                bias,
                dilation,
                padding,
            });
        }
        Ok(Self {
            kernels,
            seed,
            input_len,
        })
    }

    pub fn descriptor(&self) -> BankDescriptor {
        BankDescriptor {
            schema_version: 1,
            seed: self.seed,
            num_kernels: self.kernels.len(),
            input_len: self.input_len,
        }
    }

    pub fn from_descriptor(d: &BankDescriptor) -> Result<Self> {
        Self::generate(d.num_kernels, d.input_len, d.seed)
    }

    pub fn num_kernels(&self) -> usize {
        self.kernels.len()
    }
}

/// Dilated convolution features for one (series, kernel) pair, or `None`
/// when the kernel's effective extent exceeds the unpadded series.
///
/// The convolution accumulates tap-major into `buf`: per tap, one
/// contiguous streaming multiply-add over the overlap of the (virtually
/// zero-padded) input with the output range, which vectorizes well and
/// needs no per-position branching.
fn apply_kernel_into(values: &[f64], kernel: &RocketKernel, buf: &mut Vec<f64>) -> Option<(f64, f64)> {
    let n = values.len();
    let pad = kernel.pad();
    let dilation = kernel.dilation;
    let extent = (kernel.length - 1) * dilation;
    let out_len = (n + 2 * pad).checked_sub(extent).filter(|&l| l > 0)?;

    buf.clear();
    buf.resize(out_len, kernel.bias);
    for (j, &w) in kernel.weights.iter().enumerate() {
        // Output position i reads x[i + j*dilation - pad]; restrict to the
        // in-bounds overlap.
        let shift = j * dilation;
        let lo = pad.saturating_sub(shift).min(out_len);
        let hi = (n + pad).saturating_sub(shift).min(out_len).max(lo);
        if hi == lo {
            continue;
        }
        let src = shift + lo - pad;
        for (o, &v) in buf[lo..hi].iter_mut().zip(&values[src..src + (hi - lo)]) {
            *o += w * v;
        }
    }

    let mut positive = 0usize;
    let mut max = f64::NEG_INFINITY;
    for &acc in buf.iter() {
        if acc > 0.0 {
            positive += 1;
        }
        if acc > max {
            max = acc;
        }
    }
    Some((positive as f64 / out_len as f64, max))
}

/// Transform a fixed-length dataset into 2 x num_kernels features (PPV and
/// max per kernel). Pairs where an unpadded kernel does not fit yield (0, 0)
/// and a warning on stderr.
pub fn rocket_transform(dataset: &SeriesDataset, bank: &RocketKernelBank) -> Result<TabularDataset> {
    dataset.fixed_len()?;
    let rows: Vec<(Vec<f64>, usize)> = dataset
        .series
        .par_iter()
        .map(|s| {
            let mut row = Vec::with_capacity(bank.kernels.len() * 2);
            let mut undefined = 0;
            let mut buf = Vec::new();
            for kernel in &bank.kernels {
                match apply_kernel_into(&s.values, kernel, &mut buf) {
                    Some((ppv, max)) => {
                        row.push(ppv);
                        row.push(max);
                    }
                    None => {
                        row.push(0.0);
                        row.push(0.0);
                        undefined += 1;
                    }
                }
            }
            (row, undefined)
        })
        .collect();

    let undefined: usize = rows.iter().map(|(_, u)| u).sum();
    if undefined > 0 {
        eprintln!(
            "warning: {undefined} series/kernel pairs were shorter than the unpadded kernel extent; their features default to (0, 0)"
        );
    }

    let mut feature_names = Vec::with_capacity(bank.kernels.len() * 2);
    for k in 0..bank.kernels.len() {
        feature_names.push(format!("k{k}_ppv"));
        feature_names.push(format!("k{k}_max"));
    }
    TabularDataset::new(
        rows.into_iter().map(|(r, _)| r).collect(),
        dataset.y.clone(),
        dataset.subjects.clone(),
        feature_names,
    )
}
