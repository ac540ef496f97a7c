//! Raw-signal time-series classifiers: random convolutional kernel
//! transforms (full and minimal variants), 1-nearest-neighbor dynamic time
//! warping, and symbolic bag-of-patterns linear classifiers over SAX and SFA
//! words.
//!
//! Transforms are embarrassingly parallel across series and produce results
//! independent of work partitioning; fitted transforms are immutable and can
//! be shared across threads.

mod dtw;
mod minirocket;
mod rocket;
mod sax;
mod sfa;
mod symbolic;

pub use dtw::{dtw_distance, dtw_distance_slices, knn1_dtw_fit_predict};
pub use minirocket::{MiniRocketConfig, MiniRocketTransformer};
pub use rocket::{rocket_transform, BankDescriptor, RocketKernel, RocketKernelBank};
pub use sax::{gaussian_breakpoints, sax_word, sax_words, Representation, SymbolicConfig};
pub use sfa::{fit_sfa, SfaModel};
pub use symbolic::{fit_symbolic_linear, SymbolicLinearConfig, SymbolicLinearModel};

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::segmentation::ContextClass;
use crate::signal::UnivariateSeries;

/// Multiset of symbolic words. Ordered keys keep vocabularies deterministic.
pub type WordBag = BTreeMap<String, u32>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum LengthMode {
    Fixed,
    Variable,
}

/// A labeled collection of univariate series.
#[derive(Debug, Clone)]
pub struct SeriesDataset {
    pub series: Vec<UnivariateSeries>,
    pub y: Vec<ContextClass>,
    pub subjects: Vec<String>,
    pub length_mode: LengthMode,
}

impl SeriesDataset {
    pub fn new(
        series: Vec<UnivariateSeries>,
        y: Vec<ContextClass>,
        subjects: Vec<String>,
        length_mode: LengthMode,
    ) -> Result<Self> {
        if series.is_empty() {
            return Err(Error::invalid("series dataset must be non-empty"));
        }
        if y.len() != series.len() || subjects.len() != series.len() {
            return Err(Error::invalid("labels and subjects must match the series count"));
        }
        if length_mode == LengthMode::Fixed {
            let len = series[0].len();
            if series.iter().any(|s| s.len() != len) {
                return Err(Error::invalid(
                    "fixed length mode requires all series to have equal length",
                ));
            }
        }
        Ok(Self {
            series,
            y,
            subjects,
            length_mode,
        })
    }

    pub fn n(&self) -> usize {
        self.series.len()
    }

    /// Common length of a fixed-length dataset.
    pub fn fixed_len(&self) -> Result<usize> {
        if self.length_mode != LengthMode::Fixed {
            return Err(Error::invalid("operation requires a fixed-length dataset"));
        }
        Ok(self.series[0].len())
    }

    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let mut series = Vec::with_capacity(indices.len());
        let mut y = Vec::with_capacity(indices.len());
        let mut subjects = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.n() {
                return Err(Error::invalid(format!("series index {i} out of bounds")));
            }
            series.push(self.series[i].clone());
            y.push(self.y[i]);
            subjects.push(self.subjects[i].clone());
        }
        Self::new(series, y, subjects, self.length_mode)
    }
}
