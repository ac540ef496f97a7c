//! Indoor/outdoor context detection for lower-back IMU gait recordings.
//!
//! The crate covers the full workflow from raw sensor data to evaluated
//! classifiers:
//!
//! - [`signal`]: tri-axial streams, channel extraction, padding/resampling.
//! - [`context`]: GPS staypoint detection and 1 Hz indoor-probability labels.
//! - [`segmentation`]: fixed windows, majority-vote labels, gait epochs and
//!   walking bouts.
//! - [`dmo`]: bout-level digital mobility outcomes and per-window aggregation.
//! - [`tabular`]: feature-based classifiers (logistic, ridge, k-NN, GNB).
//! - [`tsc`]: raw-signal classifiers (random convolution kernels, 1NN-DTW,
//!   symbolic bag-of-patterns).
//! - [`eval`]: stratified / leave-one-subject-out cross-validation and macro
//!   metrics.
//! - [`synth`]: seeded generator of desk-scale IMU+GPS scenarios with known
//!   ground truth.
//! - [`pipeline`]: glue that turns streams and labels into the four datasets
//!   (window/bout × tabular/series).

pub mod context;
pub mod dmo;
pub mod error;
pub mod eval;
pub mod pipeline;
pub mod segmentation;
pub mod signal;
pub mod synth;
pub mod tabular;
pub mod tsc;

pub use error::{Error, Result};
