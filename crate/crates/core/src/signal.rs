//! Fundamental signal types and channel/shape transformations.
//!
//! An [`InertialStream`] is the raw tri-axial acceleration record of one
//! subject, sampled uniformly (nominally 100 Hz). Every downstream stage
//! works on [`UnivariateSeries`] values extracted from it: either a single
//! axis (the "vertical" channel, which depends on sensor mounting) or the
//! per-sample Euclidean magnitude.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum deviation from uniform sample spacing tolerated at ingestion, in
/// seconds.
pub const UNIFORMITY_TOL_S: f64 = 1e-6;

/// Sensor axis selector. Which axis is "vertical" depends on how the sensor
/// was mounted, so it is configuration, never hard-coded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            other => Err(Error::invalid(format!(
                "unknown axis selector {other:?} (expected x, y or z)"
            ))),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::X => write!(f, "x"),
            Axis::Y => write!(f, "y"),
            Axis::Z => write!(f, "z"),
        }
    }
}

/// Uniformly sampled tri-axial acceleration record for one subject.
#[derive(Debug, Clone)]
pub struct InertialStream {
    pub subject_id: String,
    pub sample_rate_hz: f64,
    /// Epoch seconds of the first sample.
    pub start_time: f64,
    /// One `(acc_x, acc_y, acc_z)` triple per sample.
    pub samples: Vec<[f64; 3]>,
}

impl InertialStream {
    pub fn new(
        subject_id: impl Into<String>,
        sample_rate_hz: f64,
        start_time: f64,
        samples: Vec<[f64; 3]>,
    ) -> Result<Self> {
        if !(sample_rate_hz > 0.0) {
            return Err(Error::invalid("sample_rate_hz must be positive"));
        }
        if samples.is_empty() {
            return Err(Error::invalid("inertial stream must contain samples"));
        }
        Ok(Self {
            subject_id: subject_id.into(),
            sample_rate_hz,
            start_time,
            samples,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }
}

/// Provenance of a series: where in the pipeline it was cut from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SeriesMeta {
    pub subject_id: Option<String>,
    pub window_index: Option<usize>,
    pub bout_index: Option<usize>,
}

/// A single real-valued, uniformly sampled signal.
#[derive(Debug, Clone, PartialEq)]
pub struct UnivariateSeries {
    pub values: Vec<f64>,
    pub meta: SeriesMeta,
}

impl UnivariateSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("series must be non-empty"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("series values must be finite"));
        }
        Ok(Self {
            values,
            meta: SeriesMeta::default(),
        })
    }

    pub fn with_meta(mut self, meta: SeriesMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Project one axis out of the stream.
pub fn vertical_channel(stream: &InertialStream, axis: Axis) -> Result<UnivariateSeries> {
    if stream.samples.is_empty() {
        return Err(Error::invalid("cannot extract a channel from an empty stream"));
    }
    let idx = match axis {
        Axis::X => 0,
        Axis::Y => 1,
        Axis::Z => 2,
    };
    let values = stream.samples.iter().map(|s| s[idx]).collect();
    Ok(UnivariateSeries {
        values,
        meta: SeriesMeta {
            subject_id: Some(stream.subject_id.clone()),
            ..SeriesMeta::default()
        },
    })
}

/// Element-wise Euclidean norm of the three axes.
pub fn magnitude_channel(stream: &InertialStream) -> Result<UnivariateSeries> {
    if stream.samples.is_empty() {
        return Err(Error::invalid("cannot extract a channel from an empty stream"));
    }
    let values = stream
        .samples
        .iter()
        .map(|&[x, y, z]| (x * x + y * y + z * z).sqrt())
        .collect();
    Ok(UnivariateSeries {
        values,
        meta: SeriesMeta {
            subject_id: Some(stream.subject_id.clone()),
            ..SeriesMeta::default()
        },
    })
}

/// Standardize to mean 0 and population variance 1. A constant series maps
/// to all zeros instead of dividing by zero.
pub fn zscore(series: &UnivariateSeries) -> UnivariateSeries {
    let values = zscore_values(&series.values);
    UnivariateSeries {
        values,
        meta: series.meta.clone(),
    }
}

/// [`zscore`] on a bare slice; shared with the window-level SAX transform.
pub(crate) fn zscore_values(values: &[f64]) -> Vec<f64> {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    if var > 0.0 {
        let std = var.sqrt();
        values.iter().map(|v| (v - mean) / std).collect()
    } else {
        vec![0.0; values.len()]
    }
}

/// Zero-pad to `target_len`, keeping the original values contiguous and
/// centered. Odd slack puts the extra zero on the trailing side.
pub fn pad_to_length(series: &UnivariateSeries, target_len: usize) -> Result<UnivariateSeries> {
    let n = series.len();
    if n > target_len {
        return Err(Error::invalid(format!(
            "series of length {n} cannot be padded to shorter length {target_len}"
        )));
    }
    let slack = target_len - n;
    let leading = slack / 2;
    let mut values = vec![0.0; target_len];
    values[leading..leading + n].copy_from_slice(&series.values);
    Ok(UnivariateSeries {
        values,
        meta: series.meta.clone(),
    })
}

/// Linearly resample to `target_len` over a uniform parameterization of
/// [0, 1]. Endpoints are preserved exactly.
pub fn resample_to_length(series: &UnivariateSeries, target_len: usize) -> Result<UnivariateSeries> {
    let n = series.len();
    if n < 2 {
        return Err(Error::invalid("resampling requires at least 2 samples"));
    }
    if target_len < 2 {
        return Err(Error::invalid("resample target length must be at least 2"));
    }
    if target_len == n {
        return Ok(series.clone());
    }
    let src = &series.values;
    let mut values = Vec::with_capacity(target_len);
    let scale = (n - 1) as f64 / (target_len - 1) as f64;
    for j in 0..target_len {
        if j == target_len - 1 {
            values.push(src[n - 1]);
            continue;
        }
        let pos = j as f64 * scale;
        let i = pos.floor() as usize;
        let frac = pos - i as f64;
        let v = if frac == 0.0 {
            src[i]
        } else {
            src[i] * (1.0 - frac) + src[i + 1] * frac
        };
        values.push(v);
    }
    Ok(UnivariateSeries {
        values,
        meta: series.meta.clone(),
    })
}

/// Read an IMU CSV with header `t,acc_x,acc_y,acc_z`. Timestamps must be
/// uniformly spaced within [`UNIFORMITY_TOL_S`].
pub fn read_imu_csv(path: impl AsRef<Path>, subject_id: &str) -> Result<InertialStream> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let mut reader = csv::Reader::from_path(path)?;
    expect_headers(&mut reader, &display, &["t", "acc_x", "acc_y", "acc_z"])?;

    let mut times = Vec::new();
    let mut samples = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 2; // 1-based, after the header
        let t = parse_field(&record, 0, row, &display)?;
        let x = parse_field(&record, 1, row, &display)?;
        let y = parse_field(&record, 2, row, &display)?;
        let z = parse_field(&record, 3, row, &display)?;
        times.push(t);
        samples.push([x, y, z]);
    }
    if samples.is_empty() {
        return Err(Error::schema(&display, "no samples"));
    }
    if samples.len() == 1 {
        return Err(Error::schema(&display, "cannot infer sample rate from one sample"));
    }

    let n = times.len();
    let dt = (times[n - 1] - times[0]) / (n - 1) as f64;
    if !(dt > 0.0) {
        return Err(Error::schema(&display, "timestamps must be strictly increasing"));
    }
    for i in 1..n {
        let step = times[i] - times[i - 1];
        if (step - dt).abs() > UNIFORMITY_TOL_S {
            return Err(Error::schema(
                &display,
                format!(
                    "non-uniform sampling at row {}: step {:.9}s vs expected {:.9}s",
                    i + 2,
                    step,
                    dt
                ),
            ));
        }
    }

    InertialStream::new(subject_id, 1.0 / dt, times[0], samples)
}

/// Write an IMU CSV in the format read back by [`read_imu_csv`].
pub fn write_imu_csv(path: impl AsRef<Path>, stream: &InertialStream) -> Result<()> {
    let mut writer = csv::Writer::from_path(path.as_ref())?;
    writer.write_record(["t", "acc_x", "acc_y", "acc_z"])?;
    let dt = 1.0 / stream.sample_rate_hz;
    for (i, s) in stream.samples.iter().enumerate() {
        let t = stream.start_time + i as f64 * dt;
        writer.write_record([
            format!("{t}"),
            format!("{}", s[0]),
            format!("{}", s[1]),
            format!("{}", s[2]),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

pub(crate) fn expect_headers(
    reader: &mut csv::Reader<std::fs::File>,
    path: &str,
    expected: &[&str],
) -> Result<()> {
    let headers = reader.headers()?.clone();
    let got: Vec<&str> = headers.iter().map(|h| h.trim()).collect();
    if got != expected {
        return Err(Error::schema(
            path,
            format!("expected header {expected:?}, found {got:?}"),
        ));
    }
    Ok(())
}

pub(crate) fn parse_field(
    record: &csv::StringRecord,
    col: usize,
    row: usize,
    path: &str,
) -> Result<f64> {
    let raw = record.get(col).ok_or_else(|| {
        Error::schema(path, format!("row {row}: missing column {col}"))
    })?;
    raw.trim().parse::<f64>().map_err(|_| {
        Error::schema(
            path,
            format!("row {row}, column {col}: not a number: {raw:?}"),
        )
    })
}
