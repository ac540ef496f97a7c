//! Bout-level digital mobility outcomes (DMOs) and per-window aggregation.
//!
//! The canonical descriptor set matches what full-featured gait analysis
//! tools report per walking bout. The native extractor fills only the
//! temporal subset it can derive from vertical acceleration peaks (steps,
//! step duration, step-duration asymmetry, cadence); spatial descriptors
//! require a biomechanical model and arrive only through
//! [`import_dmo_table`]. Aggregation sums steps over the bouts of a window
//! and averages every other available descriptor.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::segmentation::WalkingBout;
use crate::signal::UnivariateSeries;
use crate::tabular::TabularDataset;

/// Canonical descriptor names, in export order.
pub const FEATURE_NAMES: [&str; 20] = [
    "number_of_steps",
    "step_duration",
    "step_duration_asymmetry",
    "step_length",
    "step_length_asymmetry",
    "stride_length",
    "stride_length_asymmetry",
    "stride_duration",
    "stride_duration_asymmetry",
    "cadence",
    "initial_double_support",
    "terminal_double_support",
    "double_support_asymmetry",
    "single_limb_support",
    "single_limb_support_asymmetry",
    "stance",
    "stance_asymmetry",
    "swing",
    "swing_asymmetry",
    "gait_speed",
];

pub const N_FEATURES: usize = FEATURE_NAMES.len();

pub const STEPS: usize = 0;
pub const STEP_DURATION: usize = 1;
pub const STEP_DURATION_ASYMMETRY: usize = 2;
pub const CADENCE: usize = 9;

pub fn feature_index(name: &str) -> Option<usize> {
    FEATURE_NAMES.iter().position(|&n| n == name)
}

/// Asymmetries are normalized absolute differences and may legitimately be
/// produced by tools with sign conventions of their own; everything else is
/// a count, duration, length, speed or percentage and must be nonnegative.
fn must_be_nonnegative(feature: usize) -> bool {
    !FEATURE_NAMES[feature].ends_with("asymmetry")
}

/// Identifies the bout a record describes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoutRef {
    pub subject_id: String,
    pub window_index: usize,
    pub bout_index: usize,
}

/// Descriptor values for one walking bout. `None` marks an unavailable
/// feature, excluded from aggregation and modeling.
#[derive(Debug, Clone)]
pub struct DmoRecord {
    pub bout: BoutRef,
    pub values: [Option<f64>; N_FEATURES],
    /// Bout duration in seconds; bookkeeping, not one of the descriptors.
    pub duration_s: Option<f64>,
}

impl DmoRecord {
    pub fn get(&self, name: &str) -> Option<f64> {
        feature_index(name).and_then(|i| self.values[i])
    }
}

/// Per-window aggregation of the records of its bouts.
#[derive(Debug, Clone)]
pub struct WindowDmo {
    pub subject_id: String,
    pub window_index: usize,
    pub n_bouts: usize,
    pub values: [Option<f64>; N_FEATURES],
}

/// Peak-detection settings for the native extractor.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepDetectionConfig {
    /// Rolling-mean window, seconds.
    pub rolling_window_s: f64,
    /// Threshold above the rolling mean, in units of the bout's global
    /// standard deviation.
    pub threshold_k: f64,
    /// Minimum spacing between accepted peaks, seconds.
    pub min_peak_distance_s: f64,
}

impl Default for StepDetectionConfig {
    fn default() -> Self {
        Self {
            rolling_window_s: 1.0,
            threshold_k: 0.5,
            min_peak_distance_s: 0.25,
        }
    }
}

fn rolling_mean(x: &[f64], half_window: usize) -> Vec<f64> {
    let n = x.len();
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for &v in x {
        prefix.push(prefix.last().unwrap() + v);
    }
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half_window);
            let hi = (i + half_window + 1).min(n);
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

/// Plateau-aware local maxima above a rolling-mean + k·sigma threshold with
/// a minimum inter-peak spacing. Returns ascending sample indices.
pub fn detect_steps(values: &[f64], sample_rate_hz: f64, cfg: &StepDetectionConfig) -> Vec<usize> {
    let n = values.len();
    if n < 3 {
        return Vec::new();
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let sigma = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
    let half_window = ((cfg.rolling_window_s * sample_rate_hz / 2.0).round() as usize).max(1);
    let baseline = rolling_mean(values, half_window);

    // Plateau-aware local maxima.
    let mut candidates = Vec::new();
    let mut i = 1;
    while i < n - 1 {
        if values[i] > values[i - 1] {
            let mut j = i;
            while j + 1 < n && values[j + 1] == values[i] {
                j += 1;
            }
            if j + 1 < n && values[j + 1] < values[i] {
                let peak = (i + j) / 2;
                if values[peak] > baseline[peak] + cfg.threshold_k * sigma {
                    candidates.push(peak);
                }
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }

    // Enforce spacing, keeping the tallest peaks first.
    let min_dist = (cfg.min_peak_distance_s * sample_rate_hz).round() as usize;
    let mut order = candidates.clone();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let mut kept: Vec<usize> = Vec::new();
    for p in order {
        if kept.iter().all(|&q| p.abs_diff(q) >= min_dist) {
            kept.push(p);
        }
    }
    kept.sort_unstable();
    kept
}

/// Native extractor: detect steps on the bout's vertical-acceleration series
/// and fill the temporal descriptor subset. With fewer than two peaks the
/// interval descriptors stay masked.
pub fn extract_basic_dmos(
    bout: &WalkingBout,
    channel: &UnivariateSeries,
    sample_rate_hz: f64,
    cfg: &StepDetectionConfig,
    bout_index: usize,
) -> Result<DmoRecord> {
    if channel.len() != bout.n_samples() {
        return Err(Error::invalid(format!(
            "bout channel length {} does not match bout span {}",
            channel.len(),
            bout.n_samples()
        )));
    }
    let duration_s = bout.duration_s(sample_rate_hz);
    let peaks = detect_steps(&channel.values, sample_rate_hz, cfg);
    let steps = peaks.len();

    let mut values = [None; N_FEATURES];
    values[STEPS] = Some(steps as f64);
    values[CADENCE] = Some(60.0 * steps as f64 / duration_s);

    if steps >= 2 {
        let intervals: Vec<f64> = peaks
            .windows(2)
            .map(|w| (w[1] - w[0]) as f64 / sample_rate_hz)
            .collect();
        let mean_all = intervals.iter().sum::<f64>() / intervals.len() as f64;
        values[STEP_DURATION] = Some(mean_all);
        if intervals.len() >= 2 {
            let (even, odd): (Vec<f64>, Vec<f64>) = intervals
                .iter()
                .enumerate()
                .fold((Vec::new(), Vec::new()), |(mut e, mut o), (i, &v)| {
                    if i % 2 == 0 {
                        e.push(v)
                    } else {
                        o.push(v)
                    }
                    (e, o)
                });
            let mean_even = even.iter().sum::<f64>() / even.len() as f64;
            let mean_odd = odd.iter().sum::<f64>() / odd.len() as f64;
            values[STEP_DURATION_ASYMMETRY] = Some((mean_even - mean_odd).abs() / mean_all);
        }
    }

    Ok(DmoRecord {
        bout: BoutRef {
            subject_id: bout.subject_id.clone(),
            window_index: bout.window_index,
            bout_index,
        },
        values,
        duration_s: Some(duration_s),
    })
}

/// Aggregate the records of one window: steps are summed, every other
/// descriptor is averaged over the bouts where it is available. A feature
/// masked in every bout stays masked.
pub fn aggregate_window_dmos(records: &[DmoRecord]) -> Result<WindowDmo> {
    let first = records
        .first()
        .ok_or_else(|| Error::invalid("cannot aggregate an empty record set"))?;
    for r in records {
        if r.bout.subject_id != first.bout.subject_id || r.bout.window_index != first.bout.window_index
        {
            return Err(Error::invalid(
                "all records of an aggregation must reference the same window",
            ));
        }
    }
    let mut values = [None; N_FEATURES];
    for f in 0..N_FEATURES {
        let available: Vec<f64> = records.iter().filter_map(|r| r.values[f]).collect();
        if available.is_empty() {
            continue;
        }
        let agg = if f == STEPS {
            available.iter().sum()
        } else {
            available.iter().sum::<f64>() / available.len() as f64
        };
        values[f] = Some(agg);
    }
    Ok(WindowDmo {
        subject_id: first.bout.subject_id.clone(),
        window_index: first.bout.window_index,
        n_bouts: records.len(),
        values,
    })
}

/// Read a DMO table (`subject,window_index,bout_index,<feature columns>`).
/// The availability mask reflects the columns present in the file; empty
/// cells stay masked. Unknown columns and malformed or negative values are
/// rejected with their location.
pub fn import_dmo_table(path: impl AsRef<Path>) -> Result<Vec<DmoRecord>> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let cols: Vec<&str> = headers.iter().map(|h| h.trim()).collect();
    if cols.len() < 3 || cols[0] != "subject" || cols[1] != "window_index" || cols[2] != "bout_index"
    {
        return Err(Error::schema(
            &display,
            "header must start with subject,window_index,bout_index",
        ));
    }
    let mut feature_cols = Vec::new();
    for (c, name) in cols.iter().enumerate().skip(3) {
        let idx = feature_index(name)
            .ok_or_else(|| Error::schema(&display, format!("unknown DMO column {name:?}")))?;
        feature_cols.push((c, idx));
    }

    let mut records = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 2;
        let subject_id = record
            .get(0)
            .ok_or_else(|| Error::schema(&display, format!("row {row}: missing subject")))?
            .trim()
            .to_string();
        let window_index = parse_index(&record, 1, row, &display)?;
        let bout_index = parse_index(&record, 2, row, &display)?;
        let mut values = [None; N_FEATURES];
        for &(c, f) in &feature_cols {
            let raw = record.get(c).unwrap_or("").trim();
            if raw.is_empty() {
                continue;
            }
            let v: f64 = raw.parse().map_err(|_| {
                Error::schema(
                    &display,
                    format!("row {row}, column {:?}: not a number: {raw:?}", FEATURE_NAMES[f]),
                )
            })?;
            if must_be_nonnegative(f) && v < 0.0 {
                return Err(Error::schema(
                    &display,
                    format!("row {row}, column {:?}: negative value {v}", FEATURE_NAMES[f]),
                ));
            }
            if f == STEPS && v < 1.0 {
                return Err(Error::schema(
                    &display,
                    format!("row {row}: number_of_steps must be at least 1, found {v}"),
                ));
            }
            values[f] = Some(v);
        }
        records.push(DmoRecord {
            bout: BoutRef {
                subject_id,
                window_index,
                bout_index,
            },
            values,
            duration_s: None,
        });
    }
    Ok(records)
}

/// Write bout-level DMO records with the full canonical column set; masked
/// cells are left empty.
pub fn write_dmo_csv(path: impl AsRef<Path>, records: &[DmoRecord]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path.as_ref())?;
    let mut header = vec!["subject", "window_index", "bout_index"];
    header.extend(FEATURE_NAMES);
    writer.write_record(&header)?;
    for r in records {
        let mut row = vec![
            r.bout.subject_id.clone(),
            r.bout.window_index.to_string(),
            r.bout.bout_index.to_string(),
        ];
        for v in &r.values {
            row.push(v.map(|x| format!("{x}")).unwrap_or_default());
        }
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Write window-level aggregated DMOs (`subject,window_index,n_bouts,<features>`).
pub fn write_window_dmo_csv(path: impl AsRef<Path>, windows: &[WindowDmo]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path.as_ref())?;
    let mut header = vec!["subject", "window_index", "n_bouts"];
    header.extend(FEATURE_NAMES);
    writer.write_record(&header)?;
    for w in windows {
        let mut row = vec![
            w.subject_id.clone(),
            w.window_index.to_string(),
            w.n_bouts.to_string(),
        ];
        for v in &w.values {
            row.push(v.map(|x| format!("{x}")).unwrap_or_default());
        }
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Read window-level aggregated DMOs written by [`write_window_dmo_csv`].
pub fn read_window_dmo_csv(path: impl AsRef<Path>) -> Result<Vec<WindowDmo>> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let cols: Vec<&str> = headers.iter().map(|h| h.trim()).collect();
    if cols.len() < 3 || cols[0] != "subject" || cols[1] != "window_index" || cols[2] != "n_bouts" {
        return Err(Error::schema(
            &display,
            "header must start with subject,window_index,n_bouts",
        ));
    }
    let mut feature_cols = Vec::new();
    for (c, name) in cols.iter().enumerate().skip(3) {
        let idx = feature_index(name)
            .ok_or_else(|| Error::schema(&display, format!("unknown DMO column {name:?}")))?;
        feature_cols.push((c, idx));
    }
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 2;
        let subject_id = record
            .get(0)
            .ok_or_else(|| Error::schema(&display, format!("row {row}: missing subject")))?
            .trim()
            .to_string();
        let window_index = parse_index(&record, 1, row, &display)?;
        let n_bouts = parse_index(&record, 2, row, &display)?;
        let mut values = [None; N_FEATURES];
        for &(c, f) in &feature_cols {
            let raw = record.get(c).unwrap_or("").trim();
            if raw.is_empty() {
                continue;
            }
            let v: f64 = raw
                .parse()
                .map_err(|_| Error::schema(&display, format!("row {row}: bad value {raw:?}")))?;
            values[f] = Some(v);
        }
        out.push(WindowDmo {
            subject_id,
            window_index,
            n_bouts,
            values,
        });
    }
    Ok(out)
}

fn parse_index(record: &csv::StringRecord, col: usize, row: usize, path: &str) -> Result<usize> {
    let raw = record
        .get(col)
        .ok_or_else(|| Error::schema(path, format!("row {row}: missing column {col}")))?;
    raw.trim()
        .parse::<usize>()
        .map_err(|_| Error::schema(path, format!("row {row}, column {col}: not an index: {raw:?}")))
}

/// Per-column standardization fitted on training rows only; the parameters
/// are kept so validation rows can be mapped with the same statistics.
/// Zero-variance columns map to zeros.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZscoreScaler {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl ZscoreScaler {
    pub fn fit(data: &TabularDataset) -> Result<Self> {
        if data.n() < 2 {
            return Err(Error::invalid("z-score fitting requires at least 2 rows"));
        }
        let n = data.n() as f64;
        let d = data.d();
        let mut means = vec![0.0; d];
        for row in &data.x {
            for (m, v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= n;
        }
        let mut stds = vec![0.0; d];
        for row in &data.x {
            for j in 0..d {
                stds[j] += (row[j] - means[j]).powi(2);
            }
        }
        for s in &mut stds {
            *s = (*s / n).sqrt();
        }
        Ok(Self { means, stds })
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(&v, (&m, &s))| if s > 0.0 { (v - m) / s } else { 0.0 })
            .collect()
    }

    pub fn transform(&self, data: &TabularDataset) -> Result<TabularDataset> {
        if data.d() != self.means.len() {
            return Err(Error::invalid(format!(
                "scaler fitted on {} features, dataset has {}",
                self.means.len(),
                data.d()
            )));
        }
        let x = data.x.iter().map(|row| self.transform_row(row)).collect();
        Ok(TabularDataset {
            x,
            y: data.y.clone(),
            subjects: data.subjects.clone(),
            feature_names: data.feature_names.clone(),
        })
    }
}

/// Standardize a feature matrix, returning the transformed training data and
/// the fitted scaler for validation rows.
pub fn zscore_feature_matrix(train: &TabularDataset) -> Result<(TabularDataset, ZscoreScaler)> {
    let scaler = ZscoreScaler::fit(train)?;
    let transformed = scaler.transform(train)?;
    Ok((transformed, scaler))
}
