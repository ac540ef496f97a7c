//! Windowing, majority-vote labeling, gait epoch detection and walking-bout
//! extraction.
//!
//! Streams are chunked into non-overlapping fixed windows (1 minute by
//! default), each labeled by the most frequent per-second context value.
//! Windows are tiled by 3 s epochs classified gait/non-gait with a
//! transparent energy + periodicity heuristic; maximal runs of gait epochs
//! become walking bouts. Externally produced bout boundaries can be injected
//! through the annotation CSV instead of the heuristic.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::context::ContextLabelStream;
use crate::error::{Error, Result};
use crate::signal::{InertialStream, SeriesMeta, UnivariateSeries};

/// Binary activity context.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ContextClass {
    Outdoor,
    Indoor,
}

impl ContextClass {
    pub const ALL: [ContextClass; 2] = [ContextClass::Outdoor, ContextClass::Indoor];

    pub fn index(self) -> usize {
        match self {
            ContextClass::Outdoor => 0,
            ContextClass::Indoor => 1,
        }
    }
}

impl fmt::Display for ContextClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContextClass::Indoor => write!(f, "indoor"),
            ContextClass::Outdoor => write!(f, "outdoor"),
        }
    }
}

impl FromStr for ContextClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "indoor" => Ok(ContextClass::Indoor),
            "outdoor" => Ok(ContextClass::Outdoor),
            other => Err(Error::invalid(format!("unknown context label {other:?}"))),
        }
    }
}

/// One fixed-length, non-overlapping slice of a stream. Carries coordinates
/// into the stream rather than copied samples.
#[derive(Debug, Clone)]
pub struct Window {
    pub subject_id: String,
    pub index: usize,
    /// First sample of the window within its stream.
    pub start_sample: usize,
    pub n_samples: usize,
    pub sample_rate_hz: f64,
    /// Epoch seconds of the first sample.
    pub start_time: f64,
    pub label: Option<ContextClass>,
    /// Fraction of per-second values agreeing with the majority.
    pub label_confidence: Option<f64>,
}

impl Window {
    pub fn len_s(&self) -> f64 {
        self.n_samples as f64 / self.sample_rate_hz
    }

    /// Slice this window out of a full-stream channel.
    pub fn series(&self, channel: &UnivariateSeries) -> Result<UnivariateSeries> {
        let end = self.start_sample + self.n_samples;
        if end > channel.len() {
            return Err(Error::invalid(format!(
                "window {} of subject {} extends past the channel (need {end} samples, have {})",
                self.index,
                self.subject_id,
                channel.len()
            )));
        }
        Ok(UnivariateSeries {
            values: channel.values[self.start_sample..end].to_vec(),
            meta: SeriesMeta {
                subject_id: Some(self.subject_id.clone()),
                window_index: Some(self.index),
                bout_index: None,
            },
        })
    }
}

/// A 3 s chunk of a window, classified gait or non-gait.
#[derive(Debug, Clone)]
pub struct Epoch {
    /// Offset of the epoch within its window, in samples.
    pub offset: usize,
    pub len: usize,
    pub is_gait: bool,
    /// Normalized autocorrelation of the dominant in-band peak.
    pub score: f64,
}

/// A contiguous gait episode inside one window, in window-relative samples.
#[derive(Debug, Clone)]
pub struct WalkingBout {
    pub subject_id: String,
    pub window_index: usize,
    pub start_sample: usize,
    pub end_sample: usize,
    pub label: Option<ContextClass>,
}

impl WalkingBout {
    pub fn n_samples(&self) -> usize {
        self.end_sample - self.start_sample
    }

    pub fn duration_s(&self, sample_rate_hz: f64) -> f64 {
        self.n_samples() as f64 / sample_rate_hz
    }

    /// Slice this bout out of its window's channel.
    pub fn series(&self, window_channel: &UnivariateSeries, bout_index: usize) -> Result<UnivariateSeries> {
        if self.end_sample > window_channel.len() {
            return Err(Error::invalid(format!(
                "bout [{}, {}) exceeds window channel of length {}",
                self.start_sample,
                self.end_sample,
                window_channel.len()
            )));
        }
        Ok(UnivariateSeries {
            values: window_channel.values[self.start_sample..self.end_sample].to_vec(),
            meta: SeriesMeta {
                subject_id: Some(self.subject_id.clone()),
                window_index: Some(self.window_index),
                bout_index: Some(bout_index),
            },
        })
    }
}

/// Epoch duration used by the gait heuristic, in seconds.
pub const EPOCH_LEN_S: usize = 3;

/// Thresholds for the energy + periodicity gait heuristic.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaitHeuristicConfig {
    /// Minimum epoch standard deviation.
    pub energy_min: f64,
    /// Step-frequency band, Hz.
    pub f_min: f64,
    pub f_max: f64,
    /// Minimum normalized autocorrelation at the dominant in-band peak.
    pub periodicity_min: f64,
}

impl Default for GaitHeuristicConfig {
    fn default() -> Self {
        Self {
            energy_min: 0.05,
            f_min: 0.5,
            f_max: 3.0,
            periodicity_min: 0.4,
        }
    }
}

/// Chunk a stream into fixed, non-overlapping windows. A trailing remainder
/// shorter than one window is dropped; a stream shorter than one window
/// yields no windows.
pub fn chunk_windows(stream: &InertialStream, window_len_s: usize) -> Vec<Window> {
    let window_samples = (window_len_s as f64 * stream.sample_rate_hz).round() as usize;
    if window_samples == 0 {
        return Vec::new();
    }
    let count = stream.len() / window_samples;
    (0..count)
        .map(|index| Window {
            subject_id: stream.subject_id.clone(),
            index,
            start_sample: index * window_samples,
            n_samples: window_samples,
            sample_rate_hz: stream.sample_rate_hz,
            start_time: stream.start_time
                + (index * window_samples) as f64 / stream.sample_rate_hz,
            label: None,
            label_confidence: None,
        })
        .collect()
}

/// Outcome of majority-vote label aggregation for one window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LabelOutcome {
    Labeled { class: ContextClass, confidence: f64 },
    /// Exact frequency tie; the window is discarded from labeled datasets.
    Tie,
    /// The label stream does not cover the window.
    NoCoverage,
}

/// Aggregate the per-second probabilities overlapping a window into one
/// label by majority vote. The mode value wins; indoor iff the mode value
/// exceeds 0.5. An exact tie yields no label.
pub fn aggregate_window_label(window: &Window, labels: &ContextLabelStream) -> LabelOutcome {
    let window_len_s = window.len_s().round() as usize;
    let offset = (window.start_time - labels.t0).floor();
    if offset < 0.0 {
        return LabelOutcome::NoCoverage;
    }
    let start = offset as usize;
    if start + window_len_s > labels.probs.len() {
        return LabelOutcome::NoCoverage;
    }
    let slice = &labels.probs[start..start + window_len_s];
    let indoor_votes = slice.iter().filter(|&&p| p > 0.5).count();
    let outdoor_votes = window_len_s - indoor_votes;
    if indoor_votes == outdoor_votes {
        return LabelOutcome::Tie;
    }
    let (class, mode_count) = if indoor_votes > outdoor_votes {
        (ContextClass::Indoor, indoor_votes)
    } else {
        (ContextClass::Outdoor, outdoor_votes)
    };
    LabelOutcome::Labeled {
        class,
        confidence: mode_count as f64 / window_len_s as f64,
    }
}

/// Apply [`aggregate_window_label`] in place.
pub fn label_windows(windows: &mut [Window], labels: &ContextLabelStream) {
    for w in windows {
        match aggregate_window_label(w, labels) {
            LabelOutcome::Labeled { class, confidence } => {
                w.label = Some(class);
                w.label_confidence = Some(confidence);
            }
            LabelOutcome::Tie | LabelOutcome::NoCoverage => {
                w.label = None;
                w.label_confidence = None;
            }
        }
    }
}

/// Biased normalized autocorrelation of `x` at lag `lag`.
fn autocorr_at(x: &[f64], mean: f64, denom: f64, lag: usize) -> f64 {
    let mut num = 0.0;
    for t in 0..x.len() - lag {
        num += (x[t] - mean) * (x[t + lag] - mean);
    }
    num / denom
}

/// Classify an epoch: gait iff its energy clears `energy_min` and the
/// dominant autocorrelation peak (highest local maximum) falls at a lag
/// inside the step-frequency band with value at least `periodicity_min`.
fn classify_epoch(x: &[f64], sample_rate_hz: f64, cfg: &GaitHeuristicConfig) -> (bool, f64) {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    let std = var.sqrt();
    if std < cfg.energy_min || var == 0.0 {
        return (false, 0.0);
    }
    let denom = var * n as f64;
    let max_lag = ((sample_rate_hz / cfg.f_min).ceil() as usize).min(n.saturating_sub(2));
    if max_lag < 3 {
        return (false, 0.0);
    }
    let r: Vec<f64> = (0..=max_lag + 1)
        .map(|lag| autocorr_at(x, mean, denom, lag))
        .collect();
    let lag_lo = sample_rate_hz / cfg.f_max;
    let lag_hi = sample_rate_hz / cfg.f_min;
    let mut best: Option<(usize, f64)> = None;
    for lag in 2..=max_lag {
        let is_local_max = r[lag] > r[lag - 1] && r[lag] >= r[lag + 1];
        if is_local_max && best.map_or(true, |(_, v)| r[lag] > v) {
            best = Some((lag, r[lag]));
        }
    }
    match best {
        Some((lag, value)) => {
            let in_band = lag as f64 >= lag_lo && lag as f64 <= lag_hi;
            (in_band && value >= cfg.periodicity_min, value)
        }
        None => (false, 0.0),
    }
}

/// Tile the window with 3 s epochs and classify each gait/non-gait.
/// `channel` must be the window's own (vertical) series.
pub fn detect_gait_epochs(
    window: &Window,
    channel: &UnivariateSeries,
    cfg: &GaitHeuristicConfig,
) -> Result<Vec<Epoch>> {
    if channel.len() != window.n_samples {
        return Err(Error::invalid(format!(
            "channel length {} does not match window length {}",
            channel.len(),
            window.n_samples
        )));
    }
    let epoch_len = (EPOCH_LEN_S as f64 * window.sample_rate_hz).round() as usize;
    let count = window.n_samples / epoch_len;
    let mut epochs = Vec::with_capacity(count);
    for k in 0..count {
        let offset = k * epoch_len;
        let slice = &channel.values[offset..offset + epoch_len];
        let (is_gait, score) = classify_epoch(slice, window.sample_rate_hz, cfg);
        epochs.push(Epoch {
            offset,
            len: epoch_len,
            is_gait,
            score,
        });
    }
    Ok(epochs)
}

/// Turn maximal runs of consecutive gait epochs of length at least
/// `min_bout_epochs` into walking bouts. Bouts inherit the window label.
pub fn extract_bouts(window: &Window, epochs: &[Epoch], min_bout_epochs: usize) -> Vec<WalkingBout> {
    let mut bouts = Vec::new();
    let mut run_start: Option<usize> = None;
    for (i, e) in epochs.iter().enumerate() {
        if e.is_gait {
            run_start.get_or_insert(i);
        }
        let run_ends = !e.is_gait || i + 1 == epochs.len();
        if run_ends {
            if let Some(start) = run_start.take() {
                let end = if e.is_gait { i } else { i - 1 };
                if end + 1 - start >= min_bout_epochs {
                    bouts.push(WalkingBout {
                        subject_id: window.subject_id.clone(),
                        window_index: window.index,
                        start_sample: epochs[start].offset,
                        end_sample: epochs[end].offset + epochs[end].len,
                        label: window.label,
                    });
                }
            }
        }
    }
    bouts
}

/// Read bout annotations (`subject,window_index,start_sample,end_sample`),
/// validating every row against the given windows. Bouts inherit labels from
/// their windows and bypass the heuristic detector entirely.
pub fn import_bout_annotations(
    windows: &[Window],
    path: impl AsRef<Path>,
) -> Result<Vec<WalkingBout>> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let mut reader = csv::Reader::from_path(path)?;
    crate::signal::expect_headers(
        &mut reader,
        &display,
        &["subject", "window_index", "start_sample", "end_sample"],
    )?;
    let mut bouts = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 2;
        let subject = record
            .get(0)
            .ok_or_else(|| Error::schema(&display, format!("row {row}: missing subject")))?
            .trim()
            .to_string();
        let window_index = parse_usize(&record, 1, row, &display)?;
        let start = parse_usize(&record, 2, row, &display)?;
        let end = parse_usize(&record, 3, row, &display)?;
        let window = windows
            .iter()
            .find(|w| w.subject_id == subject && w.index == window_index)
            .ok_or_else(|| {
                Error::schema(
                    &display,
                    format!("row {row}: no window {window_index} for subject {subject}"),
                )
            })?;
        if end <= start {
            return Err(Error::schema(
                &display,
                format!("row {row}: end_sample {end} must exceed start_sample {start}"),
            ));
        }
        if end > window.n_samples {
            return Err(Error::schema(
                &display,
                format!(
                    "row {row}: end_sample {end} out of bounds for window of {} samples",
                    window.n_samples
                ),
            ));
        }
        bouts.push(WalkingBout {
            subject_id: subject,
            window_index,
            start_sample: start,
            end_sample: end,
            label: window.label,
        });
    }
    Ok(bouts)
}

/// Write bout annotations in the format read back by
/// [`import_bout_annotations`].
pub fn write_bout_csv(path: impl AsRef<Path>, bouts: &[WalkingBout]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path.as_ref())?;
    writer.write_record(["subject", "window_index", "start_sample", "end_sample"])?;
    for b in bouts {
        writer.write_record([
            b.subject_id.clone(),
            b.window_index.to_string(),
            b.start_sample.to_string(),
            b.end_sample.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Write window labels (`subject,window_index,label,confidence`). Unlabeled
/// windows are written with empty label and confidence fields.
pub fn write_window_label_csv(path: impl AsRef<Path>, windows: &[Window]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path.as_ref())?;
    writer.write_record(["subject", "window_index", "label", "confidence"])?;
    for w in windows {
        let label = w.label.map(|c| c.to_string()).unwrap_or_default();
        let confidence = w
            .label_confidence
            .map(|c| format!("{c}"))
            .unwrap_or_default();
        writer.write_record([w.subject_id.clone(), w.index.to_string(), label, confidence])?;
    }
    writer.flush()?;
    Ok(())
}

/// Parsed row of a window-label CSV.
#[derive(Debug, Clone)]
pub struct WindowLabelRow {
    pub subject_id: String,
    pub window_index: usize,
    pub label: Option<ContextClass>,
    pub confidence: Option<f64>,
}

/// Read window labels written by [`write_window_label_csv`].
pub fn read_window_label_csv(path: impl AsRef<Path>) -> Result<Vec<WindowLabelRow>> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let mut reader = csv::Reader::from_path(path)?;
    crate::signal::expect_headers(&mut reader, &display, &["subject", "window_index", "label", "confidence"])?;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 2;
        let subject_id = record
            .get(0)
            .ok_or_else(|| Error::schema(&display, format!("row {row}: missing subject")))?
            .trim()
            .to_string();
        let window_index = parse_usize(&record, 1, row, &display)?;
        let label_raw = record.get(2).unwrap_or("").trim();
        let label = if label_raw.is_empty() {
            None
        } else {
            Some(label_raw.parse::<ContextClass>()?)
        };
        let conf_raw = record.get(3).unwrap_or("").trim();
        let confidence = if conf_raw.is_empty() {
            None
        } else {
            Some(conf_raw.parse::<f64>().map_err(|_| {
                Error::schema(&display, format!("row {row}: bad confidence {conf_raw:?}"))
            })?)
        };
        rows.push(WindowLabelRow {
            subject_id,
            window_index,
            label,
            confidence,
        });
    }
    Ok(rows)
}

fn parse_usize(record: &csv::StringRecord, col: usize, row: usize, path: &str) -> Result<usize> {
    let raw = record
        .get(col)
        .ok_or_else(|| Error::schema(path, format!("row {row}: missing column {col}")))?;
    raw.trim()
        .parse::<usize>()
        .map_err(|_| Error::schema(path, format!("row {row}, column {col}: not an index: {raw:?}")))
}
