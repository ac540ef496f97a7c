//! Glue that turns labeled streams into the four datasets: tabular DMO
//! features and raw-signal series, each at window and at walking-bout
//! granularity.

use serde::{Deserialize, Serialize};

use crate::context::ContextLabelStream;
use crate::dmo::{
    aggregate_window_dmos, extract_basic_dmos, DmoRecord, StepDetectionConfig, WindowDmo,
    FEATURE_NAMES, N_FEATURES,
};
use crate::error::{Error, Result};
use crate::segmentation::{
    chunk_windows, detect_gait_epochs, extract_bouts, label_windows, GaitHeuristicConfig,
    WalkingBout, Window,
};
use crate::signal::{
    magnitude_channel, pad_to_length, resample_to_length, vertical_channel, Axis, InertialStream,
    UnivariateSeries,
};
use crate::tabular::TabularDataset;
use crate::tsc::{LengthMode, SeriesDataset};

/// Which single channel feeds the raw-signal models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Channel {
    Vertical,
    Magnitude,
}

impl std::fmt::Display for Channel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Channel::Vertical => write!(f, "vertical"),
            Channel::Magnitude => write!(f, "magnitude"),
        }
    }
}

/// How variable-length bout series are reconciled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LengthHandling {
    Pad,
    Resample,
    Original,
}

impl std::fmt::Display for LengthHandling {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LengthHandling::Pad => write!(f, "pad"),
            LengthHandling::Resample => write!(f, "resample"),
            LengthHandling::Original => write!(f, "original"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub window_len_s: usize,
    pub vertical_axis: Axis,
    pub gait: GaitHeuristicConfig,
    pub min_bout_epochs: usize,
    pub step: StepDetectionConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            window_len_s: 60,
            vertical_axis: Axis::Y,
            gait: GaitHeuristicConfig::default(),
            min_bout_epochs: 2,
            step: StepDetectionConfig::default(),
        }
    }
}

/// Everything the segmentation stage produces for one subject. Bouts and
/// their DMO records are index-aligned.
#[derive(Debug, Clone)]
pub struct SubjectArtifacts {
    pub stream: InertialStream,
    pub windows: Vec<Window>,
    pub bouts: Vec<WalkingBout>,
    pub bout_records: Vec<DmoRecord>,
    pub window_dmos: Vec<WindowDmo>,
}

/// Chunk, label, detect gait, extract bouts and native DMOs for one stream.
pub fn segment_subject(
    stream: InertialStream,
    labels: &ContextLabelStream,
    cfg: &PipelineConfig,
) -> Result<SubjectArtifacts> {
    let vertical = vertical_channel(&stream, cfg.vertical_axis)?;
    let mut windows = chunk_windows(&stream, cfg.window_len_s);
    label_windows(&mut windows, labels);

    let mut bouts = Vec::new();
    let mut bout_records = Vec::new();
    let mut window_dmos = Vec::new();
    for window in &windows {
        let channel = window.series(&vertical)?;
        let epochs = detect_gait_epochs(window, &channel, &cfg.gait)?;
        let window_bouts = extract_bouts(window, &epochs, cfg.min_bout_epochs);
        let mut records = Vec::with_capacity(window_bouts.len());
        for (bout_index, bout) in window_bouts.iter().enumerate() {
            let series = bout.series(&channel, bout_index)?;
            records.push(extract_basic_dmos(
                bout,
                &series,
                stream.sample_rate_hz,
                &cfg.step,
                bout_index,
            )?);
        }
        if !records.is_empty() {
            window_dmos.push(aggregate_window_dmos(&records)?);
        }
        bouts.extend(window_bouts);
        bout_records.extend(records);
    }

    Ok(SubjectArtifacts {
        stream,
        windows,
        bouts,
        bout_records,
        window_dmos,
    })
}

/// Row counts the segment stage reports, in the shape of the dataset
/// accounting table: labeled windows >= DMO windows, and every DMO window
/// carries at least one bout.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SegmentationCounts {
    pub windows: usize,
    pub labeled_windows: usize,
    pub dmo_windows: usize,
    pub labeled_bouts: usize,
    pub indoor_windows: usize,
    pub outdoor_windows: usize,
}

pub fn count_artifacts(artifacts: &[SubjectArtifacts]) -> SegmentationCounts {
    let mut counts = SegmentationCounts {
        windows: 0,
        labeled_windows: 0,
        dmo_windows: 0,
        labeled_bouts: 0,
        indoor_windows: 0,
        outdoor_windows: 0,
    };
    for a in artifacts {
        counts.windows += a.windows.len();
        for w in &a.windows {
            match w.label {
                Some(crate::segmentation::ContextClass::Indoor) => {
                    counts.labeled_windows += 1;
                    counts.indoor_windows += 1;
                }
                Some(crate::segmentation::ContextClass::Outdoor) => {
                    counts.labeled_windows += 1;
                    counts.outdoor_windows += 1;
                }
                None => {}
            }
        }
        counts.dmo_windows += a
            .window_dmos
            .iter()
            .filter(|w| {
                a.windows
                    .get(w.window_index)
                    .is_some_and(|win| win.label.is_some())
            })
            .count();
        counts.labeled_bouts += a.bouts.iter().filter(|b| b.label.is_some()).count();
    }
    counts
}

/// Shared completeness rule for DMO feature matrices.
fn feature_matrix_from_values(
    rows: Vec<([Option<f64>; N_FEATURES], crate::segmentation::ContextClass, String)>,
) -> Result<TabularDataset> {
    if rows.is_empty() {
        return Err(Error::invalid("no labeled rows with DMO features"));
    }
    // Keep features observed somewhere, then drop rows that still miss one
    // of the kept features: models need complete matrices and inventing
    // imputed values is worse than losing a stray bout.
    let mut keep = [false; N_FEATURES];
    for (values, _, _) in &rows {
        for (f, v) in values.iter().enumerate() {
            if v.is_some() {
                keep[f] = true;
            }
        }
    }
    let kept: Vec<usize> = (0..N_FEATURES).filter(|&f| keep[f]).collect();
    if kept.is_empty() {
        return Err(Error::invalid("every DMO feature is masked"));
    }
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut subjects = Vec::new();
    for (values, label, subject) in rows {
        if kept.iter().any(|&f| values[f].is_none()) {
            continue;
        }
        x.push(kept.iter().map(|&f| values[f].unwrap()).collect());
        y.push(label);
        subjects.push(subject);
    }
    if x.is_empty() {
        return Err(Error::invalid("no row has every kept DMO feature"));
    }
    TabularDataset::new(
        x,
        y,
        subjects,
        kept.iter().map(|&f| FEATURE_NAMES[f].to_string()).collect(),
    )
}

/// Tabular dataset from labeled aggregated window DMOs. Features masked in
/// every row are dropped, then rows still missing a kept feature are
/// dropped.
pub fn tabular_from_window_dmos(
    rows: Vec<(WindowDmo, crate::segmentation::ContextClass)>,
) -> Result<TabularDataset> {
    feature_matrix_from_values(
        rows.into_iter()
            .map(|(wd, label)| (wd.values, label, wd.subject_id))
            .collect(),
    )
}

/// Tabular dataset from labeled bout-level DMO records, with the same
/// completeness rule as [`tabular_from_window_dmos`].
pub fn tabular_from_bout_records(
    rows: Vec<(DmoRecord, crate::segmentation::ContextClass)>,
) -> Result<TabularDataset> {
    feature_matrix_from_values(
        rows.into_iter()
            .map(|(r, label)| (r.values, label, r.bout.subject_id))
            .collect(),
    )
}

/// Tabular dataset of aggregated window DMOs (labeled DMO windows only).
pub fn dmo_window_dataset(artifacts: &[SubjectArtifacts]) -> Result<TabularDataset> {
    let mut rows = Vec::new();
    for a in artifacts {
        for wd in &a.window_dmos {
            let label = a.windows.get(wd.window_index).and_then(|w| w.label);
            if let Some(label) = label {
                rows.push((wd.clone(), label));
            }
        }
    }
    tabular_from_window_dmos(rows)
}

/// Tabular dataset of bout-level DMO records (labeled bouts only).
pub fn dmo_bout_dataset(artifacts: &[SubjectArtifacts]) -> Result<TabularDataset> {
    let mut rows = Vec::new();
    for a in artifacts {
        for (bout, record) in a.bouts.iter().zip(&a.bout_records) {
            if let Some(label) = bout.label {
                rows.push((record.clone(), label));
            }
        }
    }
    tabular_from_bout_records(rows)
}

fn channel_series(stream: &InertialStream, channel: Channel, axis: Axis) -> Result<UnivariateSeries> {
    match channel {
        Channel::Vertical => vertical_channel(stream, axis),
        Channel::Magnitude => magnitude_channel(stream),
    }
}

/// Raw-signal dataset of the labeled DMO windows (fixed length).
pub fn series_window_dataset(
    artifacts: &[SubjectArtifacts],
    channel: Channel,
    axis: Axis,
) -> Result<SeriesDataset> {
    let mut series = Vec::new();
    let mut y = Vec::new();
    let mut subjects = Vec::new();
    for a in artifacts {
        let full = channel_series(&a.stream, channel, axis)?;
        for wd in &a.window_dmos {
            let window = &a.windows[wd.window_index];
            if let Some(label) = window.label {
                series.push(window.series(&full)?);
                y.push(label);
                subjects.push(window.subject_id.clone());
            }
        }
    }
    if series.is_empty() {
        return Err(Error::invalid("no labeled windows with gait content"));
    }
    SeriesDataset::new(series, y, subjects, LengthMode::Fixed)
}

/// Raw-signal dataset of the labeled walking bouts, reconciled to a common
/// length by padding or resampling, or kept at native length.
pub fn series_bout_dataset(
    artifacts: &[SubjectArtifacts],
    channel: Channel,
    axis: Axis,
    handling: LengthHandling,
) -> Result<SeriesDataset> {
    let mut series = Vec::new();
    let mut y = Vec::new();
    let mut subjects = Vec::new();
    let mut target_len = 0usize;
    for a in artifacts {
        let full = channel_series(&a.stream, channel, axis)?;
        for (bout_index, (bout, _)) in a.bouts.iter().zip(&a.bout_records).enumerate() {
            let Some(label) = bout.label else { continue };
            let window = &a.windows[bout.window_index];
            target_len = target_len.max(window.n_samples);
            let window_channel = window.series(&full)?;
            series.push(bout.series(&window_channel, bout_index)?);
            y.push(label);
            subjects.push(bout.subject_id.clone());
        }
    }
    if series.is_empty() {
        return Err(Error::invalid("no labeled walking bouts"));
    }
    let (series, mode) = match handling {
        LengthHandling::Pad => (
            series
                .iter()
                .map(|s| pad_to_length(s, target_len))
                .collect::<Result<Vec<_>>>()?,
            LengthMode::Fixed,
        ),
        LengthHandling::Resample => (
            series
                .iter()
                .map(|s| resample_to_length(s, target_len))
                .collect::<Result<Vec<_>>>()?,
            LengthMode::Fixed,
        ),
        LengthHandling::Original => (series, LengthMode::Variable),
    };
    SeriesDataset::new(series, y, subjects, mode)
}
