//! Dataset assembly from the on-disk layout the pipeline commands produce:
//! per subject, `imu_<s>.csv`, `labels_<s>.csv`, `windows_<s>.csv`,
//! `bouts_<s>.csv`, `dmo_bouts_<s>.csv` and `dmo_windows_<s>.csv` in one
//! data directory.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use gaitctx::dmo::{import_dmo_table, read_window_dmo_csv};
use gaitctx::pipeline::{tabular_from_bout_records, tabular_from_window_dmos, Channel, LengthHandling};
use gaitctx::segmentation::{
    chunk_windows, import_bout_annotations, read_window_label_csv, ContextClass, Window,
};
use gaitctx::signal::{
    magnitude_channel, pad_to_length, read_imu_csv, resample_to_length, vertical_channel, Axis,
    UnivariateSeries,
};
use gaitctx::tabular::TabularDataset;
use gaitctx::tsc::{LengthMode, SeriesDataset};

use crate::config::{DatasetKind, RunConfig};

pub fn subject_file(dir: &Path, prefix: &str, subject: &str) -> PathBuf {
    dir.join(format!("{prefix}_{subject}.csv"))
}

/// Subjects discovered from `windows_*.csv` files, sorted.
pub fn discover_subjects(dir: &Path) -> Result<Vec<String>> {
    let mut subjects = BTreeSet::new();
    for entry in std::fs::read_dir(dir)
        .with_context(|| format!("cannot read data directory {}", dir.display()))?
    {
        let name = entry?.file_name();
        let name = name.to_string_lossy();
        if let Some(rest) = name.strip_prefix("windows_") {
            if let Some(subject) = rest.strip_suffix(".csv") {
                subjects.insert(subject.to_string());
            }
        }
    }
    if subjects.is_empty() {
        bail!(
            "no windows_<subject>.csv files in {}; run the segment command first",
            dir.display()
        );
    }
    Ok(subjects.into_iter().collect())
}

/// Window label lookup: (subject, window index) -> class.
fn window_label_map(dir: &Path, subjects: &[String]) -> Result<BTreeMap<(String, usize), ContextClass>> {
    let mut map = BTreeMap::new();
    for subject in subjects {
        let path = subject_file(dir, "windows", subject);
        for row in read_window_label_csv(&path)? {
            if let Some(label) = row.label {
                map.insert((row.subject_id, row.window_index), label);
            }
        }
    }
    Ok(map)
}

fn labeled_windows(dir: &Path, subject: &str, window_len_s: usize) -> Result<Vec<Window>> {
    let stream = read_imu_csv(subject_file(dir, "imu", subject), subject)?;
    let mut windows = chunk_windows(&stream, window_len_s);
    let rows = read_window_label_csv(subject_file(dir, "windows", subject))?;
    let by_index: BTreeMap<usize, _> = rows.into_iter().map(|r| (r.window_index, r)).collect();
    for w in &mut windows {
        if let Some(row) = by_index.get(&w.index) {
            w.label = row.label;
            w.label_confidence = row.confidence;
        }
    }
    Ok(windows)
}

fn channel_of(stream_path: &Path, subject: &str, channel: Channel, axis: Axis) -> Result<UnivariateSeries> {
    let stream = read_imu_csv(stream_path, subject)?;
    Ok(match channel {
        Channel::Vertical => vertical_channel(&stream, axis)?,
        Channel::Magnitude => magnitude_channel(&stream)?,
    })
}

/// Assemble the dataset a run config asks for.
pub fn load_dataset(cfg: &RunConfig) -> Result<gaitctx::eval::CampaignDataset> {
    let dir = Path::new(&cfg.data_dir);
    let subjects = discover_subjects(dir)?;
    match cfg.dataset {
        DatasetKind::WindowsDmo => Ok(gaitctx::eval::CampaignDataset::Tabular(
            load_window_dmo_dataset(dir, &subjects)?,
        )),
        DatasetKind::BoutsDmo => Ok(gaitctx::eval::CampaignDataset::Tabular(
            load_bout_dmo_dataset(dir, &subjects)?,
        )),
        DatasetKind::WindowsSeries => Ok(gaitctx::eval::CampaignDataset::Series(
            load_window_series_dataset(dir, &subjects, cfg)?,
        )),
        DatasetKind::BoutsSeries => Ok(gaitctx::eval::CampaignDataset::Series(
            load_bout_series_dataset(dir, &subjects, cfg)?,
        )),
    }
}

fn load_window_dmo_dataset(dir: &Path, subjects: &[String]) -> Result<TabularDataset> {
    let labels = window_label_map(dir, subjects)?;
    let mut rows = Vec::new();
    for subject in subjects {
        for wd in read_window_dmo_csv(subject_file(dir, "dmo_windows", subject))? {
            let key = (wd.subject_id.clone(), wd.window_index);
            if let Some(&label) = labels.get(&key) {
                rows.push((wd, label));
            }
        }
    }
    Ok(tabular_from_window_dmos(rows)?)
}

fn load_bout_dmo_dataset(dir: &Path, subjects: &[String]) -> Result<TabularDataset> {
    let labels = window_label_map(dir, subjects)?;
    let mut rows = Vec::new();
    for subject in subjects {
        for record in import_dmo_table(subject_file(dir, "dmo_bouts", subject))? {
            let key = (record.bout.subject_id.clone(), record.bout.window_index);
            if let Some(&label) = labels.get(&key) {
                rows.push((record, label));
            }
        }
    }
    Ok(tabular_from_bout_records(rows)?)
}

/// The window-series dataset covers the windows for which DMOs exist (the
/// same population as the window DMO table).
fn load_window_series_dataset(
    dir: &Path,
    subjects: &[String],
    cfg: &RunConfig,
) -> Result<SeriesDataset> {
    let mut series = Vec::new();
    let mut y = Vec::new();
    let mut subject_ids = Vec::new();
    for subject in subjects {
        let windows = labeled_windows(dir, subject, cfg.window_len_s)?;
        let full = channel_of(&subject_file(dir, "imu", subject), subject, cfg.channel, cfg.axis)?;
        let dmo_windows = read_window_dmo_csv(subject_file(dir, "dmo_windows", subject))?;
        for wd in dmo_windows {
            let window = windows.iter().find(|w| w.index == wd.window_index).with_context(|| {
                format!("dmo window {} of {subject} is out of range", wd.window_index)
            })?;
            let Some(label) = window.label else { continue };
            series.push(window.series(&full)?);
            y.push(label);
            subject_ids.push(subject.clone());
        }
    }
    if series.is_empty() {
        bail!("no labeled DMO windows found under {}", dir.display());
    }
    Ok(SeriesDataset::new(series, y, subject_ids, LengthMode::Fixed)?)
}

fn load_bout_series_dataset(
    dir: &Path,
    subjects: &[String],
    cfg: &RunConfig,
) -> Result<SeriesDataset> {
    let mut series = Vec::new();
    let mut y = Vec::new();
    let mut subject_ids = Vec::new();
    let mut target_len = 0usize;
    for subject in subjects {
        let windows = labeled_windows(dir, subject, cfg.window_len_s)?;
        let full = channel_of(&subject_file(dir, "imu", subject), subject, cfg.channel, cfg.axis)?;
        let bouts = import_bout_annotations(&windows, subject_file(dir, "bouts", subject))?;
        for (bout_index, bout) in bouts.iter().enumerate() {
            let Some(label) = bout.label else { continue };
            let window = windows
                .iter()
                .find(|w| w.index == bout.window_index)
                .expect("import validated the window reference");
            target_len = target_len.max(window.n_samples);
            let window_channel = window.series(&full)?;
            series.push(bout.series(&window_channel, bout_index)?);
            y.push(label);
            subject_ids.push(subject.clone());
        }
    }
    if series.is_empty() {
        bail!("no labeled bouts found under {}", dir.display());
    }
    let (series, mode) = match cfg.length {
        LengthHandling::Pad => (
            series
                .iter()
                .map(|s| pad_to_length(s, target_len))
                .collect::<gaitctx::Result<Vec<_>>>()?,
            LengthMode::Fixed,
        ),
        LengthHandling::Resample => (
            series
                .iter()
                .map(|s| resample_to_length(s, target_len))
                .collect::<gaitctx::Result<Vec<_>>>()?,
            LengthMode::Fixed,
        ),
        LengthHandling::Original => (series, LengthMode::Variable),
    };
    Ok(SeriesDataset::new(series, y, subject_ids, mode)?)
}

/// Custom split file: `subject,fold` rows.
pub fn read_custom_split_csv(path: &Path) -> Result<BTreeMap<String, usize>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read split file {}", path.display()))?;
    let mut out = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line == "subject,fold") {
            continue;
        }
        let Some((subject, fold)) = line.split_once(',') else {
            bail!("{}:{}: expected subject,fold", path.display(), lineno + 1);
        };
        let fold: usize = fold
            .trim()
            .parse()
            .with_context(|| format!("{}:{}: bad fold id", path.display(), lineno + 1))?;
        out.insert(subject.trim().to_string(), fold);
    }
    if out.is_empty() {
        bail!("split file {} assigns no subjects", path.display());
    }
    Ok(out)
}
