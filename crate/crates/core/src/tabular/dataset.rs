//! Labeled feature matrix shared by every feature-based classifier.

use std::path::Path;

use crate::error::{Error, Result};
use crate::segmentation::ContextClass;

#[derive(Debug, Clone)]
pub struct TabularDataset {
    /// Row-major n x d matrix.
    pub x: Vec<Vec<f64>>,
    pub y: Vec<ContextClass>,
    pub subjects: Vec<String>,
    pub feature_names: Vec<String>,
}

impl TabularDataset {
    pub fn new(
        x: Vec<Vec<f64>>,
        y: Vec<ContextClass>,
        subjects: Vec<String>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::invalid("dataset must contain rows"));
        }
        if feature_names.is_empty() {
            return Err(Error::invalid("dataset must have at least one feature"));
        }
        let d = feature_names.len();
        for (i, row) in x.iter().enumerate() {
            if row.len() != d {
                return Err(Error::invalid(format!(
                    "row {i} has {} values, expected {d}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("row {i} contains a non-finite value")));
            }
        }
        if y.len() != x.len() || subjects.len() != x.len() {
            return Err(Error::invalid("labels and subjects must match the row count"));
        }
        Ok(Self {
            x,
            y,
            subjects,
            feature_names,
        })
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn d(&self) -> usize {
        self.feature_names.len()
    }

    /// Rows per class, ordered as [`ContextClass::ALL`].
    pub fn class_counts(&self) -> [usize; 2] {
        let mut counts = [0usize; 2];
        for &c in &self.y {
            counts[c.index()] += 1;
        }
        counts
    }

    pub fn has_both_classes(&self) -> bool {
        let counts = self.class_counts();
        counts[0] > 0 && counts[1] > 0
    }

    /// Row subset in the given index order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let mut x = Vec::with_capacity(indices.len());
        let mut y = Vec::with_capacity(indices.len());
        let mut subjects = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.n() {
                return Err(Error::invalid(format!("row index {i} out of bounds")));
            }
            x.push(self.x[i].clone());
            y.push(self.y[i]);
            subjects.push(self.subjects[i].clone());
        }
        Self::new(x, y, subjects, self.feature_names.clone())
    }
}

/// Write a labeled feature matrix (`subject,label,<feature columns>`), the
/// same tabular surface the feature-based classifiers consume. Lets kernel
/// or word-count transforms be inspected or re-used outside a campaign.
pub fn write_feature_csv(path: impl AsRef<Path>, data: &TabularDataset) -> Result<()> {
    let mut writer = csv::Writer::from_path(path.as_ref())?;
    let mut header = vec!["subject".to_string(), "label".to_string()];
    header.extend(data.feature_names.iter().cloned());
    writer.write_record(&header)?;
    for ((row, &label), subject) in data.x.iter().zip(&data.y).zip(&data.subjects) {
        let mut record = vec![subject.clone(), label.to_string()];
        record.extend(row.iter().map(|v| format!("{v}")));
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

/// Read a labeled feature matrix written by [`write_feature_csv`].
pub fn read_feature_csv(path: impl AsRef<Path>) -> Result<TabularDataset> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let cols: Vec<String> = headers.iter().map(|h| h.trim().to_string()).collect();
    if cols.len() < 3 || cols[0] != "subject" || cols[1] != "label" {
        return Err(Error::schema(&display, "header must start with subject,label"));
    }
    let feature_names: Vec<String> = cols[2..].to_vec();
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut subjects = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row_no = i + 2;
        subjects.push(
            record
                .get(0)
                .ok_or_else(|| Error::schema(&display, format!("row {row_no}: missing subject")))?
                .trim()
                .to_string(),
        );
        y.push(record.get(1).unwrap_or("").parse::<ContextClass>()?);
        let mut row = Vec::with_capacity(feature_names.len());
        for c in 0..feature_names.len() {
            let raw = record.get(c + 2).unwrap_or("");
            row.push(raw.trim().parse::<f64>().map_err(|_| {
                Error::schema(&display, format!("row {row_no}: bad value {raw:?}"))
            })?);
        }
        x.push(row);
    }
    TabularDataset::new(x, y, subjects, feature_names)
}
