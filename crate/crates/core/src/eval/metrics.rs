//! Accuracy and macro-averaged precision, recall and F1 for the binary
//! context task. Per-class scores with a zero denominator substitute 0 and
//! raise a flag; the macro average is the unweighted mean over the two
//! classes, and F1 is the macro mean of per-class harmonic means.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::segmentation::ContextClass;

#[derive(Debug, Clone, Serialize, serde::Deserialize)]
pub struct FoldMetrics {
    pub accuracy: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    /// confusion[true class][predicted class], indexed by
    /// [`ContextClass::index`].
    pub confusion: [[usize; 2]; 2],
    /// Precision/recall denominators that were zero, per class.
    pub undefined_precision: [bool; 2],
    pub undefined_recall: [bool; 2],
    /// False when the true labels contain a single class, leaving macro
    /// scores partly undefined (degenerate folds).
    pub macro_defined: bool,
}

pub fn compute_metrics(y_true: &[ContextClass], y_pred: &[ContextClass]) -> Result<FoldMetrics> {
    if y_true.len() != y_pred.len() {
        return Err(Error::invalid(format!(
            "prediction count {} does not match label count {}",
            y_pred.len(),
            y_true.len()
        )));
    }
    if y_true.is_empty() {
        return Err(Error::invalid("metrics need at least one sample"));
    }

    let mut confusion = [[0usize; 2]; 2];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        confusion[t.index()][p.index()] += 1;
    }
    let n = y_true.len() as f64;
    let correct = confusion[0][0] + confusion[1][1];

    let mut precision = [0.0f64; 2];
    let mut recall = [0.0f64; 2];
    let mut f1 = [0.0f64; 2];
    let mut undefined_precision = [false; 2];
    let mut undefined_recall = [false; 2];
    for c in 0..2 {
        let tp = confusion[c][c];
        let fp = confusion[1 - c][c];
        let fn_ = confusion[c][1 - c];
        if tp + fp == 0 {
            undefined_precision[c] = true;
        } else {
            precision[c] = tp as f64 / (tp + fp) as f64;
        }
        if tp + fn_ == 0 {
            undefined_recall[c] = true;
        } else {
            recall[c] = tp as f64 / (tp + fn_) as f64;
        }
        if precision[c] + recall[c] > 0.0 {
            f1[c] = 2.0 * precision[c] * recall[c] / (precision[c] + recall[c]);
        }
    }

    let class_present = [
        confusion[0][0] + confusion[0][1] > 0,
        confusion[1][0] + confusion[1][1] > 0,
    ];

    Ok(FoldMetrics {
        accuracy: correct as f64 / n,
        macro_precision: (precision[0] + precision[1]) / 2.0,
        macro_recall: (recall[0] + recall[1]) / 2.0,
        macro_f1: (f1[0] + f1[1]) / 2.0,
        confusion,
        undefined_precision,
        undefined_recall,
        macro_defined: class_present[0] && class_present[1],
    })
}
