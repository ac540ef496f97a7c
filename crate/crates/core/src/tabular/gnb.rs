//! Gaussian naive Bayes with class priors from frequencies and a variance
//! floor proportional to the largest pooled feature variance.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::segmentation::ContextClass;
use crate::tabular::TabularDataset;

const VARIANCE_FLOOR_RATIO: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct GnbModel {
    /// Ordered as [`ContextClass::ALL`].
    pub class_priors: [f64; 2],
    pub means: [Vec<f64>; 2],
    pub variances: [Vec<f64>; 2],
    pub variance_floor: f64,
}

pub fn fit_gnb(data: &TabularDataset) -> Result<GnbModel> {
    let counts = data.class_counts();
    if counts[0] == 0 || counts[1] == 0 {
        return Err(Error::DegenerateTraining(
            "gaussian naive bayes needs both classes in the training data".into(),
        ));
    }
    let n = data.n() as f64;
    let d = data.d();

    // Floor: 1e-9 x the largest pooled (population) feature variance.
    let mut pooled_mean = vec![0.0; d];
    for row in &data.x {
        for j in 0..d {
            pooled_mean[j] += row[j];
        }
    }
    for m in &mut pooled_mean {
        *m /= n;
    }
    let mut pooled_var = vec![0.0; d];
    for row in &data.x {
        for j in 0..d {
            pooled_var[j] += (row[j] - pooled_mean[j]).powi(2);
        }
    }
    let max_var = pooled_var.iter().map(|v| v / n).fold(0.0f64, f64::max);
    let variance_floor = if max_var > 0.0 {
        VARIANCE_FLOOR_RATIO * max_var
    } else {
        VARIANCE_FLOOR_RATIO
    };

    let mut means = [vec![0.0; d], vec![0.0; d]];
    for (row, &label) in data.x.iter().zip(&data.y) {
        let c = label.index();
        for j in 0..d {
            means[c][j] += row[j];
        }
    }
    for c in 0..2 {
        for j in 0..d {
            means[c][j] /= counts[c] as f64;
        }
    }
    let mut variances = [vec![0.0; d], vec![0.0; d]];
    for (row, &label) in data.x.iter().zip(&data.y) {
        let c = label.index();
        for j in 0..d {
            variances[c][j] += (row[j] - means[c][j]).powi(2);
        }
    }
    for c in 0..2 {
        for j in 0..d {
            variances[c][j] = (variances[c][j] / counts[c] as f64).max(variance_floor);
        }
    }

    Ok(GnbModel {
        class_priors: [counts[0] as f64 / n, counts[1] as f64 / n],
        means,
        variances,
        variance_floor,
    })
}

impl GnbModel {
    /// Unnormalized log posterior per class, ordered as [`ContextClass::ALL`].
    pub fn log_posteriors(&self, row: &[f64]) -> [f64; 2] {
        let mut out = [0.0; 2];
        for c in 0..2 {
            let mut lp = self.class_priors[c].ln();
            for (j, &v) in row.iter().enumerate() {
                let var = self.variances[c][j];
                let diff = v - self.means[c][j];
                lp += -0.5 * ((2.0 * std::f64::consts::PI * var).ln() + diff * diff / var);
            }
            out[c] = lp;
        }
        out
    }

    pub fn predict(&self, row: &[f64]) -> ContextClass {
        let lp = self.log_posteriors(row);
        if lp[ContextClass::Indoor.index()] > lp[ContextClass::Outdoor.index()] {
            ContextClass::Indoor
        } else {
            ContextClass::Outdoor
        }
    }
}
