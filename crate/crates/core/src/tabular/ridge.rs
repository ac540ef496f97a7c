//! Ridge classifier with closed-form leave-one-out alpha selection.
//!
//! Targets are encoded -1/+1 and regressed on standardized features plus a
//! constant regressor (penalized together with the weights, which keeps the
//! kernel form uniform in the over- and under-determined regimes). For each
//! candidate alpha the exact leave-one-out squared error comes from the
//! kernel identity `e_i = c_i / (M^{-1})_{ii}` with `M = K + alpha I` and
//! `c = M^{-1} y`; no refits are needed.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::segmentation::ContextClass;
use crate::tabular::linalg::{solve_spd, spd_inverse_diag};
use crate::tabular::{decode_score, encode_label, TabularDataset};

#[derive(Debug, Clone, Serialize)]
pub struct RidgeClassifierModel {
    pub alphas: Vec<f64>,
    pub selected_alpha: f64,
    /// Leave-one-out squared error per alpha (infinite when the solve failed).
    pub loo_sse: Vec<f64>,
    /// Weights on the standardized features, then the constant regressor.
    pub weights: Vec<f64>,
    pub feature_means: Vec<f64>,
    pub feature_stds: Vec<f64>,
    /// Set when every alpha produced a degenerate fit and the largest one
    /// was used as a fallback.
    pub degenerate_fallback: bool,
}

/// Ten alphas equally spaced in log scale over [1e-3, 1e3].
pub fn default_alpha_grid() -> Vec<f64> {
    let (lo, hi, count) = (1e-3f64, 1e3f64, 10);
    let step = (hi.ln() - lo.ln()) / (count - 1) as f64;
    (0..count).map(|i| (lo.ln() + step * i as f64).exp()).collect()
}

fn column_stats(data: &TabularDataset) -> (Vec<f64>, Vec<f64>) {
    let n = data.n() as f64;
    let d = data.d();
    let mut means = vec![0.0; d];
    for row in &data.x {
        for j in 0..d {
            means[j] += row[j];
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
    (means, stds)
}

fn standardize_row(row: &[f64], means: &[f64], stds: &[f64]) -> Vec<f64> {
    row.iter()
        .zip(means.iter().zip(stds))
        .map(|(&v, (&m, &s))| if s > 0.0 { (v - m) / s } else { 0.0 })
        .collect()
}

pub fn fit_ridge_classifier(data: &TabularDataset, alphas: &[f64]) -> Result<RidgeClassifierModel> {
    if alphas.len() < 2 {
        return Err(Error::invalid("ridge alpha search needs at least 2 candidates"));
    }
    if alphas.iter().any(|&a| !(a > 0.0)) {
        return Err(Error::invalid("ridge alphas must be positive"));
    }
    let mut alphas = alphas.to_vec();
    alphas.sort_by(f64::total_cmp);

    let n = data.n();
    let (means, stds) = column_stats(data);
    let rows: Vec<Vec<f64>> = data
        .x
        .iter()
        .map(|r| {
            let mut z = standardize_row(r, &means, &stds);
            z.push(1.0);
            z
        })
        .collect();
    let y: Vec<f64> = data.y.iter().map(|&c| encode_label(c)).collect();

    // Kernel matrix K = A A^T over the augmented rows.
    let mut kernel = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let dot: f64 = rows[i].iter().zip(&rows[j]).map(|(a, b)| a * b).sum();
            kernel[i][j] = dot;
            kernel[j][i] = dot;
        }
    }

    let mut loo_sse = Vec::with_capacity(alphas.len());
    let mut duals: Vec<Option<Vec<f64>>> = Vec::with_capacity(alphas.len());
    for &alpha in &alphas {
        let mut m = kernel.clone();
        for i in 0..n {
            m[i][i] += alpha;
        }
        let c = solve_spd(&m, &y);
        let inv_diag = spd_inverse_diag(&m);
        match (c, inv_diag) {
            (Some(c), Some(inv_diag)) => {
                let mut sse = 0.0;
                for i in 0..n {
                    let e = c[i] / inv_diag[i];
                    sse += e * e;
                }
                loo_sse.push(if sse.is_finite() { sse } else { f64::INFINITY });
                duals.push(Some(c));
            }
            _ => {
                loo_sse.push(f64::INFINITY);
                duals.push(None);
            }
        }
    }

    // Argmin over finite errors; fall back to the largest alpha otherwise.
    let mut best: Option<usize> = None;
    for (i, &sse) in loo_sse.iter().enumerate() {
        if sse.is_finite() && best.map_or(true, |b| sse < loo_sse[b]) {
            best = Some(i);
        }
    }
    let (selected, degenerate_fallback) = match best {
        Some(i) => (i, false),
        None => (alphas.len() - 1, true),
    };

    let dual = match &duals[selected] {
        Some(c) => c.clone(),
        None => {
            // Fallback alpha also failed through the cached path; solve once
            // more with the largest alpha before giving up.
            let alpha = alphas[selected];
            let mut m = kernel.clone();
            for i in 0..n {
                m[i][i] += alpha;
            }
            solve_spd(&m, &y).ok_or_else(|| {
                Error::DegenerateTraining("ridge system is singular for every alpha".into())
            })?
        }
    };

    // Primal weights: w = A^T c.
    let d_aug = data.d() + 1;
    let mut weights = vec![0.0; d_aug];
    for (row, &c) in rows.iter().zip(&dual) {
        for j in 0..d_aug {
            weights[j] += row[j] * c;
        }
    }

    Ok(RidgeClassifierModel {
        selected_alpha: alphas[selected],
        alphas,
        loo_sse,
        weights,
        feature_means: means,
        feature_stds: stds,
        degenerate_fallback,
    })
}

impl RidgeClassifierModel {
    pub fn decision_value(&self, row: &[f64]) -> f64 {
        let z = standardize_row(row, &self.feature_means, &self.feature_stds);
        let d = z.len();
        let mut score = self.weights[d];
        for j in 0..d {
            score += self.weights[j] * z[j];
        }
        score
    }

    pub fn predict(&self, row: &[f64]) -> ContextClass {
        decode_score(self.decision_value(row))
    }
}
