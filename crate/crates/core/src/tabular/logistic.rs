//! L2-regularized logistic regression with optional frequency-balanced
//! class weights, solved by deterministic full-batch Nesterov gradient
//! descent (fixed tolerance, fixed iteration cap). The problem is convex, so
//! the fit depends only on the data and configuration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::segmentation::ContextClass;
use crate::tabular::{decode_score, encode_label, TabularDataset};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogisticConfig {
    pub l2_strength: f64,
    pub max_iter: usize,
    /// Weight classes by n / (2 n_c).
    pub balanced: bool,
    /// Stop when the gradient infinity norm falls below this.
    pub tol: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self {
            l2_strength: 1.0,
            max_iter: 1000,
            balanced: true,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    /// Per-class sample weights, ordered as [`ContextClass::ALL`].
    pub class_weights: [f64; 2],
    pub converged: bool,
    pub iterations: usize,
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Largest eigenvalue of (1/4n) A^T diag(w) A by power iteration, where A is
/// the design matrix with a trailing constant column.
fn hessian_bound(x: &[Vec<f64>], sample_weights: &[f64]) -> f64 {
    let n = x.len();
    let d = x[0].len() + 1;
    let mut v = vec![1.0 / (d as f64).sqrt(); d];
    let mut lambda = 0.0;
    for _ in 0..40 {
        let mut u = vec![0.0; n];
        for (i, row) in x.iter().enumerate() {
            let mut dot = v[d - 1];
            for (a, b) in row.iter().zip(&v) {
                dot += a * b;
            }
            u[i] = dot * sample_weights[i] / (4.0 * n as f64);
        }
        let mut next = vec![0.0; d];
        for (i, row) in x.iter().enumerate() {
            for (j, a) in row.iter().enumerate() {
                next[j] += a * u[i];
            }
            next[d - 1] += u[i];
        }
        lambda = next.iter().map(|t| t * t).sum::<f64>().sqrt();
        if lambda == 0.0 {
            return 0.0;
        }
        for t in &mut next {
            *t /= lambda;
        }
        v = next;
    }
    lambda
}

pub fn fit_logistic(data: &TabularDataset, cfg: &LogisticConfig) -> Result<LogisticModel> {
    if !(cfg.l2_strength > 0.0) {
        return Err(Error::invalid("logistic l2_strength must be positive"));
    }
    let counts = data.class_counts();
    if counts[0] == 0 || counts[1] == 0 {
        return Err(Error::DegenerateTraining(
            "logistic regression needs both classes in the training data".into(),
        ));
    }
    let n = data.n();
    let d = data.d();
    let class_weights = if cfg.balanced {
        [
            n as f64 / (2.0 * counts[0] as f64),
            n as f64 / (2.0 * counts[1] as f64),
        ]
    } else {
        [1.0, 1.0]
    };
    let sample_weights: Vec<f64> = data.y.iter().map(|&c| class_weights[c.index()]).collect();
    let targets: Vec<f64> = data.y.iter().map(|&c| encode_label(c)).collect();

    let step = 1.0 / (hessian_bound(&data.x, &sample_weights) * 1.05 + cfg.l2_strength);

    // Parameters: d feature weights plus the unpenalized intercept.
    let mut w = vec![0.0; d + 1];
    let mut w_prev = w.clone();
    let mut t_momentum = 1.0f64;
    let mut converged = false;
    let mut iterations = 0;

    let grad = |params: &[f64]| -> (Vec<f64>, f64) {
        let mut g = vec![0.0; d + 1];
        for ((row, &target), &omega) in data.x.iter().zip(&targets).zip(&sample_weights) {
            let mut z = params[d];
            for (a, b) in row.iter().zip(params) {
                z += a * b;
            }
            let factor = -omega * target * sigmoid(-target * z) / n as f64;
            for (j, a) in row.iter().enumerate() {
                g[j] += factor * a;
            }
            g[d] += factor;
        }
        let mut norm: f64 = g[d].abs();
        for j in 0..d {
            g[j] += cfg.l2_strength * params[j];
            norm = norm.max(g[j].abs());
        }
        (g, norm)
    };

    for iter in 1..=cfg.max_iter {
        iterations = iter;
        let t_next = (1.0 + (1.0 + 4.0 * t_momentum * t_momentum).sqrt()) / 2.0;
        let momentum = (t_momentum - 1.0) / t_next;
        let lookahead: Vec<f64> = w
            .iter()
            .zip(&w_prev)
            .map(|(&a, &b)| a + momentum * (a - b))
            .collect();
        let (g, norm) = grad(&lookahead);
        if norm <= cfg.tol {
            converged = true;
            break;
        }
        w_prev = w;
        w = lookahead.iter().zip(&g).map(|(&p, &gi)| p - step * gi).collect();
        t_momentum = t_next;
    }

    Ok(LogisticModel {
        intercept: w[d],
        weights: w[..d].to_vec(),
        class_weights,
        converged,
        iterations,
    })
}

impl LogisticModel {
    pub fn decision_value(&self, row: &[f64]) -> f64 {
        let mut z = self.intercept;
        for (a, b) in row.iter().zip(&self.weights) {
            z += a * b;
        }
        z
    }

    /// Probability of the indoor class.
    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        sigmoid(self.decision_value(row))
    }

    pub fn predict(&self, row: &[f64]) -> ContextClass {
        decode_score(self.decision_value(row))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn dataset(x: Vec<Vec<f64>>, y: Vec<ContextClass>) -> TabularDataset {
        let n = x.len();
        let d = x[0].len();
        TabularDataset::new(
            x,
            y,
            vec!["s".into(); n],
            (0..d).map(|j| format!("f{j}")).collect(),
        )
        .unwrap()
    }

    #[test]
    fn separable_boundary_lies_in_the_gap() {
        let x: Vec<Vec<f64>> = (1..=10)
            .map(|i| vec![-0.5 - 0.3 * i as f64])
            .chain((1..=10).map(|i| vec![0.5 + 0.3 * i as f64]))
            .collect();
        let y: Vec<ContextClass> = x
            .iter()
            .map(|r| {
                if r[0] > 0.0 {
                    ContextClass::Indoor
                } else {
                    ContextClass::Outdoor
                }
            })
            .collect();
        let data = dataset(x.clone(), y.clone());
        let cfg = LogisticConfig {
            l2_strength: 1e-3,
            max_iter: 5000,
            ..LogisticConfig::default()
        };
        let model = fit_logistic(&data, &cfg).unwrap();
        for (row, label) in x.iter().zip(&y) {
            assert_eq!(model.predict(row), *label);
        }
        let boundary = -model.intercept / model.weights[0];
        assert!(boundary > -0.8 && boundary < 0.8, "boundary {boundary}");
    }

    #[test]
    fn balanced_weights_follow_the_frequency_formula() {
        let x: Vec<Vec<f64>> = (0..100).map(|i| vec![i as f64]).collect();
        let y: Vec<ContextClass> = (0..100)
            .map(|i| {
                if i < 90 {
                    ContextClass::Indoor
                } else {
                    ContextClass::Outdoor
                }
            })
            .collect();
        let model = fit_logistic(&dataset(x, y), &LogisticConfig::default()).unwrap();
        // w_c = n / (2 n_c): minority outdoor 100/(2*10) = 5, majority 100/180.
        assert!((model.class_weights[ContextClass::Outdoor.index()] - 5.0).abs() < 1e-12);
        assert!((model.class_weights[ContextClass::Indoor.index()] - 100.0 / 180.0).abs() < 1e-12);
    }

    #[test]
    fn single_class_is_degenerate() {
        let data = dataset(vec![vec![0.0], vec![1.0]], vec![ContextClass::Indoor; 2]);
        assert!(matches!(
            fit_logistic(&data, &LogisticConfig::default()),
            Err(Error::DegenerateTraining(_))
        ));
    }

    /// Standard normal CDF by trapezoidal quadrature; independent oracle for
    /// the Bayes accuracy of two symmetric unit-variance blobs.
    fn normal_cdf_by_quadrature(z: f64) -> f64 {
        let steps = 200_000;
        let lo = -12.0f64;
        let width = (z - lo) / steps as f64;
        let pdf = |t: f64| (-t * t / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut acc = (pdf(lo) + pdf(z)) / 2.0;
        for i in 1..steps {
            acc += pdf(lo + width * i as f64);
        }
        acc * width
    }

    #[test]
    fn gaussian_blobs_reach_near_bayes_cv_accuracy() {
        let bayes = normal_cdf_by_quadrature(3.0 * 2.0f64.sqrt() / 2.0);
        assert!((bayes - 0.983).abs() < 0.001, "bayes rate {bayes}");

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..400 {
            let (mu, label) = if i % 2 == 0 {
                (0.0, ContextClass::Outdoor)
            } else {
                (3.0, ContextClass::Indoor)
            };
            x.push(vec![mu + noise.sample(&mut rng), mu + noise.sample(&mut rng)]);
            y.push(label);
        }

        // Plain 5-fold rotation; folds are class-balanced by construction.
        let mut correct = 0;
        let mut total = 0;
        for fold in 0..5 {
            let test_idx: Vec<usize> = (0..400).filter(|i| i % 5 == fold).collect();
            let train_idx: Vec<usize> = (0..400).filter(|i| i % 5 != fold).collect();
            let train = dataset(
                train_idx.iter().map(|&i| x[i].clone()).collect(),
                train_idx.iter().map(|&i| y[i]).collect(),
            );
            let model = fit_logistic(&train, &LogisticConfig::default()).unwrap();
            for &i in &test_idx {
                if model.predict(&x[i]) == y[i] {
                    correct += 1;
                }
                total += 1;
            }
        }
        let acc = correct as f64 / total as f64;
        assert!(acc >= 0.95, "cv accuracy {acc}, bayes {bayes}");
        assert!(acc <= bayes + 0.03, "cv accuracy {acc} implausibly above bayes {bayes}");
    }

    #[test]
    fn feature_permutation_leaves_predictions_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let x: Vec<Vec<f64>> = (0..60)
            .map(|_| (0..3).map(|_| noise.sample(&mut rng)).collect())
            .collect();
        let y: Vec<ContextClass> = x
            .iter()
            .map(|r| {
                if r[0] - r[2] > 0.0 {
                    ContextClass::Indoor
                } else {
                    ContextClass::Outdoor
                }
            })
            .collect();
        let permuted: Vec<Vec<f64>> = x.iter().map(|r| vec![r[2], r[0], r[1]]).collect();
        let cfg = LogisticConfig::default();
        let a = fit_logistic(&dataset(x.clone(), y.clone()), &cfg).unwrap();
        let b = fit_logistic(&dataset(permuted.clone(), y), &cfg).unwrap();
        for (r1, r2) in x.iter().zip(&permuted) {
            assert_eq!(a.predict(r1), b.predict(r2));
        }
    }
}
