//! k-nearest-neighbor classifier with uniform weights and Euclidean
//! distance. Vote ties break toward the class with the smaller mean neighbor
//! distance; distance ties break toward the lower training index.

use crate::error::{Error, Result};
use crate::segmentation::ContextClass;
use crate::tabular::TabularDataset;

#[derive(Debug, Clone)]
pub struct KnnModel {
    pub k: usize,
    pub x_train: Vec<Vec<f64>>,
    pub y_train: Vec<ContextClass>,
}

pub fn fit_knn(data: &TabularDataset, k: usize) -> Result<KnnModel> {
    if k == 0 {
        return Err(Error::invalid("k must be positive"));
    }
    if k > data.n() {
        return Err(Error::invalid(format!(
            "k = {k} exceeds the {} training samples",
            data.n()
        )));
    }
    Ok(KnnModel {
        k,
        x_train: data.x.clone(),
        y_train: data.y.clone(),
    })
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

impl KnnModel {
    pub fn predict(&self, row: &[f64]) -> ContextClass {
        let mut distances: Vec<(f64, usize)> = self
            .x_train
            .iter()
            .enumerate()
            .map(|(i, train)| (euclidean(row, train), i))
            .collect();
        distances.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let neighbors = &distances[..self.k];

        let mut votes = [0usize; 2];
        let mut dist_sums = [0.0f64; 2];
        for &(d, i) in neighbors {
            let c = self.y_train[i].index();
            votes[c] += 1;
            dist_sums[c] += d;
        }
        if votes[0] == 0 && votes[1] == 0 {
            unreachable!("k >= 1 guarantees at least one neighbor");
        }
        if votes[0] == votes[1] {
            // Tie: smaller mean neighbor distance wins; a further exact tie
            // falls back to the first class in declaration order.
            let mean0 = dist_sums[0] / votes[0] as f64;
            let mean1 = dist_sums[1] / votes[1] as f64;
            if mean1 < mean0 {
                ContextClass::Indoor
            } else {
                ContextClass::Outdoor
            }
        } else if votes[ContextClass::Indoor.index()] > votes[ContextClass::Outdoor.index()] {
            ContextClass::Indoor
        } else {
            ContextClass::Outdoor
        }
    }
}
