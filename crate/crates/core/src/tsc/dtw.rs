//! Dynamic time warping with squared point cost, no warping-window
//! constraint and boundary alignment, plus the 1-nearest-neighbor classifier
//! built on it. Both operate on native series lengths.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::segmentation::ContextClass;
use crate::signal::UnivariateSeries;
use crate::tsc::SeriesDataset;

/// Accumulated minimal alignment cost between two slices.
pub fn dtw_distance_slices(a: &[f64], b: &[f64]) -> f64 {
    let (n, m) = (a.len(), b.len());
    debug_assert!(n > 0 && m > 0);
    let mut prev = vec![f64::INFINITY; m + 1];
    let mut curr = vec![f64::INFINITY; m + 1];
    prev[0] = 0.0;
    for i in 1..=n {
        curr[0] = f64::INFINITY;
        for j in 1..=m {
            let diff = a[i - 1] - b[j - 1];
            let cost = diff * diff;
            curr[j] = cost + prev[j].min(curr[j - 1]).min(prev[j - 1]);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[m]
}

pub fn dtw_distance(a: &UnivariateSeries, b: &UnivariateSeries) -> f64 {
    dtw_distance_slices(&a.values, &b.values)
}

/// Label each test series with the label of its minimum-distance training
/// series; distance ties break toward the lower training index.
pub fn knn1_dtw_fit_predict(
    train: &SeriesDataset,
    test: &SeriesDataset,
) -> Result<Vec<ContextClass>> {
    if train.n() == 0 {
        return Err(Error::invalid("1NN-DTW needs a non-empty training set"));
    }
    Ok(test
        .series
        .par_iter()
        .map(|query| {
            let mut best = (f64::INFINITY, 0usize);
            for (i, candidate) in train.series.iter().enumerate() {
                let d = dtw_distance(query, candidate);
                if d < best.0 {
                    best = (d, i);
                }
            }
            train.y[best.1]
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tsc::LengthMode;
    use proptest::prelude::*;

    fn series(values: Vec<f64>) -> UnivariateSeries {
        UnivariateSeries::new(values).unwrap()
    }

    #[test]
    fn distance_to_self_is_zero() {
        let s = series(vec![0.4, -1.0, 2.0, 0.0, 0.4]);
        assert_eq!(dtw_distance(&s, &s), 0.0);
    }

    #[test]
    fn warping_absorbs_repeated_values() {
        let a = series(vec![0.0, 0.0, 1.0]);
        let b = series(vec![0.0, 1.0]);
        assert_eq!(dtw_distance(&a, &b), 0.0);
    }

    /// Exhaustive enumeration of every monotone boundary-aligned warping
    /// path, accumulating the squared cost step by step.
    fn enumerate_paths_min_cost(a: &[f64], b: &[f64]) -> f64 {
        fn walk(a: &[f64], b: &[f64], i: usize, j: usize, acc: f64, best: &mut f64) {
            let d = a[i] - b[j];
            let acc = acc + d * d;
            if i == a.len() - 1 && j == b.len() - 1 {
                if acc < *best {
                    *best = acc;
                }
                return;
            }
            if i + 1 < a.len() {
                walk(a, b, i + 1, j, acc, best);
            }
            if j + 1 < b.len() {
                walk(a, b, i, j + 1, acc, best);
            }
            if i + 1 < a.len() && j + 1 < b.len() {
                walk(a, b, i + 1, j + 1, acc, best);
            }
        }
        let mut best = f64::INFINITY;
        walk(a, b, 0, 0, 0.0, &mut best);
        best
    }

    #[test]
    fn distance_equals_exhaustive_path_enumeration_on_small_grids() {
        let values = [0.0, 0.5, 1.0];
        // All series of length 1..=3 over a 3-symbol value set.
        let mut all: Vec<Vec<f64>> = Vec::new();
        for len in 1..=3usize {
            let mut indices = vec![0usize; len];
            loop {
                all.push(indices.iter().map(|&i| values[i]).collect());
                let mut pos = 0;
                loop {
                    indices[pos] += 1;
                    if indices[pos] < values.len() {
                        break;
                    }
                    indices[pos] = 0;
                    pos += 1;
                    if pos == len {
                        break;
                    }
                }
                if pos == len {
                    break;
                }
            }
        }
        for a in &all {
            for b in &all {
                let fast = dtw_distance_slices(a, b);
                let slow = enumerate_paths_min_cost(a, b);
                assert!((fast - slow).abs() < 1e-12, "{a:?} vs {b:?}: {fast} != {slow}");
            }
        }
    }

    #[test]
    fn nearest_training_series_wins() {
        let train = SeriesDataset::new(
            vec![series(vec![0.0, 0.0, 0.0]), series(vec![1.0, 1.0, 1.0])],
            vec![ContextClass::Outdoor, ContextClass::Indoor],
            vec!["a".into(), "b".into()],
            LengthMode::Fixed,
        )
        .unwrap();
        let test = SeriesDataset::new(
            vec![series(vec![0.9, 1.1, 1.0, 0.95]), series(vec![0.1, -0.1])],
            vec![ContextClass::Indoor, ContextClass::Outdoor],
            vec!["c".into(), "d".into()],
            LengthMode::Variable,
        )
        .unwrap();
        let pred = knn1_dtw_fit_predict(&train, &test).unwrap();
        assert_eq!(pred, vec![ContextClass::Indoor, ContextClass::Outdoor]);
    }

    #[test]
    fn predictions_match_full_matrix_oracle() {
        let mut state = 5u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            (state >> 33) as f64 / (1u64 << 31) as f64 * 2.0 - 1.0
        };
        let mut make = |label: f64| -> Vec<f64> { (0..20).map(|_| next() + label).collect() };
        let train_series: Vec<Vec<f64>> = (0..10)
            .map(|i| make(if i % 2 == 0 { 0.0 } else { 2.0 }))
            .collect();
        let train_labels: Vec<ContextClass> = (0..10)
            .map(|i| {
                if i % 2 == 0 {
                    ContextClass::Outdoor
                } else {
                    ContextClass::Indoor
                }
            })
            .collect();
        let test_series: Vec<Vec<f64>> = (0..10)
            .map(|i| make(if i < 5 { 0.0 } else { 2.0 }))
            .collect();

        let train = SeriesDataset::new(
            train_series.iter().cloned().map(|v| series(v)).collect(),
            train_labels.clone(),
            vec!["s".into(); 10],
            LengthMode::Fixed,
        )
        .unwrap();
        let test = SeriesDataset::new(
            test_series.iter().cloned().map(|v| series(v)).collect(),
            vec![ContextClass::Indoor; 10],
            vec!["s".into(); 10],
            LengthMode::Fixed,
        )
        .unwrap();
        let fast = knn1_dtw_fit_predict(&train, &test).unwrap();

        // Oracle: materialize the full pairwise matrix, then scan rows.
        let matrix: Vec<Vec<f64>> = test_series
            .iter()
            .map(|t| train_series.iter().map(|r| dtw_distance_slices(t, r)).collect())
            .collect();
        for (row, &predicted) in matrix.iter().zip(&fast) {
            let mut best = 0;
            for (j, &d) in row.iter().enumerate() {
                if d < row[best] {
                    best = j;
                }
            }
            assert_eq!(predicted, train_labels[best]);
        }
    }

    proptest! {
        #[test]
        fn dtw_is_symmetric(
            a in proptest::collection::vec(-3.0f64..3.0, 1..12),
            b in proptest::collection::vec(-3.0f64..3.0, 1..12)
        ) {
            let sa = series(a);
            let sb = series(b);
            prop_assert_eq!(dtw_distance(&sa, &sb), dtw_distance(&sb, &sa));
        }

        #[test]
        fn dtw_never_exceeds_squared_euclidean_for_equal_lengths(
            a in proptest::collection::vec(-3.0f64..3.0, 2..12),
            seed in any::<u64>()
        ) {
            let mut state = seed | 1;
            let b: Vec<f64> = a
                .iter()
                .map(|v| {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                    v + ((state >> 33) as f64 / (1u64 << 31) as f64) - 0.5
                })
                .collect();
            let euclidean_sq: f64 = a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum();
            prop_assert!(dtw_distance_slices(&a, &b) <= euclidean_sq + 1e-12);
        }

        #[test]
        fn dtw_zero_iff_equal_elementwise(
            a in proptest::collection::vec(-2.0f64..2.0, 1..10)
        ) {
            prop_assert_eq!(dtw_distance_slices(&a, &a), 0.0);
            let mut perturbed = a.clone();
            perturbed[0] += 0.125;
            let d = dtw_distance_slices(&a, &perturbed);
            prop_assert!(d > 0.0);
        }
    }
}
