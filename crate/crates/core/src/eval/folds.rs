//! Fold construction: stratified k-fold, leave-one-subject-out, and custom
//! subject-keyed splits.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::segmentation::ContextClass;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum FoldStrategy {
    StratifiedK { k: usize },
    Loso,
    Custom,
}

impl std::fmt::Display for FoldStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FoldStrategy::StratifiedK { k } => write!(f, "stratified-{k}"),
            FoldStrategy::Loso => write!(f, "loso"),
            FoldStrategy::Custom => write!(f, "custom"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    /// Test-side subject for subject-keyed strategies.
    pub subject: Option<String>,
    /// Test side contains a single class; macro metrics are partly
    /// undefined on such folds.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FoldPlan {
    pub strategy: FoldStrategy,
    pub folds: Vec<Fold>,
    pub seed: u64,
}

impl FoldPlan {
    /// Folds must partition the index set: disjoint test sides covering
    /// every index, with each train side the exact complement.
    pub fn validate(&self, n: usize) -> Result<()> {
        let mut seen = vec![false; n];
        for fold in &self.folds {
            for &i in fold.test.iter().chain(&fold.train) {
                if i >= n {
                    return Err(Error::invalid(format!("fold index {i} out of bounds for {n} samples")));
                }
            }
            for &i in &fold.test {
                if seen[i] {
                    return Err(Error::invalid(format!("index {i} appears in two test folds")));
                }
                seen[i] = true;
            }
            if fold.train.len() + fold.test.len() != n {
                return Err(Error::invalid("train and test sides must partition the dataset"));
            }
        }
        if seen.iter().any(|&s| !s) {
            return Err(Error::invalid("test folds do not cover the dataset"));
        }
        Ok(())
    }
}

fn degenerate_test_side(labels: &[ContextClass], test: &[usize]) -> bool {
    let mut counts = [0usize; 2];
    for &i in test {
        counts[labels[i].index()] += 1;
    }
    counts[0] == 0 || counts[1] == 0
}

/// Stratified k-fold: per class, a seeded shuffle followed by round-robin
/// fold assignment, which bounds the per-fold class-count deviation by one
/// sample.
pub fn make_stratified_folds(labels: &[ContextClass], k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::invalid("stratified folding needs k >= 2"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut test_sets: Vec<Vec<usize>> = vec![Vec::new(); k];
    for class in ContextClass::ALL {
        let mut members: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == class)
            .map(|(i, _)| i)
            .collect();
        if members.len() < k {
            return Err(Error::invalid(format!(
                "class {class} has {} members, fewer than k = {k}",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        for (pos, idx) in members.into_iter().enumerate() {
            test_sets[pos % k].push(idx);
        }
    }
    let folds = test_sets
        .into_iter()
        .map(|mut test| {
            test.sort_unstable();
            let train: Vec<usize> = (0..labels.len()).filter(|i| !test.contains(i)).collect();
            let degenerate = degenerate_test_side(labels, &test);
            Fold {
                train,
                test,
                subject: None,
                degenerate,
            }
        })
        .collect();
    Ok(FoldPlan {
        strategy: FoldStrategy::StratifiedK { k },
        folds,
        seed,
    })
}

/// Leave-one-subject-out: one fold per distinct subject, ordered by subject
/// id. Folds whose test side carries a single class are flagged degenerate.
pub fn make_loso_folds(subjects: &[String], labels: &[ContextClass]) -> Result<FoldPlan> {
    if subjects.len() != labels.len() {
        return Err(Error::invalid("subjects and labels must have equal length"));
    }
    let mut by_subject: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, s) in subjects.iter().enumerate() {
        by_subject.entry(s.as_str()).or_default().push(i);
    }
    if by_subject.len() < 2 {
        return Err(Error::invalid("leave-one-subject-out needs at least 2 subjects"));
    }
    let folds = by_subject
        .iter()
        .map(|(subject, test)| {
            let train: Vec<usize> = (0..subjects.len()).filter(|i| !test.contains(i)).collect();
            Fold {
                train,
                degenerate: degenerate_test_side(labels, test),
                test: test.clone(),
                subject: Some(subject.to_string()),
            }
        })
        .collect();
    Ok(FoldPlan {
        strategy: FoldStrategy::Loso,
        folds,
        seed: 0,
    })
}

/// Custom subject-keyed splits: every subject is assigned to exactly one
/// fold, so no subject ever appears on both sides.
pub fn make_custom_folds(
    subjects: &[String],
    labels: &[ContextClass],
    assignment: &BTreeMap<String, usize>,
) -> Result<FoldPlan> {
    if subjects.len() != labels.len() {
        return Err(Error::invalid("subjects and labels must have equal length"));
    }
    let mut fold_ids: Vec<usize> = assignment.values().copied().collect();
    fold_ids.sort_unstable();
    fold_ids.dedup();
    if fold_ids.len() < 2 {
        return Err(Error::invalid("custom splits need at least 2 folds"));
    }
    let mut test_sets: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, s) in subjects.iter().enumerate() {
        let fold = assignment
            .get(s)
            .ok_or_else(|| Error::invalid(format!("subject {s} has no fold assignment")))?;
        test_sets.entry(*fold).or_default().push(i);
    }
    let folds = test_sets
        .values()
        .map(|test| {
            let train: Vec<usize> = (0..subjects.len()).filter(|i| !test.contains(i)).collect();
            Fold {
                train,
                degenerate: degenerate_test_side(labels, test),
                test: test.clone(),
                subject: None,
            }
        })
        .collect();
    Ok(FoldPlan {
        strategy: FoldStrategy::Custom,
        folds,
        seed: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn imbalanced_labels(indoor: usize, outdoor: usize) -> Vec<ContextClass> {
        let mut labels = vec![ContextClass::Indoor; indoor];
        labels.extend(vec![ContextClass::Outdoor; outdoor]);
        labels
    }

    #[test]
    fn table_shaped_split_has_balanced_folds() {
        let labels = imbalanced_labels(241, 70);
        let plan = make_stratified_folds(&labels, 5, 42).unwrap();
        plan.validate(311).unwrap();
        for fold in &plan.folds {
            assert!(fold.test.len() == 62 || fold.test.len() == 63, "{}", fold.test.len());
            let indoor = fold
                .test
                .iter()
                .filter(|&&i| labels[i] == ContextClass::Indoor)
                .count();
            let outdoor = fold.test.len() - indoor;
            assert!(indoor == 48 || indoor == 49, "indoor {indoor}");
            assert_eq!(outdoor, 14);
            assert!(!fold.degenerate);
        }
    }

    #[test]
    fn tiny_balanced_split_is_exact() {
        let labels = imbalanced_labels(5, 5);
        let plan = make_stratified_folds(&labels, 5, 7).unwrap();
        for fold in &plan.folds {
            let indoor = fold
                .test
                .iter()
                .filter(|&&i| labels[i] == ContextClass::Indoor)
                .count();
            assert_eq!(fold.test.len(), 2);
            assert_eq!(indoor, 1);
        }
    }

    #[test]
    fn same_seed_reproduces_the_plan() {
        let labels = imbalanced_labels(30, 12);
        let a = make_stratified_folds(&labels, 5, 11).unwrap();
        let b = make_stratified_folds(&labels, 5, 11).unwrap();
        for (fa, fb) in a.folds.iter().zip(&b.folds) {
            assert_eq!(fa.test, fb.test);
        }
        let c = make_stratified_folds(&labels, 5, 12).unwrap();
        assert!(a.folds.iter().zip(&c.folds).any(|(x, y)| x.test != y.test));
    }

    #[test]
    fn class_smaller_than_k_is_rejected() {
        let labels = imbalanced_labels(10, 3);
        assert!(make_stratified_folds(&labels, 5, 0).is_err());
    }

    #[test]
    fn loso_produces_one_fold_per_subject() {
        let subjects: Vec<String> = (1..=9)
            .flat_map(|s| std::iter::repeat_n(format!("s{s:02}"), 4))
            .collect();
        let labels: Vec<ContextClass> = subjects
            .iter()
            .map(|s| {
                if s == "s03" {
                    ContextClass::Outdoor
                } else {
                    ContextClass::Indoor
                }
            })
            .collect();
        let plan = make_loso_folds(&subjects, &labels).unwrap();
        assert_eq!(plan.folds.len(), 9);
        plan.validate(subjects.len()).unwrap();
        let s03 = plan
            .folds
            .iter()
            .find(|f| f.subject.as_deref() == Some("s03"))
            .unwrap();
        assert!(s03.degenerate);
    }

    #[test]
    fn single_subject_is_rejected() {
        let subjects = vec!["only".to_string(); 4];
        let labels = imbalanced_labels(2, 2);
        assert!(make_loso_folds(&subjects, &labels).is_err());
    }

    #[test]
    fn custom_folds_group_subjects() {
        let subjects: Vec<String> = ["a", "a", "b", "b", "c", "c"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let labels = imbalanced_labels(3, 3);
        let mut assignment = BTreeMap::new();
        assignment.insert("a".to_string(), 0);
        assignment.insert("b".to_string(), 1);
        assignment.insert("c".to_string(), 0);
        let plan = make_custom_folds(&subjects, &labels, &assignment).unwrap();
        assert_eq!(plan.folds.len(), 2);
        plan.validate(6).unwrap();
    }

    proptest! {
        #[test]
        fn loso_never_mixes_subjects_across_sides(seed in any::<u64>()) {
            let mut state = seed | 1;
            let subjects: Vec<String> = (0..24)
                .map(|_| {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                    format!("s{:02}", (state >> 33) % 6)
                })
                .collect();
            let labels: Vec<ContextClass> = (0..24)
                .map(|i| if i % 3 == 0 { ContextClass::Outdoor } else { ContextClass::Indoor })
                .collect();
            prop_assume!(subjects.iter().collect::<std::collections::BTreeSet<_>>().len() >= 2);
            let plan = make_loso_folds(&subjects, &labels).unwrap();
            for fold in &plan.folds {
                let test_subjects: std::collections::BTreeSet<&String> =
                    fold.test.iter().map(|&i| &subjects[i]).collect();
                let train_subjects: std::collections::BTreeSet<&String> =
                    fold.train.iter().map(|&i| &subjects[i]).collect();
                prop_assert!(test_subjects.is_disjoint(&train_subjects));
            }
        }

        #[test]
        fn stratified_fold_proportions_deviate_by_at_most_one(
            indoor in 10usize..60,
            outdoor in 10usize..60,
            seed in any::<u64>()
        ) {
            let labels = imbalanced_labels(indoor, outdoor);
            let k = 5;
            let plan = make_stratified_folds(&labels, k, seed).unwrap();
            plan.validate(indoor + outdoor).unwrap();
            for fold in &plan.folds {
                let fold_indoor = fold.test.iter().filter(|&&i| labels[i] == ContextClass::Indoor).count();
                let fold_outdoor = fold.test.len() - fold_indoor;
                prop_assert!((fold_indoor as f64 - indoor as f64 / k as f64).abs() <= 1.0);
                prop_assert!((fold_outdoor as f64 - outdoor as f64 / k as f64).abs() <= 1.0);
            }
        }
    }
}
