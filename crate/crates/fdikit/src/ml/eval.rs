//! Stratified k-fold cross-validation, accuracy, macro-F1, and fold
//! statistics (including the coefficient of variation across folds).

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;
use crate::seed::derive_seed;

use super::{Model, TrainingSet};

/// One fold: disjoint train/test row indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldSplit {
    pub train: Vec<u32>,
    pub test: Vec<u32>,
}

/// Stratified k-fold split: per class, rows are shuffled and dealt
/// round-robin, so per-class counts across folds differ by at most one.
pub fn stratified_kfold<T: Real>(
    ts: &TrainingSet<T>,
    k: usize,
    seed: u64,
) -> Result<Vec<FoldSplit>> {
    if k < 2 {
        return Err(Error::InvalidParameter("k must be >= 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut test_sets: Vec<Vec<u32>> = vec![Vec::new(); k];
    for class in 0..ts.classes.len() {
        let mut rows: Vec<u32> = (0..ts.len() as u32)
            .filter(|&r| ts.labels[r as usize] as usize == class)
            .collect();
        if rows.len() < k {
            return Err(Error::ClassTooSmall {
                label: ts.classes[class].to_string(),
                have: rows.len(),
                k,
            });
        }
        rows.shuffle(&mut rng);
        for (i, row) in rows.into_iter().enumerate() {
            test_sets[i % k].push(row);
        }
    }
    Ok(assemble_folds(ts.len() as u32, test_sets))
}

/// Group-aware stratified k-fold: whole groups (scenarios) are dealt to
/// folds, so rows from one scenario never appear on both sides of a split.
/// Requires at least k groups per class.
pub fn stratified_group_kfold<T: Real>(
    ts: &TrainingSet<T>,
    k: usize,
    seed: u64,
) -> Result<Vec<FoldSplit>> {
    if k < 2 {
        return Err(Error::InvalidParameter("k must be >= 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut group_fold: Vec<Option<usize>> = vec![None; ts.group_names.len()];
    for class in 0..ts.classes.len() {
        let mut groups: Vec<u32> = Vec::new();
        for r in 0..ts.len() {
            if ts.labels[r] as usize == class && !groups.contains(&ts.groups[r]) {
                groups.push(ts.groups[r]);
            }
        }
        if groups.len() < k {
            return Err(Error::ClassTooSmall {
                label: ts.classes[class].to_string(),
                have: groups.len(),
                k,
            });
        }
        groups.shuffle(&mut rng);
        for (i, g) in groups.into_iter().enumerate() {
            group_fold[g as usize] = Some(i % k);
        }
    }
    let mut test_sets: Vec<Vec<u32>> = vec![Vec::new(); k];
    for r in 0..ts.len() {
        let fold = group_fold[ts.groups[r] as usize].expect("group assigned");
        test_sets[fold].push(r as u32);
    }
    Ok(assemble_folds(ts.len() as u32, test_sets))
}

fn assemble_folds(n: u32, mut test_sets: Vec<Vec<u32>>) -> Vec<FoldSplit> {
    let mut folds = Vec::with_capacity(test_sets.len());
    for test in &mut test_sets {
        test.sort_unstable();
    }
    for i in 0..test_sets.len() {
        let test = test_sets[i].clone();
        let mut in_test = vec![false; n as usize];
        for &r in &test {
            in_test[r as usize] = true;
        }
        let train: Vec<u32> = (0..n).filter(|&r| !in_test[r as usize]).collect();
        folds.push(FoldSplit { train, test });
    }
    folds
}

/// Fraction of predictions matching the truth.
pub fn accuracy(truth: &[u32], predicted: &[u32]) -> f64 {
    assert_eq!(truth.len(), predicted.len());
    if truth.is_empty() {
        return 0.0;
    }
    let correct = truth
        .iter()
        .zip(predicted)
        .filter(|(t, p)| t == p)
        .count();
    correct as f64 / truth.len() as f64
}

/// Rows are true classes, columns are predicted classes.
pub fn confusion_matrix(truth: &[u32], predicted: &[u32], n_classes: usize) -> Vec<Vec<usize>> {
    let mut matrix = vec![vec![0usize; n_classes]; n_classes];
    for (&t, &p) in truth.iter().zip(predicted) {
        matrix[t as usize][p as usize] += 1;
    }
    matrix
}

/// Unweighted mean of per-class F1 over all `n_classes` classes; a class
/// with zero precision + recall contributes zero.
pub fn macro_f1(truth: &[u32], predicted: &[u32], n_classes: usize) -> f64 {
    let matrix = confusion_matrix(truth, predicted, n_classes);
    let mut sum = 0.0;
    for c in 0..n_classes {
        let tp = matrix[c][c] as f64;
        let fp: f64 = (0..n_classes)
            .filter(|&t| t != c)
            .map(|t| matrix[t][c] as f64)
            .sum();
        let fn_: f64 = (0..n_classes)
            .filter(|&p| p != c)
            .map(|p| matrix[c][p] as f64)
            .sum();
        let precision = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
        let recall = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 0.0 };
        if precision + recall > 0.0 {
            sum += 2.0 * precision * recall / (precision + recall);
        }
    }
    sum / n_classes as f64
}

/// Per-fold scores plus their means and the coefficient of variation
/// (population sigma over mean, in percent) of the fold accuracies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldStats {
    pub fold_accuracy: Vec<f64>,
    pub fold_f1: Vec<f64>,
    pub mean_accuracy: f64,
    pub mean_f1: f64,
    pub cv_percent: f64,
}

impl FoldStats {
    pub fn from_folds(fold_accuracy: Vec<f64>, fold_f1: Vec<f64>) -> Self {
        let k = fold_accuracy.len() as f64;
        let mean_accuracy = fold_accuracy.iter().sum::<f64>() / k;
        let mean_f1 = fold_f1.iter().sum::<f64>() / k;
        // Identical fold accuracies are exactly zero spread; the mean-based
        // formula would leave rounding dust.
        let all_equal = fold_accuracy.iter().all(|a| *a == fold_accuracy[0]);
        let variance = if all_equal {
            0.0
        } else {
            fold_accuracy
                .iter()
                .map(|a| (a - mean_accuracy) * (a - mean_accuracy))
                .sum::<f64>()
                / k
        };
        let cv_percent = if mean_accuracy > 0.0 {
            variance.sqrt() / mean_accuracy * 100.0
        } else {
            0.0
        };
        FoldStats {
            fold_accuracy,
            fold_f1,
            mean_accuracy,
            mean_f1,
            cv_percent,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.mean_accuracy.is_finite() && self.mean_f1.is_finite() && self.cv_percent.is_finite()
    }
}

/// Cross-validates a trainer over precomputed folds. Each fold trains on
/// its train split only and scores accuracy and macro-F1 on its test split.
pub fn evaluate_with_folds<T: Real, F>(
    trainer: F,
    ts: &TrainingSet<T>,
    folds: &[FoldSplit],
    seed: u64,
) -> Result<FoldStats>
where
    F: Fn(&TrainingSet<T>, u64) -> Result<Model<T>>,
{
    let mut fold_accuracy = Vec::with_capacity(folds.len());
    let mut fold_f1 = Vec::with_capacity(folds.len());
    for (i, fold) in folds.iter().enumerate() {
        debug_assert!(fold.train.iter().all(|r| !fold.test.contains(r)));
        let train_set = ts.subset(&fold.train);
        let model = trainer(&train_set, derive_seed(seed, &[i as u64]))?;
        let truth: Vec<u32> = fold.test.iter().map(|&r| ts.labels[r as usize]).collect();
        let predicted: Vec<u32> = fold
            .test
            .iter()
            .map(|&r| remap_class(&model, ts, model.predict_index(ts.row(r as usize))))
            .collect();
        fold_accuracy.push(accuracy(&truth, &predicted));
        fold_f1.push(macro_f1(&truth, &predicted, ts.classes.len()));
    }
    Ok(FoldStats::from_folds(fold_accuracy, fold_f1))
}

/// Maps a model's class index back into the evaluation set's class list.
/// Stratified folds keep the lists identical, in which case this is the
/// identity; it only matters for externally trained models.
fn remap_class<T: Real>(model: &Model<T>, ts: &TrainingSet<T>, index: u32) -> u32 {
    if model.classes == ts.classes {
        return index;
    }
    let label = &model.classes[index as usize];
    ts.classes
        .iter()
        .position(|c| c == label)
        .map(|p| p as u32)
        .unwrap_or(u32::MAX)
}

/// Stratified k-fold evaluation of one trainer.
pub fn evaluate<T: Real, F>(
    trainer: F,
    ts: &TrainingSet<T>,
    k: usize,
    seed: u64,
) -> Result<FoldStats>
where
    F: Fn(&TrainingSet<T>, u64) -> Result<Model<T>>,
{
    let folds = stratified_kfold(ts, k, seed)?;
    evaluate_with_folds(trainer, ts, &folds, seed)
}

#[cfg(test)]
mod tests {
    use super::super::test_support::blobs;
    use super::super::{train_decision_tree, TreeParams};
    use super::*;
    use crate::trace::BehaviourLabel;

    fn nine_row_set() -> TrainingSet<f64> {
        let rows: Vec<Vec<f64>> = (0..9).map(|i| vec![i as f64]).collect();
        let labels: Vec<BehaviourLabel> = (0..9)
            .map(|i| BehaviourLabel::new(format!("C{}", i % 3)))
            .collect();
        TrainingSet::from_rows(&rows, &labels).unwrap()
    }

    #[test]
    fn three_classes_three_folds_one_each() {
        let ts = nine_row_set();
        let folds = stratified_kfold(&ts, 3, 0).unwrap();
        assert_eq!(folds.len(), 3);
        for fold in &folds {
            assert_eq!(fold.test.len(), 3);
            let mut counts = [0; 3];
            for &r in &fold.test {
                counts[ts.labels[r as usize] as usize] += 1;
            }
            assert_eq!(counts, [1, 1, 1]);
        }
    }

    #[test]
    fn folds_partition_all_rows() {
        let ts = blobs(20, &[(0.0, 0.0), (8.0, 0.0), (0.0, 8.0)], 1.0, 3.0, 31);
        let folds = stratified_kfold(&ts, 3, 7).unwrap();
        let mut seen = vec![0u32; ts.len()];
        for fold in &folds {
            for &r in &fold.test {
                seen[r as usize] += 1;
            }
            for &r in &fold.train {
                assert!(!fold.test.contains(&r));
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn folds_deterministic_per_seed() {
        let ts = blobs(100, &[(0.0, 0.0), (8.0, 0.0), (0.0, 8.0)], 1.0, 3.0, 37);
        assert_eq!(
            stratified_kfold(&ts, 3, 9).unwrap(),
            stratified_kfold(&ts, 3, 9).unwrap()
        );
        assert_ne!(
            stratified_kfold(&ts, 3, 9).unwrap(),
            stratified_kfold(&ts, 3, 10).unwrap()
        );
    }

    #[test]
    fn class_smaller_than_k_rejected() {
        let rows = vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]];
        let labels = vec![
            BehaviourLabel::new("A"),
            BehaviourLabel::new("A"),
            BehaviourLabel::new("A"),
            BehaviourLabel::new("B"),
        ];
        let ts = TrainingSet::from_rows(&rows, &labels).unwrap();
        assert!(matches!(
            stratified_kfold(&ts, 3, 0),
            Err(Error::ClassTooSmall { .. })
        ));
    }

    #[test]
    fn group_folds_never_split_a_group() {
        // 12 rows in 6 groups of 2; groups 0..3 class A, 3..6 class B.
        let rows: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64]).collect();
        let labels: Vec<BehaviourLabel> = (0..12)
            .map(|i| BehaviourLabel::new(if i < 6 { "A" } else { "B" }))
            .collect();
        let mut ts = TrainingSet::from_rows(&rows, &labels).unwrap();
        ts.groups = (0..12).map(|i| (i / 2) as u32).collect();
        ts.group_names = (0..6).map(|g| format!("g{g}")).collect();
        let folds = stratified_group_kfold(&ts, 3, 1).unwrap();
        for fold in &folds {
            let test_groups: std::collections::BTreeSet<u32> =
                fold.test.iter().map(|&r| ts.groups[r as usize]).collect();
            for &r in &fold.train {
                assert!(!test_groups.contains(&ts.groups[r as usize]));
            }
        }
    }

    #[test]
    fn accuracy_and_macro_f1_pinned_example() {
        // Confusion [[2,1],[0,3]]: truth A for {A,A,B}, truth B for {B,B,B}.
        let truth = [0, 0, 0, 1, 1, 1];
        let predicted = [0, 0, 1, 1, 1, 1];
        let acc = accuracy(&truth, &predicted);
        assert!((acc - 5.0 / 6.0).abs() < 1e-15);
        // F1_A = 0.8, F1_B = 6/7; macro = 29/35.
        let f1 = macro_f1(&truth, &predicted, 2);
        assert!((f1 - 29.0 / 35.0).abs() < 1e-15);
        assert_eq!(
            confusion_matrix(&truth, &predicted, 2),
            vec![vec![2, 1], vec![0, 3]]
        );
    }

    #[test]
    fn perfect_classifier_stats() {
        let stats = FoldStats::from_folds(vec![1.0, 1.0, 1.0], vec![1.0, 1.0, 1.0]);
        assert_eq!(stats.mean_accuracy, 1.0);
        assert_eq!(stats.mean_f1, 1.0);
        assert_eq!(stats.cv_percent, 0.0);
    }

    #[test]
    fn equal_fold_accuracies_have_zero_cv() {
        let stats = FoldStats::from_folds(vec![0.99, 0.99, 0.99], vec![0.99, 0.99, 0.99]);
        assert_eq!(stats.cv_percent, 0.0);
    }

    #[test]
    fn evaluate_runs_end_to_end() {
        let ts = blobs(20, &[(0.0, 0.0), (8.0, 0.0), (0.0, 8.0)], 1.0, 3.0, 41);
        let stats = evaluate(
            |train, seed| train_decision_tree(train, &TreeParams::default(), seed),
            &ts,
            3,
            11,
        )
        .unwrap();
        assert!(stats.mean_accuracy >= 0.9);
        assert!(stats.is_finite());
        assert_eq!(stats.fold_accuracy.len(), 3);
    }
}
