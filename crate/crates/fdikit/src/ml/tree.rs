//! CART-style binary trees: classification by Gini impurity, regression by
//! variance reduction (used as the boosting base learner).
//!
//! Split search is exhaustive over midpoints between consecutive sorted
//! unique feature values (Extra-Trees mode draws one uniform threshold per
//! candidate feature instead). The winner maximizes impurity decrease with
//! ties broken by lower feature index, then lower threshold: scanning
//! features ascending and thresholds ascending with a strict `>` update
//! implements exactly that. Impurity arithmetic runs on integer counts cast
//! to f64, so the chosen split is bit-reproducible.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::num::Real;

use super::{FeatureSubset, TrainingSet, TreeParams};

/// Arena-allocated binary tree with leaf payload `L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree<T, L> {
    pub nodes: Vec<Node<T, L>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node<T, L> {
    Split {
        feature: usize,
        threshold: T,
        left: usize,
        right: usize,
    },
    Leaf(L),
}

impl<T: Real, L> Tree<T, L> {
    /// Walks the tree for one feature vector. Rows go left when
    /// `value <= threshold`.
    pub fn decide(&self, features: &[T]) -> &L {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                Node::Leaf(payload) => return payload,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if features[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk<T, L>(nodes: &[Node<T, L>], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

/// Classification tree: leaves carry a class index.
pub type ClassTree<T> = Tree<T, u32>;
/// Regression tree: leaves carry a (learning-rate scaled) value.
pub type RegTree<T> = Tree<T, f64>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(super) struct Split<T> {
    pub feature: usize,
    pub threshold: T,
    pub decrease: f64,
}

pub(super) fn gini(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    let mut acc = 0.0;
    for &c in counts {
        let p = c as f64 / n;
        acc += p * p;
    }
    1.0 - acc
}

pub(super) fn gini_decrease(
    parent: &[usize],
    left: &[usize],
    right: &[usize],
    n: usize,
    nl: usize,
) -> f64 {
    let nr = n - nl;
    gini(parent, n)
        - (nl as f64 / n as f64) * gini(left, nl)
        - (nr as f64 / n as f64) * gini(right, nr)
}

fn class_counts<T: Real>(ts: &TrainingSet<T>, rows: &[u32]) -> Vec<usize> {
    let mut counts = vec![0usize; ts.classes.len()];
    for &r in rows {
        counts[ts.labels[r as usize] as usize] += 1;
    }
    counts
}

pub(super) fn majority_class(counts: &[usize]) -> u32 {
    let mut best = 0usize;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best as u32
}

/// Candidate feature indices for one node, ascending.
fn candidate_features(
    n_features: usize,
    subset: FeatureSubset,
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    match subset {
        FeatureSubset::All => (0..n_features).collect(),
        FeatureSubset::Sqrt => {
            let k = ((n_features as f64).sqrt().ceil() as usize).clamp(1, n_features);
            let mut picked: Vec<usize> = rand::seq::index::sample(rng, n_features, k).into_vec();
            picked.sort_unstable();
            picked
        }
    }
}

fn best_gini_split<T: Real>(
    ts: &TrainingSet<T>,
    rows: &[u32],
    parent_counts: &[usize],
    features: &[usize],
) -> Option<Split<T>> {
    let n = rows.len();
    let n_classes = parent_counts.len();
    let mut best: Option<Split<T>> = None;
    let mut sorted: Vec<(T, u32)> = Vec::with_capacity(n);
    for &f in features {
        sorted.clear();
        sorted.extend(rows.iter().map(|&r| (ts.feature(r as usize, f), r)));
        sorted.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).expect("finite features"));

        let mut left = vec![0usize; n_classes];
        let mut right = parent_counts.to_vec();
        for i in 0..n - 1 {
            let class = ts.labels[sorted[i].1 as usize] as usize;
            left[class] += 1;
            right[class] -= 1;
            let (a, b) = (sorted[i].0, sorted[i + 1].0);
            if b > a {
                let threshold = (a + b) / T::from_f64_lossy(2.0);
                // A midpoint that rounds up to b cannot separate the pair.
                if !(threshold < b) {
                    continue;
                }
                let decrease = gini_decrease(parent_counts, &left, &right, n, i + 1);
                if best.map_or(true, |s| decrease > s.decrease) {
                    best = Some(Split {
                        feature: f,
                        threshold,
                        decrease,
                    });
                }
            }
        }
    }
    best
}

/// Extra-Trees split: one uniform threshold per candidate feature.
fn best_random_split<T: Real>(
    ts: &TrainingSet<T>,
    rows: &[u32],
    parent_counts: &[usize],
    features: &[usize],
    rng: &mut ChaCha8Rng,
) -> Option<Split<T>> {
    let n = rows.len();
    let n_classes = parent_counts.len();
    let mut best: Option<Split<T>> = None;
    for &f in features {
        let mut lo = ts.feature(rows[0] as usize, f);
        let mut hi = lo;
        for &r in &rows[1..] {
            let v = ts.feature(r as usize, f);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !(hi > lo) {
            continue; // constant feature, draws nothing
        }
        let u = T::from_f64_lossy(rng.random::<f64>());
        let mut threshold = lo + (hi - lo) * u;
        if !(threshold < hi) {
            threshold = lo;
        }
        let mut left = vec![0usize; n_classes];
        let mut nl = 0usize;
        for &r in rows {
            if ts.feature(r as usize, f) <= threshold {
                left[ts.labels[r as usize] as usize] += 1;
                nl += 1;
            }
        }
        if nl == 0 || nl == n {
            continue;
        }
        let right: Vec<usize> = parent_counts
            .iter()
            .zip(left.iter())
            .map(|(p, l)| p - l)
            .collect();
        let decrease = gini_decrease(parent_counts, &left, &right, n, nl);
        if best.map_or(true, |s| decrease > s.decrease) {
            best = Some(Split {
                feature: f,
                threshold,
                decrease,
            });
        }
    }
    best
}

/// Re-scan guard: in debug builds, assert no exhaustive candidate beats the
/// chosen split at this node.
#[cfg(debug_assertions)]
fn assert_split_optimal<T: Real>(
    ts: &TrainingSet<T>,
    rows: &[u32],
    parent_counts: &[usize],
    features: &[usize],
    chosen: &Split<T>,
) {
    if let Some(rescan) = best_gini_split(ts, rows, parent_counts, features) {
        debug_assert!(
            rescan.decrease <= chosen.decrease,
            "split ({}, {:?}) beaten by ({}, {:?}): {} > {}",
            chosen.feature,
            chosen.threshold,
            rescan.feature,
            rescan.threshold,
            rescan.decrease,
            chosen.decrease
        );
    }
}

pub(super) fn partition_rows<T: Real>(
    ts: &TrainingSet<T>,
    rows: &[u32],
    feature: usize,
    threshold: T,
) -> (Vec<u32>, Vec<u32>) {
    let mut left = Vec::new();
    let mut right = Vec::new();
    for &r in rows {
        if ts.feature(r as usize, feature) <= threshold {
            left.push(r);
        } else {
            right.push(r);
        }
    }
    (left, right)
}

/// Grows one classification tree over `rows`.
pub(super) fn grow_class_tree<T: Real>(
    ts: &TrainingSet<T>,
    rows: &[u32],
    params: &TreeParams,
    rng: &mut ChaCha8Rng,
) -> ClassTree<T> {
    let mut nodes = Vec::new();
    grow_class_node(ts, rows, params, rng, 0, &mut nodes);
    Tree { nodes }
}

fn grow_class_node<T: Real>(
    ts: &TrainingSet<T>,
    rows: &[u32],
    params: &TreeParams,
    rng: &mut ChaCha8Rng,
    depth: usize,
    nodes: &mut Vec<Node<T, u32>>,
) -> usize {
    let counts = class_counts(ts, rows);
    let make_leaf = |nodes: &mut Vec<Node<T, u32>>| {
        nodes.push(Node::Leaf(majority_class(&counts)));
        nodes.len() - 1
    };

    if depth >= params.max_depth
        || rows.len() < params.min_samples_split
        || counts.iter().filter(|&&c| c > 0).count() <= 1
    {
        return make_leaf(nodes);
    }

    let features = candidate_features(ts.n_features, params.feature_subset, rng);
    let split = if params.random_thresholds {
        best_random_split(ts, rows, &counts, &features, rng)
    } else {
        best_gini_split(ts, rows, &counts, &features)
    };
    // Zero-decrease splits are kept: they cost nothing and are required to
    // untangle XOR-like structure (the decrease is never negative).
    let Some(split) = split else {
        return make_leaf(nodes);
    };
    #[cfg(debug_assertions)]
    if !params.random_thresholds {
        assert_split_optimal(ts, rows, &counts, &features, &split);
    }

    let (left_rows, right_rows) = partition_rows(ts, rows, split.feature, split.threshold);
    if left_rows.is_empty() || right_rows.is_empty() {
        return make_leaf(nodes);
    }

    let at = nodes.len();
    nodes.push(Node::Split {
        feature: split.feature,
        threshold: split.threshold,
        left: 0,
        right: 0,
    });
    let left = grow_class_node(ts, &left_rows, params, rng, depth + 1, nodes);
    let right = grow_class_node(ts, &right_rows, params, rng, depth + 1, nodes);
    if let Node::Split {
        left: l, right: r, ..
    } = &mut nodes[at]
    {
        *l = left;
        *r = right;
    }
    at
}

// ---- regression trees (boosting base learner) ----

struct SseStats {
    sum: f64,
    sum_sq: f64,
    n: usize,
}

impl SseStats {
    fn from_rows(rows: &[u32], targets: &[f64]) -> Self {
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for &r in rows {
            let y = targets[r as usize];
            sum += y;
            sum_sq += y * y;
        }
        SseStats {
            sum,
            sum_sq,
            n: rows.len(),
        }
    }

    fn sse(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        (self.sum_sq - self.sum * self.sum / self.n as f64).max(0.0)
    }
}

fn best_sse_split<T: Real>(
    ts: &TrainingSet<T>,
    rows: &[u32],
    targets: &[f64],
    features: &[usize],
) -> Option<Split<T>> {
    let n = rows.len();
    let parent = SseStats::from_rows(rows, targets);
    let parent_sse = parent.sse();
    let mut best: Option<Split<T>> = None;
    let mut sorted: Vec<(T, u32)> = Vec::with_capacity(n);
    for &f in features {
        sorted.clear();
        sorted.extend(rows.iter().map(|&r| (ts.feature(r as usize, f), r)));
        sorted.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).expect("finite features"));

        let mut left_sum = 0.0;
        let mut left_sq = 0.0;
        for i in 0..n - 1 {
            let y = targets[sorted[i].1 as usize];
            left_sum += y;
            left_sq += y * y;
            let (a, b) = (sorted[i].0, sorted[i + 1].0);
            if b > a {
                let threshold = (a + b) / T::from_f64_lossy(2.0);
                if !(threshold < b) {
                    continue;
                }
                let nl = (i + 1) as f64;
                let nr = (n - i - 1) as f64;
                let right_sum = parent.sum - left_sum;
                let right_sq = parent.sum_sq - left_sq;
                let sse_l = (left_sq - left_sum * left_sum / nl).max(0.0);
                let sse_r = (right_sq - right_sum * right_sum / nr).max(0.0);
                let decrease = parent_sse - sse_l - sse_r;
                if best.map_or(true, |s| decrease > s.decrease) {
                    best = Some(Split {
                        feature: f,
                        threshold,
                        decrease,
                    });
                }
            }
        }
    }
    best
}

/// Grows one regression tree; leaf values come from `leaf_value` applied to
/// the rows that land in the leaf.
pub(super) fn grow_reg_tree<T: Real>(
    ts: &TrainingSet<T>,
    rows: &[u32],
    targets: &[f64],
    max_depth: usize,
    min_samples_split: usize,
    leaf_value: &impl Fn(&[u32]) -> f64,
) -> RegTree<T> {
    let mut nodes = Vec::new();
    grow_reg_node(
        ts,
        rows,
        targets,
        max_depth,
        min_samples_split,
        leaf_value,
        0,
        &mut nodes,
    );
    Tree { nodes }
}

#[allow(clippy::too_many_arguments)]
fn grow_reg_node<T: Real>(
    ts: &TrainingSet<T>,
    rows: &[u32],
    targets: &[f64],
    max_depth: usize,
    min_samples_split: usize,
    leaf_value: &impl Fn(&[u32]) -> f64,
    depth: usize,
    nodes: &mut Vec<Node<T, f64>>,
) -> usize {
    let make_leaf = |nodes: &mut Vec<Node<T, f64>>| {
        nodes.push(Node::Leaf(leaf_value(rows)));
        nodes.len() - 1
    };
    if depth >= max_depth || rows.len() < min_samples_split {
        return make_leaf(nodes);
    }
    let features: Vec<usize> = (0..ts.n_features).collect();
    let Some(split) = best_sse_split(ts, rows, targets, &features) else {
        return make_leaf(nodes);
    };
    if split.decrease <= 0.0 {
        return make_leaf(nodes);
    }
    let (left_rows, right_rows) = partition_rows(ts, rows, split.feature, split.threshold);
    if left_rows.is_empty() || right_rows.is_empty() {
        return make_leaf(nodes);
    }

    let at = nodes.len();
    nodes.push(Node::Split {
        feature: split.feature,
        threshold: split.threshold,
        left: 0,
        right: 0,
    });
    let left = grow_reg_node(
        ts,
        &left_rows,
        targets,
        max_depth,
        min_samples_split,
        leaf_value,
        depth + 1,
        nodes,
    );
    let right = grow_reg_node(
        ts,
        &right_rows,
        targets,
        max_depth,
        min_samples_split,
        leaf_value,
        depth + 1,
        nodes,
    );
    if let Node::Split {
        left: l, right: r, ..
    } = &mut nodes[at]
    {
        *l = left;
        *r = right;
    }
    at
}
