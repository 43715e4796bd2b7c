//! Tree-based multi-class classifiers (DT, RF, ET, BDT), stratified
//! cross-validation, and the evaluation metrics used to score sweep cases.
//!
//! Everything is deterministic per seed: identical dataset + identical seed
//! gives identical models and predictions, regardless of thread count.

mod boost;
mod eval;
mod forest;
mod tree;

use std::collections::BTreeMap;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::Dataset;
use crate::num::Real;
use crate::seed::hash_str;
use crate::trace::BehaviourLabel;

pub use boost::train_boosted_trees;
pub use eval::{
    accuracy, confusion_matrix, evaluate, evaluate_with_folds, macro_f1, stratified_group_kfold,
    stratified_kfold, FoldSplit, FoldStats,
};
pub use forest::{train_extra_trees, train_random_forest};
pub use tree::{ClassTree, Node, RegTree, Tree};

/// Which candidate features a node considers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSubset {
    /// Every feature (plain decision trees, boosting).
    #[default]
    All,
    /// A uniform random subset of ceil(sqrt(F)) features per node.
    Sqrt,
}

/// Per-tree hyperparameters. Split quality is Gini impurity decrease.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub feature_subset: FeatureSubset,
    /// Extra-Trees mode: one uniform random threshold per candidate feature
    /// instead of the exhaustive midpoint search.
    pub random_thresholds: bool,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: 8,
            min_samples_split: 2,
            feature_subset: FeatureSubset::All,
            random_thresholds: false,
        }
    }
}

impl TreeParams {
    fn validate(&self) -> Result<()> {
        if self.max_depth < 1 {
            return Err(Error::InvalidParameter("max_depth must be >= 1".into()));
        }
        if self.min_samples_split < 2 {
            return Err(Error::InvalidParameter(
                "min_samples_split must be >= 2".into(),
            ));
        }
        Ok(())
    }
}

/// Ensemble hyperparameters shared by RF, ET, and BDT.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleParams {
    pub n_trees: usize,
    pub bootstrap: bool,
    pub random_thresholds: bool,
    /// BDT: shrinkage per boosting round, in (0, 1].
    pub learning_rate: f64,
    /// BDT: number of boosting rounds.
    pub n_rounds: usize,
}

impl Default for EnsembleParams {
    fn default() -> Self {
        EnsembleParams {
            n_trees: 100,
            bootstrap: true,
            random_thresholds: false,
            learning_rate: 0.1,
            n_rounds: 100,
        }
    }
}

impl EnsembleParams {
    fn validate(&self) -> Result<()> {
        if self.n_trees < 1 {
            return Err(Error::InvalidParameter("n_trees must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::InvalidParameter(
                "learning_rate must be in (0, 1]".into(),
            ));
        }
        if self.n_rounds < 1 {
            return Err(Error::InvalidParameter("n_rounds must be >= 1".into()));
        }
        Ok(())
    }
}

/// In-memory training matrix: row-major features, class-index labels, and
/// the sorted class list the indices point into.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet<T> {
    pub features: Vec<T>,
    pub n_features: usize,
    pub labels: Vec<u32>,
    pub classes: Vec<BehaviourLabel>,
    /// Row group ids (scenario of origin), for leakage-controlled folds.
    pub groups: Vec<u32>,
    pub group_names: Vec<String>,
}

impl<T: Real> TrainingSet<T> {
    /// Builds the matrix from a feature dataset. Classes are the dataset's
    /// distinct labels in lexicographic order, which also fixes the
    /// prediction tie-break.
    pub fn from_dataset(dataset: &Dataset<T>) -> Result<Self> {
        if dataset.rows.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut classes: Vec<BehaviourLabel> = dataset
            .rows
            .iter()
            .map(|r| r.label.clone())
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        classes.sort();

        let n_features = crate::features::FEATURE_COUNT;
        let mut features = Vec::with_capacity(dataset.rows.len() * n_features);
        let mut labels = Vec::with_capacity(dataset.rows.len());
        let mut groups = Vec::with_capacity(dataset.rows.len());
        let mut group_names: Vec<String> = Vec::new();
        for row in &dataset.rows {
            if !row.is_finite() {
                return Err(Error::SchemaMismatch("non-finite feature".into()));
            }
            features.extend_from_slice(&row.feature_vector());
            let class = classes.iter().position(|c| *c == row.label).expect("label");
            labels.push(class as u32);
            let group = row
                .provenance
                .as_ref()
                .map(|p| p.scenario_id.clone())
                .unwrap_or_default();
            let gid = match group_names.iter().position(|g| *g == group) {
                Some(i) => i,
                None => {
                    group_names.push(group);
                    group_names.len() - 1
                }
            };
            groups.push(gid as u32);
        }
        Ok(TrainingSet {
            features,
            n_features,
            labels,
            classes,
            groups,
            group_names,
        })
    }

    /// Builds a set from raw rows (used by tests and the blob benchmark).
    pub fn from_rows(
        rows: &[Vec<T>],
        labels: &[BehaviourLabel],
    ) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if rows.len() != labels.len() {
            return Err(Error::SchemaMismatch("rows vs labels length".into()));
        }
        let n_features = rows[0].len();
        let mut classes: Vec<BehaviourLabel> = labels
            .iter()
            .cloned()
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        classes.sort();
        let mut features = Vec::with_capacity(rows.len() * n_features);
        let mut label_idx = Vec::with_capacity(rows.len());
        for (row, label) in rows.iter().zip(labels) {
            if row.len() != n_features {
                return Err(Error::SchemaMismatch("ragged feature rows".into()));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::SchemaMismatch("non-finite feature".into()));
            }
            features.extend_from_slice(row);
            label_idx.push(classes.iter().position(|c| c == label).expect("label") as u32);
        }
        let groups = (0..rows.len() as u32).collect();
        Ok(TrainingSet {
            features,
            n_features,
            labels: label_idx,
            classes,
            groups,
            group_names: (0..rows.len()).map(|i| i.to_string()).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    #[inline]
    pub fn feature(&self, row: usize, feature: usize) -> T {
        self.features[row * self.n_features + feature]
    }

    pub fn row(&self, row: usize) -> &[T] {
        &self.features[row * self.n_features..(row + 1) * self.n_features]
    }

    /// New set holding the given rows; class list and group names carry over
    /// so indices stay aligned.
    pub fn subset(&self, rows: &[u32]) -> TrainingSet<T> {
        let mut features = Vec::with_capacity(rows.len() * self.n_features);
        let mut labels = Vec::with_capacity(rows.len());
        let mut groups = Vec::with_capacity(rows.len());
        for &r in rows {
            features.extend_from_slice(self.row(r as usize));
            labels.push(self.labels[r as usize]);
            groups.push(self.groups[r as usize]);
        }
        TrainingSet {
            features,
            n_features: self.n_features,
            labels,
            classes: self.classes.clone(),
            groups,
            group_names: self.group_names.clone(),
        }
    }

    /// Stable content hash for model provenance.
    pub fn content_hash(&self) -> String {
        let mut text = String::new();
        for (i, label) in self.labels.iter().enumerate() {
            for f in 0..self.n_features {
                text.push_str(&format!("{},", self.feature(i, f)));
            }
            text.push_str(&format!("{label};"));
        }
        format!("{:016x}", hash_str(&text))
    }

    fn all_rows(&self) -> Vec<u32> {
        (0..self.len() as u32).collect()
    }

    fn check_trainable(&self) -> Result<()> {
        if self.is_empty() {
            return Err(Error::DegenerateDataset("zero rows".into()));
        }
        Ok(())
    }
}

/// Algorithm tags, as used in configs, reports, and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Bdt,
    Dt,
    Et,
    Rf,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Bdt, Algorithm::Dt, Algorithm::Et, Algorithm::Rf];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Bdt => "bdt",
            Algorithm::Dt => "dt",
            Algorithm::Et => "et",
            Algorithm::Rf => "rf",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bdt" => Ok(Algorithm::Bdt),
            "dt" => Ok(Algorithm::Dt),
            "et" => Ok(Algorithm::Et),
            "rf" => Ok(Algorithm::Rf),
            other => Err(Error::UnknownAlgorithm(other.to_string())),
        }
    }
}

/// Training provenance embedded in every model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelProvenance {
    pub dataset_hash: String,
    pub params: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModelKind<T> {
    Tree(ClassTree<T>),
    Forest(Vec<ClassTree<T>>),
    /// `rounds[m][k]`: regression tree of boosting round m for class k, leaf
    /// values already scaled by the learning rate.
    Boosted(Vec<Vec<RegTree<T>>>),
}

/// A fitted multi-class classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model<T> {
    pub algorithm: Algorithm,
    pub classes: Vec<BehaviourLabel>,
    pub n_features: usize,
    pub kind: ModelKind<T>,
    pub provenance: ModelProvenance,
}

impl<T: Real> Model<T> {
    /// Predicted class index for one feature row.
    pub fn predict_index(&self, features: &[T]) -> u32 {
        match &self.kind {
            ModelKind::Tree(tree) => *tree.decide(features),
            ModelKind::Forest(trees) => {
                let mut votes = vec![0usize; self.classes.len()];
                for tree in trees {
                    votes[*tree.decide(features) as usize] += 1;
                }
                tree::majority_class(&votes)
            }
            ModelKind::Boosted(rounds) => {
                let mut scores = vec![0.0f64; self.classes.len()];
                for round in rounds {
                    for (k, tree) in round.iter().enumerate() {
                        scores[k] += tree.decide(features);
                    }
                }
                let mut best = 0usize;
                for (k, &s) in scores.iter().enumerate() {
                    if s > scores[best] {
                        best = k;
                    }
                }
                best as u32
            }
        }
    }

    pub fn to_json(&self) -> Result<String>
    where
        T: Serialize,
    {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialize(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self>
    where
        T: for<'de> Deserialize<'de>,
    {
        serde_json::from_str(text).map_err(|e| Error::Serialize(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()>
    where
        T: Serialize,
    {
        std::fs::write(path, self.to_json()?)
            .map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn load(path: &Path) -> Result<Self>
    where
        T: for<'de> Deserialize<'de>,
    {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::from_json(&text)
    }
}

/// Predicts one label per row. Rows must match the training schema.
pub fn predict<T: Real>(model: &Model<T>, rows: &[Vec<T>]) -> Result<Vec<BehaviourLabel>> {
    let mut out = Vec::with_capacity(rows.len());
    for row in rows {
        if row.len() != model.n_features {
            return Err(Error::SchemaMismatch(format!(
                "row has {} features, model expects {}",
                row.len(),
                model.n_features
            )));
        }
        out.push(model.classes[model.predict_index(row) as usize].clone());
    }
    Ok(out)
}

pub(crate) fn single_class_model<T: Real>(
    algorithm: Algorithm,
    ts: &TrainingSet<T>,
    params: String,
    seed: u64,
) -> Model<T> {
    Model {
        algorithm,
        classes: ts.classes.clone(),
        n_features: ts.n_features,
        kind: ModelKind::Tree(Tree {
            nodes: vec![Node::Leaf(0)],
        }),
        provenance: ModelProvenance {
            dataset_hash: ts.content_hash(),
            params,
            seed,
        },
    }
}

/// Trains a single CART decision tree.
pub fn train_decision_tree<T: Real>(
    ts: &TrainingSet<T>,
    params: &TreeParams,
    seed: u64,
) -> Result<Model<T>> {
    params.validate()?;
    ts.check_trainable()?;
    let params_summary = format!("{params:?}");
    if ts.classes.len() == 1 {
        return Ok(single_class_model(Algorithm::Dt, ts, params_summary, seed));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tree = tree::grow_class_tree(ts, &ts.all_rows(), params, &mut rng);
    Ok(Model {
        algorithm: Algorithm::Dt,
        classes: ts.classes.clone(),
        n_features: ts.n_features,
        kind: ModelKind::Tree(tree),
        provenance: ModelProvenance {
            dataset_hash: ts.content_hash(),
            params: params_summary,
            seed,
        },
    })
}

/// Training configuration for the whole algorithm family, as found in sweep
/// configs. Adapts into per-algorithm parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MlConfig {
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub n_trees: usize,
    pub learning_rate: f64,
    pub n_rounds: usize,
    pub bdt_depth: usize,
}

impl Default for MlConfig {
    fn default() -> Self {
        MlConfig {
            max_depth: 8,
            min_samples_split: 2,
            n_trees: 100,
            learning_rate: 0.1,
            n_rounds: 100,
            bdt_depth: 3,
        }
    }
}

impl MlConfig {
    pub fn tree_params(&self) -> TreeParams {
        TreeParams {
            max_depth: self.max_depth,
            min_samples_split: self.min_samples_split,
            feature_subset: FeatureSubset::All,
            random_thresholds: false,
        }
    }

    pub fn ensemble_params(&self) -> EnsembleParams {
        EnsembleParams {
            n_trees: self.n_trees,
            bootstrap: true,
            random_thresholds: false,
            learning_rate: self.learning_rate,
            n_rounds: self.n_rounds,
        }
    }
}

/// Trains the given algorithm with [`MlConfig`] settings.
pub fn train_with<T: Real>(
    algorithm: Algorithm,
    ts: &TrainingSet<T>,
    cfg: &MlConfig,
    seed: u64,
) -> Result<Model<T>> {
    match algorithm {
        Algorithm::Dt => train_decision_tree(ts, &cfg.tree_params(), seed),
        Algorithm::Rf => train_random_forest(ts, &cfg.ensemble_params(), &cfg.tree_params(), seed),
        Algorithm::Et => train_extra_trees(ts, &cfg.ensemble_params(), &cfg.tree_params(), seed),
        Algorithm::Bdt => {
            let mut tree_params = cfg.tree_params();
            tree_params.max_depth = cfg.bdt_depth;
            train_boosted_trees(ts, &cfg.ensemble_params(), &tree_params, seed)
        }
    }
}

/// Pluggable trainer registry keyed by algorithm tag. The four tree-based
/// algorithms are built in; other classifier families can be registered by
/// callers without touching this crate.
pub struct TrainerRegistry<T> {
    trainers: BTreeMap<String, TrainFn<T>>,
}

pub type TrainFn<T> =
    Box<dyn Fn(&TrainingSet<T>, &MlConfig, u64) -> Result<Model<T>> + Send + Sync>;

impl<T: Real> TrainerRegistry<T> {
    pub fn with_builtins() -> Self {
        let mut registry = TrainerRegistry {
            trainers: BTreeMap::new(),
        };
        for algorithm in Algorithm::ALL {
            registry.register(
                algorithm.as_str(),
                Box::new(move |ts, cfg, seed| train_with(algorithm, ts, cfg, seed)),
            );
        }
        registry
    }

    pub fn register(&mut self, tag: impl Into<String>, trainer: TrainFn<T>) {
        self.trainers.insert(tag.into(), trainer);
    }

    pub fn tags(&self) -> Vec<&str> {
        self.trainers.keys().map(String::as_str).collect()
    }

    pub fn train(
        &self,
        tag: &str,
        ts: &TrainingSet<T>,
        cfg: &MlConfig,
        seed: u64,
    ) -> Result<Model<T>> {
        let trainer = self
            .trainers
            .get(tag)
            .ok_or_else(|| Error::UnknownAlgorithm(tag.to_string()))?;
        trainer(ts, cfg, seed)
    }
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    /// Seeded 3-class Gaussian blob generator with a separability check:
    /// every pair of centers sits at least `margin_sigmas * (s_a + s_b)`
    /// apart.
    pub fn blobs(
        n_per_class: usize,
        centers: &[(f64, f64)],
        sigma: f64,
        margin_sigmas: f64,
        seed: u64,
    ) -> TrainingSet<f64> {
        for (i, a) in centers.iter().enumerate() {
            for b in centers.iter().skip(i + 1) {
                let d = ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
                assert!(
                    d >= margin_sigmas * 2.0 * sigma,
                    "blob centers too close: {d}"
                );
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, sigma).unwrap();
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (c, center) in centers.iter().enumerate() {
            for _ in 0..n_per_class {
                rows.push(vec![
                    center.0 + noise.sample(&mut rng),
                    center.1 + noise.sample(&mut rng),
                ]);
                labels.push(BehaviourLabel::new(format!("C{c}")));
            }
        }
        // Deterministic shuffle so classes are interleaved.
        for i in (1..rows.len()).rev() {
            let j = rng.random_range(0..=i);
            rows.swap(i, j);
            labels.swap(i, j);
        }
        TrainingSet::from_rows(&rows, &labels).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::test_support::blobs;
    use super::*;

    fn toy_four_rows() -> TrainingSet<f64> {
        // One feature, values {0,1,2,3}, labels {A,A,B,B}.
        let rows = vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]];
        let labels = vec![
            BehaviourLabel::new("A"),
            BehaviourLabel::new("A"),
            BehaviourLabel::new("B"),
            BehaviourLabel::new("B"),
        ];
        TrainingSet::from_rows(&rows, &labels).unwrap()
    }

    fn xor_set() -> TrainingSet<f64> {
        let rows = vec![
            vec![0.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
        ];
        let labels = vec![
            BehaviourLabel::new("A"),
            BehaviourLabel::new("B"),
            BehaviourLabel::new("B"),
            BehaviourLabel::new("A"),
        ];
        TrainingSet::from_rows(&rows, &labels).unwrap()
    }

    #[test]
    fn four_row_tree_splits_at_midpoint() {
        let ts = toy_four_rows();
        let model = train_decision_tree(&ts, &TreeParams::default(), 0).unwrap();
        let ModelKind::Tree(tree) = &model.kind else {
            panic!("expected single tree");
        };
        match &tree.nodes[0] {
            Node::Split {
                feature, threshold, ..
            } => {
                assert_eq!(*feature, 0);
                assert_eq!(*threshold, 1.5);
            }
            other => panic!("expected root split, got {other:?}"),
        }
        assert_eq!(tree.depth(), 1);
        let rows: Vec<Vec<f64>> = (0..4).map(|i| vec![i as f64]).collect();
        let preds = predict(&model, &rows).unwrap();
        assert_eq!(
            preds,
            ["A", "A", "B", "B"].map(BehaviourLabel::new).to_vec()
        );
    }

    #[test]
    fn xor_needs_depth_two() {
        let ts = xor_set();
        let model = train_decision_tree(&ts, &TreeParams::default(), 0).unwrap();
        let rows: Vec<Vec<f64>> = (0..4).map(|i| ts.row(i).to_vec()).collect();
        let preds = predict(&model, &rows).unwrap();
        let truth: Vec<BehaviourLabel> = ts
            .labels
            .iter()
            .map(|&l| ts.classes[l as usize].clone())
            .collect();
        assert_eq!(preds, truth);
        let ModelKind::Tree(tree) = &model.kind else {
            panic!()
        };
        assert_eq!(tree.depth(), 2);
    }

    #[test]
    fn single_class_gives_single_leaf() {
        let rows = vec![vec![0.0], vec![1.0]];
        let labels = vec![BehaviourLabel::new("A"), BehaviourLabel::new("A")];
        let ts = TrainingSet::from_rows(&rows, &labels).unwrap();
        let model = train_decision_tree(&ts, &TreeParams::default(), 0).unwrap();
        let preds = predict(&model, &[vec![5.0]]).unwrap();
        assert_eq!(preds[0], BehaviourLabel::new("A"));
    }

    #[test]
    fn empty_rows_rejected() {
        let ts = TrainingSet::<f64> {
            features: vec![],
            n_features: 1,
            labels: vec![],
            classes: vec![BehaviourLabel::new("A")],
            groups: vec![],
            group_names: vec![],
        };
        assert!(matches!(
            train_decision_tree(&ts, &TreeParams::default(), 0),
            Err(Error::DegenerateDataset(_))
        ));
    }

    #[test]
    fn monotone_transform_leaves_dt_predictions_unchanged() {
        let ts = blobs(30, &[(0.0, 0.0), (6.0, 0.0), (0.0, 6.0)], 1.0, 3.0, 9);
        let model = train_decision_tree(&ts, &TreeParams::default(), 1).unwrap();
        let preds: Vec<u32> = (0..ts.len())
            .map(|i| model.predict_index(ts.row(i)))
            .collect();

        // Strictly increasing per-feature remap: x -> exp(x / 4).
        let rows: Vec<Vec<f64>> = (0..ts.len())
            .map(|i| ts.row(i).iter().map(|v| (v / 4.0).exp()).collect())
            .collect();
        let labels: Vec<BehaviourLabel> = ts
            .labels
            .iter()
            .map(|&l| ts.classes[l as usize].clone())
            .collect();
        let warped = TrainingSet::from_rows(&rows, &labels).unwrap();
        let model_w = train_decision_tree(&warped, &TreeParams::default(), 1).unwrap();
        let preds_w: Vec<u32> = (0..warped.len())
            .map(|i| model_w.predict_index(warped.row(i)))
            .collect();
        assert_eq!(preds, preds_w);
    }

    #[test]
    fn empty_prediction_input_gives_empty_output() {
        let ts = toy_four_rows();
        let model = train_decision_tree(&ts, &TreeParams::default(), 0).unwrap();
        assert!(predict(&model, &[]).unwrap().is_empty());
    }

    #[test]
    fn schema_mismatch_rejected() {
        let ts = toy_four_rows();
        let model = train_decision_tree(&ts, &TreeParams::default(), 0).unwrap();
        assert!(matches!(
            predict(&model, &[vec![0.0, 1.0]]),
            Err(Error::SchemaMismatch(_))
        ));
    }

    #[test]
    fn model_json_roundtrip_is_exact() {
        let ts = blobs(20, &[(0.0, 0.0), (6.0, 0.0), (0.0, 6.0)], 1.0, 3.0, 5);
        let model = train_decision_tree(&ts, &TreeParams::default(), 3).unwrap();
        let json = model.to_json().unwrap();
        let back: Model<f64> = Model::from_json(&json).unwrap();
        assert_eq!(model, back);
    }

    #[test]
    fn registry_has_builtins_and_extends() {
        let mut registry = TrainerRegistry::<f64>::with_builtins();
        assert_eq!(registry.tags(), vec!["bdt", "dt", "et", "rf"]);
        registry.register(
            "stub-nb",
            Box::new(|ts, _cfg, seed| {
                Ok(single_class_model(Algorithm::Dt, ts, "stub".into(), seed))
            }),
        );
        assert!(registry.tags().contains(&"stub-nb"));
        let ts = toy_four_rows();
        assert!(registry.train("dt", &ts, &MlConfig::default(), 0).is_ok());
        assert!(matches!(
            registry.train("svm", &ts, &MlConfig::default(), 0),
            Err(Error::UnknownAlgorithm(_))
        ));
    }
}
