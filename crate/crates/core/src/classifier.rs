//! Random-forest binary outcome classifier.
//!
//! Trees are grown on bootstrap samples with Gini splits. Categorical
//! features split on equality against one category; numeric features
//! (counts, ages, declare values) split on thresholds at midpoints of
//! sorted unique values, with `unknown` routed to the left side. Training
//! is deterministic in (dataset, hyperparameters, seed): rows are put in a
//! canonical trace-id order before bootstrapping and every tree draws from
//! its own seeded stream, so parallel and serial builds agree.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encoding::{EncodedDataset, FeatureSpec};
use crate::eventlog::Label;
use crate::metrics::macro_f1;
use crate::rng::{mix, stream, tags};
use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Fraction of features drawn as split candidates at every node.
    pub features_per_split: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams { n_trees: 100, max_depth: 8, min_leaf: 2, features_per_split: 0.7 }
    }
}

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("cannot train on an empty dataset")]
    EmptyDataset,
    #[error("feature mismatch: {0}")]
    FeatureMismatch(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SplitPredicate {
    /// Route left when the cell equals this category.
    CategoryEq(Value),
    /// Route left when the numeric view of the cell is ≤ the threshold;
    /// `unknown` counts as −∞ and always goes left.
    Threshold(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Split {
        feature: usize,
        predicate: SplitPredicate,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        p_positive: f64,
        samples: usize,
    },
}

impl TreeNode {
    fn leaf_for(&self, row: &[Value]) -> &TreeNode {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { .. } => return node,
                TreeNode::Split { feature, predicate, left, right } => {
                    node = if routes_left(predicate, &row[*feature]) { left } else { right };
                }
            }
        }
    }

    pub fn leaf_probability(&self, row: &[Value]) -> f64 {
        match self.leaf_for(row) {
            TreeNode::Leaf { p_positive, .. } => *p_positive,
            TreeNode::Split { .. } => unreachable!(),
        }
    }
}

pub fn routes_left(predicate: &SplitPredicate, value: &Value) -> bool {
    match predicate {
        SplitPredicate::CategoryEq(v) => value == v,
        SplitPredicate::Threshold(theta) => {
            value.as_numeric().unwrap_or(f64::NEG_INFINITY) <= *theta
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<TreeNode>,
    pub hyperparams: Hyperparams,
    pub feature_specs: Vec<FeatureSpec>,
    pub training_seed: u64,
}

/// Versioned on-disk wrapper for trained models.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub model: ForestModel,
}

pub const MODEL_FORMAT_VERSION: u32 = 1;

impl ForestModel {
    pub fn save_json<W: std::io::Write>(&self, sink: W) -> std::io::Result<()> {
        serde_json::to_writer_pretty(
            sink,
            &ModelFile { format_version: MODEL_FORMAT_VERSION, model: self.clone() },
        )
        .map_err(std::io::Error::other)
    }

    pub fn load_json<R: std::io::Read>(source: R) -> std::io::Result<ForestModel> {
        let file: ModelFile = serde_json::from_reader(source).map_err(std::io::Error::other)?;
        if file.format_version != MODEL_FORMAT_VERSION {
            return Err(std::io::Error::other(format!(
                "unsupported model format version {}",
                file.format_version
            )));
        }
        Ok(file.model)
    }
}

// ---------------------------------------------------------------------------
// Column-coded training matrix
// ---------------------------------------------------------------------------

struct Column {
    /// Per row: index into `dict`.
    codes: Vec<u32>,
    /// Sorted distinct values; `unknown` sorts first when present.
    dict: Vec<Value>,
    /// Numeric view per code for threshold features (`unknown` = −∞).
    numeric: Option<Vec<f64>>,
}

struct Matrix {
    columns: Vec<Column>,
    positive: Vec<bool>,
    n_rows: usize,
}

fn build_matrix(dataset: &EncodedDataset, row_order: &[usize]) -> Matrix {
    let n_rows = row_order.len();
    let columns = (0..dataset.n_features())
        .map(|f| {
            let set: std::collections::BTreeSet<&Value> =
                row_order.iter().map(|&r| &dataset.rows[r][f]).collect();
            let dict: Vec<Value> = set.into_iter().cloned().collect();
            let code_of = |v: &Value| dict.binary_search(v).expect("value in dict") as u32;
            let codes: Vec<u32> =
                row_order.iter().map(|&r| code_of(&dataset.rows[r][f])).collect();
            let numeric = if dataset.features[f].is_numeric() {
                Some(
                    dict.iter()
                        .map(|v| v.as_numeric().unwrap_or(f64::NEG_INFINITY))
                        .collect(),
                )
            } else {
                None
            };
            Column { codes, dict, numeric }
        })
        .collect();
    let positive = row_order.iter().map(|&r| dataset.labels[r].is_positive()).collect();
    Matrix { columns, positive, n_rows }
}

// ---------------------------------------------------------------------------
// Tree growing
// ---------------------------------------------------------------------------

struct Grower<'a> {
    matrix: &'a Matrix,
    hp: Hyperparams,
    n_candidates: usize,
    // scratch histograms, reused across nodes
    hist_pos: Vec<u32>,
    hist_neg: Vec<u32>,
    feature_pool: Vec<usize>,
}

struct BestSplit {
    feature: usize,
    code: u32,
    threshold: Option<f64>,
    gain: f64,
}

impl<'a> Grower<'a> {
    fn new(matrix: &'a Matrix, hp: Hyperparams) -> Self {
        let max_dict = matrix.columns.iter().map(|c| c.dict.len()).max().unwrap_or(1);
        let n_features = matrix.columns.len();
        let n_candidates = ((hp.features_per_split * n_features as f64).ceil() as usize)
            .clamp(1, n_features);
        Grower {
            matrix,
            hp,
            n_candidates,
            hist_pos: vec![0; max_dict],
            hist_neg: vec![0; max_dict],
            feature_pool: (0..n_features).collect(),
        }
    }

    fn grow(&mut self, samples: &mut [u32], depth: usize, rng: &mut impl Rng) -> TreeNode {
        let n = samples.len();
        let n_pos = samples.iter().filter(|&&r| self.matrix.positive[r as usize]).count();
        let leaf = |n_pos: usize| TreeNode::Leaf {
            p_positive: n_pos as f64 / n as f64,
            samples: n,
        };

        if n_pos == 0 || n_pos == n || depth >= self.hp.max_depth || n < 2 * self.hp.min_leaf {
            return leaf(n_pos);
        }

        // Draw the candidate feature subset for this node, then visit the
        // chosen features in ascending order so ties resolve by index.
        let pool_len = self.feature_pool.len();
        for i in 0..self.n_candidates {
            let j = rng.gen_range(i..pool_len);
            self.feature_pool.swap(i, j);
        }
        let mut candidates: Vec<usize> =
            self.feature_pool[..self.n_candidates].to_vec();
        candidates.sort_unstable();

        let mut best: Option<BestSplit> = None;
        for feature in candidates {
            if let Some(split) = self.best_split_for(feature, samples, n, n_pos) {
                let better = match &best {
                    None => true,
                    Some(b) => split.gain > b.gain + 1e-12,
                };
                if better {
                    best = Some(split);
                }
            }
        }

        let Some(split) = best else { return leaf(n_pos) };

        let column = &self.matrix.columns[split.feature];
        let left_of = |row: u32| -> bool {
            let code = column.codes[row as usize];
            match split.threshold {
                None => code == split.code,
                Some(_) => code <= split.code,
            }
        };
        // In-place partition: left block first.
        let mut left_len = 0usize;
        for i in 0..n {
            if left_of(samples[i]) {
                samples.swap(i, left_len);
                left_len += 1;
            }
        }
        let (left_samples, right_samples) = samples.split_at_mut(left_len);
        let predicate = match split.threshold {
            None => SplitPredicate::CategoryEq(column.dict[split.code as usize].clone()),
            Some(theta) => SplitPredicate::Threshold(theta),
        };
        let left = self.grow(left_samples, depth + 1, rng);
        let right = self.grow(right_samples, depth + 1, rng);
        TreeNode::Split {
            feature: split.feature,
            predicate,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    fn best_split_for(
        &mut self,
        feature: usize,
        samples: &[u32],
        n: usize,
        n_pos: usize,
    ) -> Option<BestSplit> {
        let column = &self.matrix.columns[feature];
        let dict_len = column.dict.len();
        if dict_len < 2 {
            return None;
        }

        for c in 0..dict_len {
            self.hist_pos[c] = 0;
            self.hist_neg[c] = 0;
        }
        for &row in samples {
            let code = column.codes[row as usize] as usize;
            if self.matrix.positive[row as usize] {
                self.hist_pos[code] += 1;
            } else {
                self.hist_neg[code] += 1;
            }
        }

        let total_pos = n_pos as f64;
        let total_neg = (n - n_pos) as f64;
        let parent = gini(total_pos, total_neg);
        let min_leaf = self.hp.min_leaf as f64;
        let nf = n as f64;

        let mut best: Option<BestSplit> = None;
        let mut consider = |code: u32, threshold: Option<f64>, lp: f64, ln: f64| {
            let (rp, rn) = (total_pos - lp, total_neg - ln);
            let (l, r) = (lp + ln, rp + rn);
            if l < min_leaf || r < min_leaf {
                return;
            }
            let gain = parent - (l / nf) * gini(lp, ln) - (r / nf) * gini(rp, rn);
            if gain > 1e-12 {
                let better = match &best {
                    None => true,
                    Some(b) => gain > b.gain + 1e-12,
                };
                if better {
                    best = Some(BestSplit { feature, code, threshold, gain });
                }
            }
        };

        match &column.numeric {
            Some(numeric) => {
                // threshold splits between consecutive present codes
                let mut cum_pos = 0.0;
                let mut cum_neg = 0.0;
                let mut prev_present: Option<usize> = None;
                for c in 0..dict_len {
                    let (hp_, hn_) = (self.hist_pos[c], self.hist_neg[c]);
                    if hp_ == 0 && hn_ == 0 {
                        continue;
                    }
                    if let Some(p) = prev_present {
                        let theta = if numeric[p] == f64::NEG_INFINITY {
                            numeric[c] - 1.0 // split unknown off on its own
                        } else {
                            (numeric[p] + numeric[c]) / 2.0
                        };
                        consider(p as u32, Some(theta), cum_pos, cum_neg);
                    }
                    cum_pos += hp_ as f64;
                    cum_neg += hn_ as f64;
                    prev_present = Some(c);
                }
            }
            None => {
                for c in 0..dict_len {
                    let (hp_, hn_) = (self.hist_pos[c], self.hist_neg[c]);
                    if hp_ == 0 && hn_ == 0 {
                        continue;
                    }
                    consider(c as u32, None, hp_ as f64, hn_ as f64);
                }
            }
        }
        best
    }
}

fn gini(pos: f64, neg: f64) -> f64 {
    let n = pos + neg;
    if n == 0.0 {
        return 0.0;
    }
    let p = pos / n;
    let q = neg / n;
    1.0 - p * p - q * q
}

// ---------------------------------------------------------------------------
// Public training and prediction API
// ---------------------------------------------------------------------------

/// Train a forest. Deterministic in (dataset, hyperparameters, seed); the
/// training rows are bootstrapped after a canonical sort by trace id, so
/// the incoming row order is irrelevant.
pub fn train(
    dataset: &EncodedDataset,
    hp: Hyperparams,
    seed: u64,
) -> Result<ForestModel, ClassifierError> {
    if dataset.rows.is_empty() {
        return Err(ClassifierError::EmptyDataset);
    }
    let mut row_order: Vec<usize> = (0..dataset.n_rows()).collect();
    row_order.sort_by(|&a, &b| dataset.trace_ids[a].cmp(&dataset.trace_ids[b]));
    let matrix = build_matrix(dataset, &row_order);

    let tree_seed_base = mix(seed, tags::TREE);
    let trees: Vec<TreeNode> = (0..hp.n_trees)
        .into_par_iter()
        .map(|tree_idx| {
            let mut rng = stream(tree_seed_base, tree_idx as u64);
            let mut samples: Vec<u32> =
                (0..matrix.n_rows).map(|_| rng.gen_range(0..matrix.n_rows) as u32).collect();
            let mut grower = Grower::new(&matrix, hp);
            grower.grow(&mut samples, 0, &mut rng)
        })
        .collect();

    Ok(ForestModel {
        trees,
        hyperparams: hp,
        feature_specs: dataset.features.clone(),
        training_seed: seed,
    })
}

fn check_row(model: &ForestModel, row: &[Value]) -> Result<(), ClassifierError> {
    if row.len() != model.feature_specs.len() {
        return Err(ClassifierError::FeatureMismatch(format!(
            "row has {} cells, model expects {}",
            row.len(),
            model.feature_specs.len()
        )));
    }
    Ok(())
}

/// Mean positive-class probability over all trees.
pub fn predict_proba(model: &ForestModel, row: &[Value]) -> Result<f64, ClassifierError> {
    check_row(model, row)?;
    let sum: f64 = model.trees.iter().map(|t| t.leaf_probability(row)).sum();
    Ok(sum / model.trees.len() as f64)
}

/// Positive when the probability reaches 0.5 (ties go positive).
pub fn predict(model: &ForestModel, row: &[Value]) -> Result<Label, ClassifierError> {
    Ok(Label::from_bool(predict_proba(model, row)? >= 0.5))
}

pub fn predict_dataset(
    model: &ForestModel,
    dataset: &EncodedDataset,
) -> Result<Vec<Label>, ClassifierError> {
    check_features(model, dataset)?;
    dataset.rows.iter().map(|row| predict(model, row)).collect()
}

fn check_features(model: &ForestModel, dataset: &EncodedDataset) -> Result<(), ClassifierError> {
    let model_names: Vec<&str> = model.feature_specs.iter().map(|f| f.name.as_str()).collect();
    let data_names: Vec<&str> = dataset.features.iter().map(|f| f.name.as_str()).collect();
    if model_names != data_names {
        return Err(ClassifierError::FeatureMismatch(
            "dataset features differ from the model's training features".into(),
        ));
    }
    Ok(())
}

/// The randomized hyperparameter search grid.
pub const N_TREES_GRID: [usize; 4] = [50, 100, 200, 300];
pub const MAX_DEPTH_GRID: [usize; 5] = [4, 6, 8, 12, 16];
pub const MIN_LEAF_GRID: [usize; 4] = [1, 2, 5, 10];
pub const FEATURES_PER_SPLIT_GRID: [f64; 4] = [0.3, 0.5, 0.7, 1.0];

/// Random search over the grid: `trials` draws, each trained on `train_set`
/// and scored by macro-F1 on `validation`; the earliest best trial wins.
pub fn optimize(
    train_set: &EncodedDataset,
    validation: &EncodedDataset,
    trials: usize,
    seed: u64,
) -> Result<(Hyperparams, ForestModel), ClassifierError> {
    assert!(trials >= 1, "at least one trial is required");
    if train_set.rows.is_empty() || validation.rows.is_empty() {
        return Err(ClassifierError::EmptyDataset);
    }

    let mut rng = stream(seed, tags::HYPEROPT);
    let draws: Vec<Hyperparams> = (0..trials)
        .map(|_| Hyperparams {
            n_trees: N_TREES_GRID[rng.gen_range(0..N_TREES_GRID.len())],
            max_depth: MAX_DEPTH_GRID[rng.gen_range(0..MAX_DEPTH_GRID.len())],
            min_leaf: MIN_LEAF_GRID[rng.gen_range(0..MIN_LEAF_GRID.len())],
            features_per_split: FEATURES_PER_SPLIT_GRID
                [rng.gen_range(0..FEATURES_PER_SPLIT_GRID.len())],
        })
        .collect();

    let gold = &validation.labels;
    let mut best: Option<(f64, Hyperparams, ForestModel)> = None;
    for (trial, hp) in draws.into_iter().enumerate() {
        let model = train(train_set, hp, mix(seed, trial as u64))?;
        let predicted = predict_dataset(&model, validation)?;
        let score = macro_f1(gold, &predicted).expect("validation set is non-empty");
        let better = match &best {
            None => true,
            Some((s, _, _)) => score > *s,
        };
        if better {
            best = Some((score, hp, model));
        }
    }
    let (_, hp, model) = best.expect("at least one trial ran");
    Ok((hp, model))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::{EncodingKind, FeatureOrigin};
    use std::collections::BTreeSet;

    fn feature(name: &str, values: &[Value]) -> FeatureSpec {
        FeatureSpec {
            name: name.into(),
            origin: FeatureOrigin::StaticAttribute(name.into()),
            admissible_values: values.iter().cloned().collect::<BTreeSet<_>>(),
        }
    }

    fn dataset(rows: Vec<Vec<Value>>, labels: Vec<Label>, features: Vec<FeatureSpec>) -> EncodedDataset {
        let trace_ids = (0..rows.len()).map(|i| format!("t{i:03}")).collect();
        EncodedDataset { kind: EncodingKind::Complex, features, rows, labels, trace_ids }
    }

    fn separable() -> EncodedDataset {
        // f1 alone separates the classes; f2 is noise
        let s = |x: &str| Value::Str(x.into());
        let rows = vec![
            vec![s("hot"), Value::Int(1)],
            vec![s("hot"), Value::Int(2)],
            vec![s("hot"), Value::Int(3)],
            vec![s("cold"), Value::Int(1)],
            vec![s("cold"), Value::Int(2)],
            vec![s("cold"), Value::Int(3)],
        ];
        let labels = vec![
            Label::Positive,
            Label::Positive,
            Label::Positive,
            Label::Negative,
            Label::Negative,
            Label::Negative,
        ];
        dataset(
            rows,
            labels,
            vec![
                feature("f1", &[s("hot"), s("cold")]),
                feature("f2", &[Value::Int(1), Value::Int(2), Value::Int(3)]),
            ],
        )
    }

    #[test]
    fn separable_fixture_reaches_perfect_training_accuracy() {
        let ds = separable();
        let hp = Hyperparams { n_trees: 20, max_depth: 2, min_leaf: 1, features_per_split: 1.0 };
        let model = train(&ds, hp, 1).unwrap();
        for (row, label) in ds.rows.iter().zip(&ds.labels) {
            assert_eq!(predict(&model, row).unwrap(), *label);
        }
    }

    #[test]
    fn single_label_dataset_predicts_it_with_certainty() {
        let ds = dataset(
            vec![vec![Value::Int(1)], vec![Value::Int(2)]],
            vec![Label::Negative, Label::Negative],
            vec![feature("x", &[Value::Int(1), Value::Int(2)])],
        );
        let model = train(&ds, Hyperparams::default(), 9).unwrap();
        assert_eq!(predict_proba(&model, &[Value::Int(1)]).unwrap(), 0.0);
        assert_eq!(predict(&model, &[Value::Int(5)]).unwrap(), Label::Negative);
    }

    #[test]
    fn training_is_deterministic() {
        let ds = separable();
        let hp = Hyperparams { n_trees: 10, max_depth: 4, min_leaf: 1, features_per_split: 0.5 };
        let a = train(&ds, hp, 42).unwrap();
        let b = train(&ds, hp, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn row_order_does_not_change_the_model() {
        let ds = separable();
        let mut permuted = ds.clone();
        permuted.rows.reverse();
        permuted.labels.reverse();
        permuted.trace_ids.reverse();
        let hp = Hyperparams { n_trees: 8, max_depth: 4, min_leaf: 1, features_per_split: 1.0 };
        assert_eq!(train(&ds, hp, 3).unwrap(), train(&permuted, hp, 3).unwrap());
    }

    #[test]
    fn proba_is_mean_of_tree_leaves() {
        let leaf = |p: f64| TreeNode::Leaf { p_positive: p, samples: 1 };
        let model = ForestModel {
            trees: vec![leaf(1.0), leaf(0.0)],
            hyperparams: Hyperparams::default(),
            feature_specs: vec![feature("x", &[Value::Int(0)])],
            training_seed: 0,
        };
        assert_eq!(predict_proba(&model, &[Value::Int(0)]).unwrap(), 0.5);
        // ties go positive
        assert_eq!(predict(&model, &[Value::Int(0)]).unwrap(), Label::Positive);

        let single = ForestModel { trees: vec![leaf(0.8)], ..model.clone() };
        assert!((predict_proba(&single, &[Value::Int(0)]).unwrap() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn depth_one_stump_reproduces_majority_per_side() {
        let rows: Vec<Vec<Value>> = (0..10).map(|i| vec![Value::Int(i)]).collect();
        let labels: Vec<Label> = (0..10)
            .map(|i| if i < 5 { Label::Negative } else { Label::Positive })
            .collect();
        let ds = dataset(rows, labels, vec![feature("x", &(0..10).map(Value::Int).collect::<Vec<_>>())]);
        let hp = Hyperparams { n_trees: 1, max_depth: 1, min_leaf: 1, features_per_split: 1.0 };
        let model = train(&ds, hp, 5).unwrap();
        assert_eq!(predict(&model, &[Value::Int(0)]).unwrap(), Label::Negative);
        assert_eq!(predict(&model, &[Value::Int(9)]).unwrap(), Label::Positive);
    }

    #[test]
    fn probabilities_stay_in_unit_interval() {
        let ds = separable();
        let model = train(&ds, Hyperparams::default(), 11).unwrap();
        for row in &ds.rows {
            let p = predict_proba(&model, row).unwrap();
            assert!((0.0..=1.0).contains(&p));
        }
    }

    #[test]
    fn feature_mismatch_detected() {
        let ds = separable();
        let model = train(&ds, Hyperparams::default(), 1).unwrap();
        assert!(matches!(
            predict_proba(&model, &[Value::Int(1)]),
            Err(ClassifierError::FeatureMismatch(_))
        ));
    }

    #[test]
    fn optimize_is_deterministic_and_single_trial_returns_that_draw() {
        let ds = separable();
        let (hp1, m1) = optimize(&ds, &ds, 1, 7).unwrap();
        let (hp2, m2) = optimize(&ds, &ds, 1, 7).unwrap();
        assert_eq!(hp1, hp2);
        assert_eq!(m1, m2);

        let (hp5, _) = optimize(&ds, &ds, 5, 7).unwrap();
        let (hp5b, _) = optimize(&ds, &ds, 5, 7).unwrap();
        assert_eq!(hp5, hp5b);
    }

    #[test]
    fn model_json_round_trips() {
        let ds = separable();
        let model = train(&ds, Hyperparams { n_trees: 3, ..Hyperparams::default() }, 2).unwrap();
        let mut buf = Vec::new();
        model.save_json(&mut buf).unwrap();
        let back = ForestModel::load_json(buf.as_slice()).unwrap();
        assert_eq!(model, back);
    }
}
