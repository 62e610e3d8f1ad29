//! Exact Shapley attributions for forest predictions.
//!
//! A prediction is explained by the Shapley values of the positive-class
//! probability, with "absent" features marginalized interventionally over a
//! background dataset. For tree models this is computable exactly: for each
//! (row, background row) pair, a single tree walk partitions the path
//! features into those forced to the row's branch and those forced to the
//! background's branch, and each reachable leaf contributes closed-form
//! weights. Summed over trees and averaged over the background this
//! reproduces the full 2^m subset enumeration, feature by feature.
//!
//! Local accuracy — base value plus all scores equals the predicted
//! probability — holds to floating-point precision and is asserted on
//! every call.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::{predict_proba, ForestModel, SplitPredicate, TreeNode};
use crate::encoding::EncodedDataset;
use crate::eventlog::Label;
use crate::value::Value;

#[derive(Debug, Error)]
pub enum ExplainError {
    #[error("feature mismatch: {0}")]
    FeatureMismatch(String),
    #[error("the background dataset is empty")]
    EmptyBackground,
}

/// One feature-value pair with its importance score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationItem {
    pub feature: String,
    pub value: Value,
    /// Shapley value of the positive-class probability; positive scores
    /// push towards a positive prediction.
    pub score: f64,
}

/// Additive attribution of one prediction across every feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub trace_id: String,
    pub predicted_label: Label,
    /// Expected model output over the background rows.
    pub base_value: f64,
    pub items: Vec<ExplanationItem>,
}

impl Explanation {
    pub fn predicted_probability(&self) -> f64 {
        self.base_value + self.items.iter().map(|i| i.score).sum::<f64>()
    }
}

/// How [`top_items`] ranks explanation items.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RankMode {
    /// By absolute score: strongest impact in either direction.
    Absolute,
    /// By the score signed towards the row's own prediction.
    TowardPrediction,
}

/// The `t` items that impact the prediction the most.
pub fn top_items(explanation: &Explanation, t: usize) -> Vec<ExplanationItem> {
    top_items_ranked(explanation, t, RankMode::Absolute)
}

pub fn top_items_ranked(
    explanation: &Explanation,
    t: usize,
    mode: RankMode,
) -> Vec<ExplanationItem> {
    assert!(t >= 1, "item threshold must be positive");
    let toward = match (mode, explanation.predicted_label) {
        (RankMode::Absolute, _) => None,
        (RankMode::TowardPrediction, Label::Positive) => Some(1.0f64),
        (RankMode::TowardPrediction, Label::Negative) => Some(-1.0f64),
    };
    let mut items = explanation.items.clone();
    items.sort_by(|a, b| {
        let key = |i: &ExplanationItem| match toward {
            None => i.score.abs(),
            Some(sign) => i.score * sign,
        };
        key(b).total_cmp(&key(a)).then_with(|| a.feature.cmp(&b.feature))
    });
    items.truncate(t);
    items
}

// ---------------------------------------------------------------------------
// Coded model: predicates resolved against per-feature value dictionaries
// ---------------------------------------------------------------------------

#[derive(Clone, Copy)]
enum CodedTest {
    Eq(u32),
    Le(f64),
}

enum FlatNode {
    Split { feature: u32, test: CodedTest, left: u32, right: u32 },
    Leaf { value: f64 },
}

struct FlatTree {
    nodes: Vec<FlatNode>,
}

struct CodedRow {
    codes: Vec<u32>,
    nums: Vec<f64>,
}

impl FlatTree {
    fn eval(&self, row: &CodedRow) -> f64 {
        let mut idx = 0u32;
        loop {
            match &self.nodes[idx as usize] {
                FlatNode::Leaf { value } => return *value,
                FlatNode::Split { feature, test, left, right } => {
                    idx = if test_row(row, *feature, *test) { *left } else { *right };
                }
            }
        }
    }
}

fn test_row(row: &CodedRow, feature: u32, test: CodedTest) -> bool {
    match test {
        CodedTest::Eq(code) => row.codes[feature as usize] == code,
        CodedTest::Le(theta) => row.nums[feature as usize] <= theta,
    }
}

struct Coder<'a> {
    /// Per feature: sorted distinct values observed across the rows being
    /// explained and the background.
    dicts: Vec<Vec<&'a Value>>,
}

impl<'a> Coder<'a> {
    fn fit(n_features: usize, row_sets: &[&'a [Vec<Value>]]) -> Coder<'a> {
        let mut dicts: Vec<Vec<&Value>> = Vec::with_capacity(n_features);
        for f in 0..n_features {
            let set: std::collections::BTreeSet<&Value> = row_sets
                .iter()
                .flat_map(|rows| rows.iter().map(move |r| &r[f]))
                .collect();
            dicts.push(set.into_iter().collect());
        }
        Coder { dicts }
    }

    fn code_of(&self, feature: usize, value: &Value) -> u32 {
        match self.dicts[feature].binary_search_by(|v| (*v).cmp(value)) {
            Ok(i) => i as u32,
            Err(_) => u32::MAX, // value never occurs in any coded row
        }
    }

    fn code_row(&self, row: &[Value]) -> CodedRow {
        CodedRow {
            codes: row.iter().enumerate().map(|(f, v)| self.code_of(f, v)).collect(),
            nums: row
                .iter()
                .map(|v| v.as_numeric().unwrap_or(f64::NEG_INFINITY))
                .collect(),
        }
    }

    fn flatten(&self, root: &TreeNode) -> FlatTree {
        let mut nodes = Vec::new();
        self.flatten_into(root, &mut nodes);
        FlatTree { nodes }
    }

    fn flatten_into(&self, node: &TreeNode, nodes: &mut Vec<FlatNode>) -> u32 {
        let idx = nodes.len() as u32;
        match node {
            TreeNode::Leaf { p_positive, .. } => {
                nodes.push(FlatNode::Leaf { value: *p_positive });
            }
            TreeNode::Split { feature, predicate, left, right } => {
                let test = match predicate {
                    SplitPredicate::CategoryEq(v) => CodedTest::Eq(self.code_of(*feature, v)),
                    SplitPredicate::Threshold(theta) => CodedTest::Le(*theta),
                };
                nodes.push(FlatNode::Split {
                    feature: *feature as u32,
                    test,
                    left: 0,
                    right: 0,
                });
                let left_idx = self.flatten_into(left, nodes);
                let right_idx = self.flatten_into(right, nodes);
                let FlatNode::Split { left: l, right: r, .. } = &mut nodes[idx as usize] else {
                    unreachable!()
                };
                *l = left_idx;
                *r = right_idx;
            }
        }
        idx
    }
}

// ---------------------------------------------------------------------------
// Per-pair exact Shapley walk
// ---------------------------------------------------------------------------

struct PairWalk<'a> {
    tree: &'a FlatTree,
    x: &'a CodedRow,
    b: &'a CodedRow,
    factorials: &'a [f64],
    /// (feature, forced into the coalition?) along the current path;
    /// features are distinct by construction.
    path: Vec<(u32, bool)>,
    phi: &'a mut [f64],
}

impl PairWalk<'_> {
    fn run(&mut self) {
        self.visit(0);
    }

    fn visit(&mut self, node: u32) {
        match &self.tree.nodes[node as usize] {
            FlatNode::Leaf { value } => self.credit_leaf(*value),
            FlatNode::Split { feature, test, left, right } => {
                let (feature, test, left, right) = (*feature, *test, *left, *right);
                let x_left = test_row(self.x, feature, test);
                let b_left = test_row(self.b, feature, test);
                if x_left == b_left {
                    let child = if x_left { left } else { right };
                    self.visit(child);
                    return;
                }
                let x_child = if x_left { left } else { right };
                let b_child = if b_left { left } else { right };
                match self.path.iter().find(|(f, _)| *f == feature) {
                    Some(&(_, true)) => self.visit(x_child),
                    Some(&(_, false)) => self.visit(b_child),
                    None => {
                        self.path.push((feature, true));
                        self.visit(x_child);
                        self.path.pop();
                        self.path.push((feature, false));
                        self.visit(b_child);
                        self.path.pop();
                    }
                }
            }
        }
    }

    /// A leaf reached with `p` features forced to the row's branch and `q`
    /// forced to the background's contributes `v·(p−1)!·q!/(p+q)!` to each
    /// forced-in feature and `−v·p!·(q−1)!/(p+q)!` to each forced-out one.
    fn credit_leaf(&mut self, value: f64) {
        let p = self.path.iter().filter(|(_, in_s)| *in_s).count();
        let q = self.path.len() - p;
        if p + q == 0 {
            return; // the pair's shared path carries no attribution
        }
        let fact = self.factorials;
        let denom = fact[p + q];
        let w_in = if p > 0 { fact[p - 1] * fact[q] / denom } else { 0.0 };
        let w_out = if q > 0 { fact[p] * fact[q - 1] / denom } else { 0.0 };
        for &(feature, in_s) in &self.path {
            if in_s {
                self.phi[feature as usize] += value * w_in;
            } else {
                self.phi[feature as usize] -= value * w_out;
            }
        }
    }
}

fn max_tree_depth(node: &TreeNode) -> usize {
    match node {
        TreeNode::Leaf { .. } => 0,
        TreeNode::Split { left, right, .. } => 1 + max_tree_depth(left).max(max_tree_depth(right)),
    }
}

fn check_width(model: &ForestModel, width: usize) -> Result<(), ExplainError> {
    if width != model.feature_specs.len() {
        return Err(ExplainError::FeatureMismatch(format!(
            "row has {width} cells, model expects {}",
            model.feature_specs.len()
        )));
    }
    Ok(())
}

/// Explain a single row against a background dataset.
pub fn explain(
    model: &ForestModel,
    row: &[Value],
    trace_id: &str,
    background: &EncodedDataset,
) -> Result<Explanation, ExplainError> {
    let rows = vec![row.to_vec()];
    let ids = vec![trace_id.to_string()];
    let mut out = explain_rows(model, &rows, &ids, background)?;
    Ok(out.pop().expect("one explanation per row"))
}

/// Explain every row of `dataset`; rows are processed in parallel.
pub fn explain_dataset(
    model: &ForestModel,
    dataset: &EncodedDataset,
    background: &EncodedDataset,
) -> Result<Vec<Explanation>, ExplainError> {
    explain_rows(model, &dataset.rows, &dataset.trace_ids, background)
}

fn explain_rows(
    model: &ForestModel,
    rows: &[Vec<Value>],
    trace_ids: &[String],
    background: &EncodedDataset,
) -> Result<Vec<Explanation>, ExplainError> {
    if background.rows.is_empty() {
        return Err(ExplainError::EmptyBackground);
    }
    for r in rows {
        check_width(model, r.len())?;
    }
    check_width(model, background.n_features())?;

    let n_features = model.feature_specs.len();
    let coder = Coder::fit(n_features, &[rows, &background.rows]);
    let flat: Vec<FlatTree> = model.trees.iter().map(|t| coder.flatten(t)).collect();
    let coded_rows: Vec<CodedRow> = rows.iter().map(|r| coder.code_row(r)).collect();
    let coded_bg: Vec<CodedRow> = background.rows.iter().map(|r| coder.code_row(r)).collect();

    let max_depth = model.trees.iter().map(max_tree_depth).max().unwrap_or(0);
    let factorials: Vec<f64> = {
        let mut f = vec![1.0f64; max_depth + 2];
        for i in 1..f.len() {
            f[i] = f[i - 1] * i as f64;
        }
        f
    };

    // base value: expected forest output over the background
    let bg_sum: f64 = coded_bg
        .iter()
        .map(|b| flat.iter().map(|t| t.eval(b)).sum::<f64>())
        .sum();
    let scale = 1.0 / (model.trees.len() as f64 * background.n_rows() as f64);
    let base_value = bg_sum * scale;

    let explanations: Vec<Explanation> = coded_rows
        .par_iter()
        .enumerate()
        .map(|(row_idx, x)| {
            let mut phi = vec![0.0f64; n_features];
            for tree in &flat {
                for b in &coded_bg {
                    let mut walk = PairWalk {
                        tree,
                        x,
                        b,
                        factorials: &factorials,
                        path: Vec::with_capacity(max_depth + 1),
                        phi: &mut phi,
                    };
                    walk.run();
                }
            }
            for v in &mut phi {
                *v *= scale;
            }

            let row = &rows[row_idx];
            let proba =
                predict_proba(model, row).expect("width was checked before explaining");
            let explanation = Explanation {
                trace_id: trace_ids[row_idx].clone(),
                predicted_label: Label::from_bool(proba >= 0.5),
                base_value,
                items: model
                    .feature_specs
                    .iter()
                    .zip(row.iter().zip(&phi))
                    .map(|(spec, (value, &score))| ExplanationItem {
                        feature: spec.name.clone(),
                        value: value.clone(),
                        score,
                    })
                    .collect(),
            };
            let recomposed = explanation.predicted_probability();
            assert!(
                (recomposed - proba).abs() <= 1e-9,
                "local accuracy violated: base {} + scores = {recomposed}, proba {proba}",
                explanation.base_value
            );
            explanation
        })
        .collect();

    Ok(explanations)
}

/// Serialize explanations as JSON lines: one object per trace.
pub fn write_jsonl<W: std::io::Write>(
    explanations: &[Explanation],
    mut sink: W,
) -> std::io::Result<()> {
    for e in explanations {
        serde_json::to_writer(&mut sink, e).map_err(std::io::Error::other)?;
        writeln!(sink)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::Hyperparams;
    use crate::encoding::{EncodingKind, FeatureOrigin, FeatureSpec};
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

    fn constant_model(p: f64) -> ForestModel {
        ForestModel {
            trees: vec![TreeNode::Leaf { p_positive: p, samples: 1 }],
            hyperparams: Hyperparams::default(),
            feature_specs: vec![feature("x", &[Value::Int(0), Value::Int(1)])],
            training_seed: 0,
        }
    }

    #[test]
    fn constant_model_gets_zero_scores() {
        let bg = dataset(
            vec![vec![Value::Int(0)], vec![Value::Int(1)]],
            vec![Label::Negative, Label::Negative],
            vec![feature("x", &[Value::Int(0), Value::Int(1)])],
        );
        let e = explain(&constant_model(0.7), &[Value::Int(0)], "t", &bg).unwrap();
        assert_eq!(e.base_value, 0.7);
        assert!(e.items.iter().all(|i| i.score == 0.0));
    }

    #[test]
    fn single_split_tree_credits_only_its_feature() {
        // depth-1 tree on feature 0: x=1 -> 0.9, else 0.1
        let tree = TreeNode::Split {
            feature: 0,
            predicate: SplitPredicate::CategoryEq(Value::Int(1)),
            left: Box::new(TreeNode::Leaf { p_positive: 0.9, samples: 1 }),
            right: Box::new(TreeNode::Leaf { p_positive: 0.1, samples: 1 }),
        };
        let features = vec![
            feature("f0", &[Value::Int(0), Value::Int(1)]),
            feature("f1", &[Value::Int(0), Value::Int(1)]),
        ];
        let model = ForestModel {
            trees: vec![tree],
            hyperparams: Hyperparams::default(),
            feature_specs: features.clone(),
            training_seed: 0,
        };
        let bg = dataset(
            vec![
                vec![Value::Int(0), Value::Int(0)],
                vec![Value::Int(1), Value::Int(0)],
                vec![Value::Int(0), Value::Int(1)],
                vec![Value::Int(1), Value::Int(1)],
            ],
            vec![Label::Negative; 4],
            features,
        );
        let row = [Value::Int(1), Value::Int(0)];
        let e = explain(&model, &row, "t", &bg).unwrap();
        // base = mean(0.1, 0.9, 0.1, 0.9) = 0.5; f0 carries all of the
        // difference to 0.9, f1 none of it
        assert!((e.base_value - 0.5).abs() < 1e-12);
        assert!((e.items[0].score - 0.4).abs() < 1e-12);
        assert!(e.items[1].score.abs() < 1e-12);
    }

    #[test]
    fn dummy_feature_scores_exactly_zero() {
        let ds = dataset(
            vec![
                vec![Value::Int(0), Value::Int(7)],
                vec![Value::Int(1), Value::Int(3)],
                vec![Value::Int(0), Value::Int(5)],
                vec![Value::Int(1), Value::Int(9)],
            ],
            vec![Label::Negative, Label::Positive, Label::Negative, Label::Positive],
            vec![
                feature("used", &[Value::Int(0), Value::Int(1)]),
                feature("dummy", &[Value::Int(3), Value::Int(5), Value::Int(7), Value::Int(9)]),
            ],
        );
        // depth 1 forces every tree to split on the informative feature only
        let hp = Hyperparams { n_trees: 10, max_depth: 1, min_leaf: 1, features_per_split: 1.0 };
        let model = crate::classifier::train(&ds, hp, 3).unwrap();
        for row in &ds.rows {
            let e = explain(&model, row, "t", &ds).unwrap();
            assert_eq!(e.items[1].score, 0.0, "dummy feature must get zero");
        }
    }

    #[test]
    fn top_items_ranks_by_absolute_score() {
        let e = Explanation {
            trace_id: "t".into(),
            predicted_label: Label::Positive,
            base_value: 0.5,
            items: vec![
                ExplanationItem { feature: "f1".into(), value: Value::Int(0), score: 0.5 },
                ExplanationItem { feature: "f2".into(), value: Value::Int(0), score: -0.6 },
                ExplanationItem { feature: "f3".into(), value: Value::Int(0), score: 0.1 },
            ],
        };
        let top = top_items(&e, 2);
        assert_eq!(top[0].feature, "f2");
        assert_eq!(top[1].feature, "f1");

        // t beyond the feature count returns everything
        assert_eq!(top_items(&e, 10).len(), 3);

        // signed ranking flips for negatively predicted rows
        let mut neg = e.clone();
        neg.predicted_label = Label::Negative;
        let signed = top_items_ranked(&neg, 1, RankMode::TowardPrediction);
        assert_eq!(signed[0].feature, "f2");
    }
}
