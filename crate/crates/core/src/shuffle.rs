//! Shuffling wrong-correlation feature values and retraining.
//!
//! The pair sets say which traces to leave alone and which feature values
//! to randomize. Traces satisfying a correct-quadrant characterization are
//! *protected*; every other trace satisfying a wrong-quadrant
//! characterization gets one action per item to shuffle, replacing the
//! value with a uniform draw from the feature's other admissible values.
//!
//! Index encodings apply actions cell by cell. Declare encodings cannot:
//! changing one constraint's value usually changes others, so each action
//! aligns the underlying trace to the target value and re-encodes the whole
//! row from the aligned trace, keeping every dependent feature consistent.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::{optimize, ClassifierError, ForestModel, Hyperparams};
use crate::declare::{align, evaluate_value, DeclareConstraint, DeclareError};
use crate::encoding::{
    reencode_trace, EncodedDataset, EncodingError, EncodingKind, FeatureOrigin,
};
use crate::eventlog::EventLog;
use crate::fei::{row_satisfies, PairSets};
use crate::rng::stream;
use crate::value::Value;

#[derive(Debug, Error)]
pub enum ShuffleError {
    #[error("plan was built for a {expected} dataset, got {got}")]
    EncodingMismatch { expected: String, got: String },
    #[error("pair sets reference feature `{0}` which the dataset does not have")]
    UnknownFeature(String),
    #[error("shuffle action targets protected trace `{0}`")]
    ProtectedViolation(String),
    #[error("dataset row `{0}` has no backing trace in the log")]
    MissingTrace(String),
    #[error("declare shuffling needs declare-constraint features, `{0}` is not one")]
    NotAConstraintFeature(String),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
}

/// One planned cell replacement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShuffleAction {
    pub trace_id: String,
    pub feature: String,
    pub old_value: Value,
    pub new_value: Value,
}

/// The full shuffle plan for one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShufflePlan {
    /// Traces matching a correct-quadrant characterization; never touched.
    pub protected_ids: BTreeSet<String>,
    pub actions: Vec<ShuffleAction>,
    pub rng_seed: u64,
}

/// A declare action that could not be aligned and was dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedAction {
    pub trace_id: String,
    pub feature: String,
    pub attempted_targets: Vec<i64>,
    pub reason: String,
}

/// Plan which cells to shuffle. Protected traces are those satisfying any
/// correct-quadrant characterization; each remaining trace satisfying a
/// wrong pair's characterization gets one action per item to shuffle, with
/// replacement values drawn uniformly from the feature's other admissible
/// values. Deterministic in (dataset, pairs, seed).
pub fn plan_shuffle(
    dataset: &EncodedDataset,
    pairs: &PairSets,
    seed: u64,
) -> Result<ShufflePlan, ShuffleError> {
    let feature_idx: BTreeMap<&str, usize> = dataset
        .features
        .iter()
        .enumerate()
        .map(|(i, f)| (f.name.as_str(), i))
        .collect();
    for pair in crate::fei::Quadrant::ALL.iter().flat_map(|q| pairs.quadrant(*q)) {
        for it in pair.characterization.iter().chain(&pair.to_shuffle) {
            if !feature_idx.contains_key(it.feature.as_str()) {
                return Err(ShuffleError::UnknownFeature(it.feature.clone()));
            }
        }
    }

    let mut protected_ids: BTreeSet<String> = BTreeSet::new();
    for characterization in pairs.correct_characterizations() {
        for (row, id) in dataset.rows.iter().zip(&dataset.trace_ids) {
            if row_satisfies(characterization, row, &feature_idx) {
                protected_ids.insert(id.clone());
            }
        }
    }

    let mut rng = stream(seed, 0);
    let mut actions: Vec<ShuffleAction> = Vec::new();
    let mut touched: BTreeSet<(usize, usize)> = BTreeSet::new(); // (row, feature)
    for pair in pairs.wrong_pairs() {
        for (row_idx, (row, id)) in dataset.rows.iter().zip(&dataset.trace_ids).enumerate() {
            if protected_ids.contains(id)
                || !row_satisfies(&pair.characterization, row, &feature_idx)
            {
                continue;
            }
            for item in &pair.to_shuffle {
                let f_idx = feature_idx[item.feature.as_str()];
                if !touched.insert((row_idx, f_idx)) {
                    continue; // another pair already claimed this cell
                }
                let spec = &dataset.features[f_idx];
                let pool: Vec<&Value> = spec
                    .admissible_values
                    .iter()
                    .filter(|v| **v != item.value)
                    .collect();
                if pool.is_empty() {
                    continue; // no alternative value exists
                }
                let new_value = pool[rng.gen_range(0..pool.len())].clone();
                actions.push(ShuffleAction {
                    trace_id: id.clone(),
                    feature: item.feature.clone(),
                    old_value: item.value.clone(),
                    new_value,
                });
            }
        }
    }

    Ok(ShufflePlan { protected_ids, actions, rng_seed: seed })
}

/// Apply a plan to a simple- or complex-index dataset: exactly the planned
/// cells change, protected rows are untouched.
pub fn apply_shuffle_index(
    dataset: &EncodedDataset,
    plan: &ShufflePlan,
) -> Result<EncodedDataset, ShuffleError> {
    if dataset.kind == EncodingKind::Declare {
        return Err(ShuffleError::EncodingMismatch {
            expected: "simple-index or complex-index".into(),
            got: dataset.kind.to_string(),
        });
    }
    let row_idx: BTreeMap<&str, usize> = dataset
        .trace_ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    let feature_idx: BTreeMap<&str, usize> = dataset
        .features
        .iter()
        .enumerate()
        .map(|(i, f)| (f.name.as_str(), i))
        .collect();

    let mut out = dataset.clone();
    for action in &plan.actions {
        if plan.protected_ids.contains(&action.trace_id) {
            return Err(ShuffleError::ProtectedViolation(action.trace_id.clone()));
        }
        let &r = row_idx
            .get(action.trace_id.as_str())
            .ok_or_else(|| ShuffleError::MissingTrace(action.trace_id.clone()))?;
        let &f = feature_idx
            .get(action.feature.as_str())
            .ok_or_else(|| ShuffleError::UnknownFeature(action.feature.clone()))?;
        out.rows[r][f] = action.new_value.clone();
    }
    Ok(out)
}

/// Apply a plan to a declare dataset by aligning each action's underlying
/// trace to the target value and re-encoding the whole row. Actions whose
/// target cannot be reached within `edit_budget` are redrawn once from the
/// remaining pool and then skipped.
pub fn apply_shuffle_declare(
    log: &EventLog,
    dataset: &EncodedDataset,
    plan: &ShufflePlan,
    edit_budget: usize,
) -> Result<(EventLog, EncodedDataset, Vec<SkippedAction>), ShuffleError> {
    if dataset.kind != EncodingKind::Declare {
        return Err(ShuffleError::EncodingMismatch {
            expected: "declare".into(),
            got: dataset.kind.to_string(),
        });
    }
    let feature_idx: BTreeMap<&str, usize> = dataset
        .features
        .iter()
        .enumerate()
        .map(|(i, f)| (f.name.as_str(), i))
        .collect();
    let row_idx: BTreeMap<&str, usize> = dataset
        .trace_ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();

    // Group actions per trace, ordered by feature-spec position.
    let mut per_trace: BTreeMap<&str, Vec<(usize, &ShuffleAction)>> = BTreeMap::new();
    for (action_idx, action) in plan.actions.iter().enumerate() {
        if plan.protected_ids.contains(&action.trace_id) {
            return Err(ShuffleError::ProtectedViolation(action.trace_id.clone()));
        }
        per_trace
            .entry(action.trace_id.as_str())
            .or_default()
            .push((action_idx, action));
    }
    for actions in per_trace.values_mut() {
        actions.sort_by_key(|(_, a)| feature_idx[a.feature.as_str()]);
    }

    let mut out_log = log.clone();
    let mut out_dataset = dataset.clone();
    let mut skipped: Vec<SkippedAction> = Vec::new();

    let mut new_traces = out_log.traces().to_vec();
    let trace_pos: BTreeMap<&str, usize> = log
        .traces()
        .iter()
        .enumerate()
        .map(|(i, t)| (t.case_id.as_str(), i))
        .collect();

    for (trace_id, actions) in per_trace {
        let &t_pos = trace_pos
            .get(trace_id)
            .ok_or_else(|| ShuffleError::MissingTrace(trace_id.to_string()))?;
        let &r_pos = row_idx
            .get(trace_id)
            .ok_or_else(|| ShuffleError::MissingTrace(trace_id.to_string()))?;
        let mut current = new_traces[t_pos].clone();

        for (action_idx, action) in actions {
            let f_idx = feature_idx[action.feature.as_str()];
            let spec = &dataset.features[f_idx];
            let FeatureOrigin::Constraint(constraint) = &spec.origin else {
                return Err(ShuffleError::NotAConstraintFeature(action.feature.clone()));
            };
            let Value::Int(target) = action.new_value else {
                return Err(ShuffleError::NotAConstraintFeature(action.feature.clone()));
            };

            match align_to(&mut current, constraint, target, edit_budget) {
                Ok(()) => {}
                Err(first_err) => {
                    // one redraw from the remaining pool, then give up
                    match redraw_target(spec, &action.old_value, target, plan.rng_seed, action_idx)
                    {
                        Some(second) if align_to(&mut current, constraint, second, edit_budget).is_ok() => {}
                        second => {
                            skipped.push(SkippedAction {
                                trace_id: trace_id.to_string(),
                                feature: action.feature.clone(),
                                attempted_targets: match second {
                                    Some(s) => vec![target, s],
                                    None => vec![target],
                                },
                                reason: first_err.to_string(),
                            });
                        }
                    }
                }
            }
        }

        out_dataset.rows[r_pos] = reencode_trace(&current, &dataset.features)?;
        new_traces[t_pos] = current;
    }

    out_log = EventLog::new(new_traces).expect("aligned traces keep a consistent schema");
    Ok((out_log, out_dataset, skipped))
}

fn align_to(
    current: &mut crate::eventlog::Trace,
    constraint: &DeclareConstraint,
    target: i64,
    edit_budget: usize,
) -> Result<(), DeclareError> {
    if evaluate_value(constraint, current) == target {
        return Ok(()); // already at the target value
    }
    let aligned = align(current, constraint, target, edit_budget)?;
    *current = aligned.trace;
    Ok(())
}

fn redraw_target(
    spec: &crate::encoding::FeatureSpec,
    old_value: &Value,
    first_target: i64,
    seed: u64,
    action_idx: usize,
) -> Option<i64> {
    let pool: Vec<i64> = spec
        .admissible_values
        .iter()
        .filter_map(|v| match v {
            Value::Int(i) if *i != first_target && Value::Int(*i) != *old_value => Some(*i),
            _ => None,
        })
        .collect();
    if pool.is_empty() {
        return None;
    }
    let mut rng = stream(seed, 0x5EED ^ action_idx as u64);
    Some(pool[rng.gen_range(0..pool.len())])
}

/// Retrain on the shuffled data: the same randomized search as the baseline
/// optimizer. With unshuffled inputs and the same seed this reproduces the
/// baseline model exactly.
pub fn retrain(
    train_shuffled: &EncodedDataset,
    validation_shuffled: &EncodedDataset,
    trials: usize,
    seed: u64,
) -> Result<(Hyperparams, ForestModel), ClassifierError> {
    optimize(train_shuffled, validation_shuffled, trials, seed)
}
