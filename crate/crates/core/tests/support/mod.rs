//! Independent oracles for the acceptance suite.
//!
//! Everything here recomputes expected values from first principles and by
//! exhaustive enumeration, deliberately sharing no code with the
//! implementation paths it checks.

// oracle code stays as close to the quantifier form as possible
#![allow(clippy::needless_range_loop)]

use std::collections::BTreeSet;

use retrace_core::classifier::{predict_proba, ForestModel};
use retrace_core::declare::{ConstraintStatus, DeclareConstraint, EvaluationResult, Template};
use retrace_core::encoding::EncodedDataset;
use retrace_core::eventlog::{Event, Trace};
use retrace_core::fei::Item;
use retrace_core::value::Value;

// ---------------------------------------------------------------------------
// Brute-force declare semantics: nested positional quantifiers, no
// single-pass shortcuts.
// ---------------------------------------------------------------------------

pub fn brute_evaluate(constraint: &DeclareConstraint, trace: &Trace) -> EvaluationResult {
    let acts: Vec<&str> = trace.activities().collect();
    let n = acts.len();
    let mut activations = 0usize;
    let mut fulfillments = 0usize;

    match constraint.template() {
        Template::Existence => {
            let a = constraint.first();
            for i in 0..n {
                if acts[i] == a {
                    activations += 1;
                    fulfillments += 1;
                }
            }
            if activations == 0 {
                // unsatisfiable trace-level obligation
                return build(1, 0);
            }
        }
        Template::Response => {
            let (a, b) = (constraint.first(), constraint.second().unwrap());
            for i in 0..n {
                if acts[i] == a {
                    activations += 1;
                    if (i + 1..n).any(|j| acts[j] == b) {
                        fulfillments += 1;
                    }
                }
            }
        }
        Template::ChainResponse => {
            let (a, b) = (constraint.first(), constraint.second().unwrap());
            for i in 0..n {
                if acts[i] == a {
                    activations += 1;
                    if i + 1 < n && acts[i + 1] == b {
                        fulfillments += 1;
                    }
                }
            }
        }
        Template::Precedence => {
            let (a, b) = (constraint.first(), constraint.second().unwrap());
            for i in 0..n {
                if acts[i] == b {
                    activations += 1;
                    if (0..i).any(|j| acts[j] == a) {
                        fulfillments += 1;
                    }
                }
            }
        }
        Template::NotSuccession => {
            let (a, b) = (constraint.first(), constraint.second().unwrap());
            for i in 0..n {
                if acts[i] == a {
                    activations += 1;
                    if !(i + 1..n).any(|j| acts[j] == b) {
                        fulfillments += 1;
                    }
                }
            }
        }
        Template::Coexistence => {
            let (a, b) = (constraint.first(), constraint.second().unwrap());
            if a == b {
                return brute_evaluate(&DeclareConstraint::existence(a), trace);
            }
            let has_a = (0..n).any(|i| acts[i] == a);
            let has_b = (0..n).any(|i| acts[i] == b);
            for i in 0..n {
                if acts[i] == a {
                    activations += 1;
                    if has_b {
                        fulfillments += 1;
                    }
                }
                if acts[i] == b {
                    activations += 1;
                    if has_a {
                        fulfillments += 1;
                    }
                }
            }
        }
    }
    build(activations, fulfillments)
}

fn build(activations: usize, fulfillments: usize) -> EvaluationResult {
    let violations = activations - fulfillments;
    let status = if violations > 0 {
        ConstraintStatus::Violated
    } else if activations == 0 {
        ConstraintStatus::VacuouslySatisfied
    } else {
        ConstraintStatus::Satisfied
    };
    EvaluationResult {
        status,
        activation_count: activations,
        fulfillment_count: fulfillments,
        violation_count: violations,
    }
}

/// All traces of length `0..=max_len` over the alphabet.
pub fn all_traces(alphabet: &[&str], max_len: usize) -> Vec<Trace> {
    let mut out = vec![Trace::from_activities("t", &[])];
    let mut frontier: Vec<Vec<&str>> = vec![vec![]];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for seq in &frontier {
            for &a in alphabet {
                let mut ext = seq.clone();
                ext.push(a);
                out.push(Trace::from_activities("t", &ext));
                next.push(ext);
            }
        }
        frontier = next;
    }
    out
}

/// Every grounding of every template over the alphabet (distinct params for
/// binary templates).
pub fn all_constraints(alphabet: &[&str]) -> Vec<DeclareConstraint> {
    let mut out = Vec::new();
    for &a in alphabet {
        out.push(DeclareConstraint::existence(a));
    }
    for template in Template::ALL {
        if template.arity() != 2 {
            continue;
        }
        for &a in alphabet {
            for &b in alphabet {
                if a != b {
                    out.push(DeclareConstraint::binary(template, a, b));
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Brute-force Shapley values: 2^m subset enumeration with interventional
// marginalization over the background rows.
// ---------------------------------------------------------------------------

pub fn brute_shapley(
    model: &ForestModel,
    row: &[Value],
    background: &EncodedDataset,
) -> (f64, Vec<f64>) {
    let m = row.len();
    assert!(m <= 16, "subset enumeration explodes past 16 features");
    let coalition_value = |mask: u32| -> f64 {
        // expected output with features outside the mask drawn from the
        // background rows
        let mut total = 0.0;
        for bg in &background.rows {
            let hybrid: Vec<Value> = (0..m)
                .map(|f| {
                    if mask & (1 << f) != 0 {
                        row[f].clone()
                    } else {
                        bg[f].clone()
                    }
                })
                .collect();
            total += predict_proba(model, &hybrid).expect("hybrid row is well formed");
        }
        total / background.rows.len() as f64
    };

    let factorial = |k: usize| -> f64 { (1..=k).map(|x| x as f64).product::<f64>().max(1.0) };
    let mut phi = vec![0.0f64; m];
    for feature in 0..m {
        for mask in 0u32..(1 << m) {
            if mask & (1 << feature) != 0 {
                continue;
            }
            let s = mask.count_ones() as usize;
            let weight = factorial(s) * factorial(m - s - 1) / factorial(m);
            phi[feature] += weight * (coalition_value(mask | (1 << feature)) - coalition_value(mask));
        }
    }
    (coalition_value(0), phi)
}

// ---------------------------------------------------------------------------
// Brute-force frequent itemsets: enumerate every subset of the item
// universe and test its support directly.
// ---------------------------------------------------------------------------

pub fn brute_frequent_itemsets(
    transactions: &[BTreeSet<Item>],
    min_support: f64,
    max_size: usize,
) -> Vec<(BTreeSet<Item>, f64)> {
    let universe: Vec<Item> = {
        let set: BTreeSet<Item> = transactions.iter().flatten().cloned().collect();
        set.into_iter().collect()
    };
    assert!(universe.len() <= 16, "universe too large for subset enumeration");
    let n = transactions.len() as f64;
    let mut out = Vec::new();
    for mask in 1u32..(1 << universe.len()) {
        let size = mask.count_ones() as usize;
        if size > max_size {
            continue;
        }
        let itemset: BTreeSet<Item> = (0..universe.len())
            .filter(|f| mask & (1 << f) != 0)
            .map(|f| universe[f].clone())
            .collect();
        let support = transactions
            .iter()
            .filter(|t| itemset.iter().all(|i| t.contains(i)))
            .count() as f64
            / n;
        if support >= min_support {
            out.push((itemset, support));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Exhaustive alignment minimum: plain breadth-first enumeration over
// insertions (constraint params plus a neutral filler) and deletions.
// ---------------------------------------------------------------------------

pub fn oracle_min_edits(
    trace: &Trace,
    constraint: &DeclareConstraint,
    target: i64,
    budget: usize,
) -> Option<usize> {
    let mut alphabet: Vec<String> = constraint.params().to_vec();
    alphabet.sort();
    alphabet.dedup();
    // a filler the constraint does not mention, to prove that inserting
    // foreign activities never beats editing the constraint's own
    alphabet.push("~neutral~".to_string());

    let value_of = |t: &Trace| {
        retrace_core::declare::encode_value(&retrace_core::declare::evaluate(constraint, t))
    };
    if value_of(trace) == target {
        return Some(0);
    }
    let mut seen: BTreeSet<Vec<String>> = BTreeSet::new();
    let mut frontier: Vec<Trace> = vec![trace.clone()];
    seen.insert(trace.activities().map(str::to_owned).collect());
    for depth in 1..=budget {
        let mut next = Vec::new();
        for state in &frontier {
            let len = state.events.len();
            for pos in 0..=len {
                for activity in &alphabet {
                    let mut t = state.clone();
                    t.events.insert(pos, Event::new(activity.clone()));
                    let key: Vec<String> = t.activities().map(str::to_owned).collect();
                    if !seen.insert(key) {
                        continue;
                    }
                    if value_of(&t) == target {
                        return Some(depth);
                    }
                    next.push(t);
                }
            }
            for pos in 0..len {
                let mut t = state.clone();
                t.events.remove(pos);
                let key: Vec<String> = t.activities().map(str::to_owned).collect();
                if !seen.insert(key) {
                    continue;
                }
                if value_of(&t) == target {
                    return Some(depth);
                }
                next.push(t);
            }
        }
        frontier = next;
    }
    None
}
