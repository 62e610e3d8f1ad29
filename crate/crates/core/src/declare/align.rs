//! Trace alignment against a single constraint target value.
//!
//! Breadth-first search over single-event insertions and deletions finds a
//! trace whose encoded value for the constraint equals the requested
//! target with as few edits as possible. Ties prefer insertions over
//! deletions and then the leftmost edit position, which the per-level
//! expansion order realizes directly. Only the constraint's own activities
//! are ever inserted: the six templates are insensitive to every other
//! activity, so a wider insertion alphabet could not save edits.

use std::collections::{HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::{evaluate_value, DeclareConstraint, DeclareError};
use crate::eventlog::{Event, Trace};

/// One edit applied during alignment. Positions refer to the trace as it
/// was just before this edit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum EditOp {
    Insert { position: usize, activity: String },
    Delete { position: usize },
}

/// An aligned trace together with the edits that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    pub trace: Trace,
    pub edits: Vec<EditOp>,
}

impl Alignment {
    pub fn edit_count(&self) -> usize {
        self.edits.len()
    }
}

/// Find a minimal-edit variant of `trace` on which `constraint` encodes to
/// `target_value`. Inserted events carry no payload, so their attributes
/// read as `unknown`.
pub fn align(
    trace: &Trace,
    constraint: &DeclareConstraint,
    target_value: i64,
    edit_budget: usize,
) -> Result<Alignment, DeclareError> {
    assert!(target_value >= -1, "target must be -1, 0 or a positive activation count");
    assert!(edit_budget >= 1, "edit budget must be positive");

    let mut params: Vec<String> = constraint.params().to_vec();
    params.sort();
    params.dedup();

    #[derive(Clone)]
    struct State {
        activities_key: Vec<String>,
        trace: Trace,
        edits: Vec<EditOp>,
    }

    let key_of = |t: &Trace| -> Vec<String> { t.activities().map(str::to_owned).collect() };

    let start = State { activities_key: key_of(trace), trace: trace.clone(), edits: Vec::new() };
    if evaluate_value(constraint, &start.trace) == target_value {
        return finish(start.trace, start.edits, constraint, target_value);
    }

    let mut visited: HashSet<Vec<String>> = HashSet::new();
    visited.insert(start.activities_key.clone());
    let mut frontier: VecDeque<State> = VecDeque::from([start]);

    for _depth in 1..=edit_budget {
        let mut next: VecDeque<State> = VecDeque::new();
        while let Some(state) = frontier.pop_front() {
            let len = state.trace.events.len();

            // Insertions first, leftmost position first, activities in
            // sorted order within a position.
            for position in 0..=len {
                for activity in &params {
                    let mut t = state.trace.clone();
                    t.events.insert(position, Event::new(activity.clone()));
                    let key = key_of(&t);
                    if !visited.insert(key.clone()) {
                        continue;
                    }
                    let mut edits = state.edits.clone();
                    edits.push(EditOp::Insert { position, activity: activity.clone() });
                    if evaluate_value(constraint, &t) == target_value {
                        return finish(t, edits, constraint, target_value);
                    }
                    next.push_back(State { activities_key: key, trace: t, edits });
                }
            }

            for position in 0..len {
                let mut t = state.trace.clone();
                t.events.remove(position);
                let key = key_of(&t);
                if !visited.insert(key.clone()) {
                    continue;
                }
                let mut edits = state.edits.clone();
                edits.push(EditOp::Delete { position });
                if evaluate_value(constraint, &t) == target_value {
                    return finish(t, edits, constraint, target_value);
                }
                next.push_back(State { activities_key: key, trace: t, edits });
            }
        }
        frontier = next;
    }

    Err(DeclareError::Unalignable {
        case_id: trace.case_id.clone(),
        constraint: constraint.to_string(),
        target: target_value,
        budget: edit_budget,
    })
}

fn finish(
    trace: Trace,
    edits: Vec<EditOp>,
    constraint: &DeclareConstraint,
    target_value: i64,
) -> Result<Alignment, DeclareError> {
    // Post-verification contract: the result must encode to the target.
    assert_eq!(
        evaluate_value(constraint, &trace),
        target_value,
        "alignment post-verification failed for {constraint}"
    );
    Ok(Alignment { trace, edits })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::declare::Template;

    fn trace(acts: &[&str]) -> Trace {
        Trace::from_activities("t", acts)
    }

    #[test]
    fn inserts_missing_activity_at_leftmost_position() {
        let a = align(&trace(&["b"]), &DeclareConstraint::existence("a"), 1, 2).unwrap();
        let acts: Vec<&str> = a.trace.activities().collect();
        assert_eq!(acts, vec!["a", "b"]);
        assert_eq!(a.edits, vec![EditOp::Insert { position: 0, activity: "a".into() }]);
        assert!(a.trace.events[0].attributes.is_empty());
    }

    #[test]
    fn already_aligned_trace_needs_no_edits() {
        let c = DeclareConstraint::binary(Template::Response, "a", "b");
        let t = trace(&["a", "b"]);
        let a = align(&t, &c, 1, 3).unwrap();
        assert_eq!(a.edit_count(), 0);
        assert_eq!(a.trace, t);
    }

    #[test]
    fn tie_break_prefers_leftmost_insertion() {
        let c = DeclareConstraint::binary(Template::Response, "a", "b");
        let a = align(&trace(&["a", "c"]), &c, 1, 2).unwrap();
        let acts: Vec<&str> = a.trace.activities().collect();
        assert_eq!(acts, vec!["a", "b", "c"]);
    }

    #[test]
    fn impossible_targets_are_unalignable() {
        // existence can never be vacuous, so target 0 has no witness
        let err = align(&trace(&["a", "b"]), &DeclareConstraint::existence("a"), 0, 3);
        assert!(matches!(err, Err(DeclareError::Unalignable { .. })));
    }

    #[test]
    fn deletion_used_when_cheaper() {
        // response(a,b) = -1 on <a,b>: deleting b (1 edit) beats inserting
        // two events; insertion of `a` at the end also works in one edit
        // and is preferred by the tie-break.
        let c = DeclareConstraint::binary(Template::Response, "a", "b");
        let a = align(&trace(&["a", "b"]), &c, -1, 2).unwrap();
        assert_eq!(a.edit_count(), 1);
        assert_eq!(evaluate_value(&c, &a.trace), -1);
    }

    #[test]
    fn reaches_positive_activation_counts() {
        let c = DeclareConstraint::binary(Template::Response, "a", "b");
        let a = align(&trace(&["a", "b"]), &c, 2, 4).unwrap();
        assert_eq!(evaluate_value(&c, &a.trace), 2);
        assert!(a.edit_count() <= 2);
    }
}
