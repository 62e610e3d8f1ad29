//! Constraint discovery from a log.
//!
//! Frequent activity sets of size one and two seed candidate constraints;
//! every candidate ordering of every template is then checked against the
//! log and kept when it holds in at least a `support` fraction of traces.
//! Subsumed constraints are dropped so that only the strongest survive.

use std::collections::{BTreeMap, BTreeSet};

use super::{evaluate, ConstraintStatus, DeclareConstraint, Template};
use crate::eventlog::EventLog;

/// Knobs for [`discover_with`].
#[derive(Debug, Clone)]
pub struct DiscoveryOptions {
    /// Minimum fraction of traces that must contain an activity set and
    /// satisfy a candidate constraint.
    pub support: f64,
    pub templates: Vec<Template>,
    /// Whether a vacuously satisfied trace counts towards a candidate's
    /// support (the default) or only non-vacuous satisfaction does.
    pub count_vacuous_as_satisfied: bool,
}

impl Default for DiscoveryOptions {
    fn default() -> Self {
        DiscoveryOptions {
            support: 0.25,
            templates: Template::ALL.to_vec(),
            count_vacuous_as_satisfied: true,
        }
    }
}

/// Discover constraints with the given support over the given templates.
pub fn discover(log: &EventLog, support: f64, templates: &[Template]) -> Vec<DeclareConstraint> {
    discover_with(
        log,
        &DiscoveryOptions { support, templates: templates.to_vec(), ..Default::default() },
    )
}

pub fn discover_with(log: &EventLog, options: &DiscoveryOptions) -> Vec<DeclareConstraint> {
    assert!(!log.is_empty(), "cannot discover constraints from an empty log");
    let n_traces = log.len() as f64;

    // Trace-set frequencies of single activities and unordered pairs.
    let mut single: BTreeMap<&str, usize> = BTreeMap::new();
    let mut pair: BTreeMap<(&str, &str), usize> = BTreeMap::new();
    for trace in log.traces() {
        let distinct: BTreeSet<&str> = trace.activities().collect();
        for &a in &distinct {
            *single.entry(a).or_default() += 1;
        }
        let list: Vec<&str> = distinct.iter().copied().collect();
        for i in 0..list.len() {
            for j in i + 1..list.len() {
                *pair.entry((list[i], list[j])).or_default() += 1;
            }
        }
    }

    let frequent_singles: Vec<&str> = single
        .iter()
        .filter(|(_, &c)| c as f64 / n_traces >= options.support)
        .map(|(&a, _)| a)
        .collect();
    let frequent_pairs: Vec<(&str, &str)> = pair
        .iter()
        .filter(|(_, &c)| c as f64 / n_traces >= options.support)
        .map(|(&p, _)| p)
        .collect();

    let mut kept: Vec<DeclareConstraint> = Vec::new();
    for &template in &options.templates {
        let candidates: Vec<DeclareConstraint> = if template.arity() == 1 {
            frequent_singles
                .iter()
                .map(|&a| DeclareConstraint::existence(a))
                .collect()
        } else {
            // Both orderings of each frequent pair; equal-parameter
            // groundings are skipped as degenerate.
            frequent_pairs
                .iter()
                .flat_map(|&(a, b)| {
                    [
                        DeclareConstraint::binary(template, a, b),
                        DeclareConstraint::binary(template, b, a),
                    ]
                })
                .collect()
        };
        for candidate in candidates {
            let satisfied = log
                .traces()
                .iter()
                .filter(|t| match evaluate(&candidate, t).status {
                    ConstraintStatus::Satisfied => true,
                    ConstraintStatus::VacuouslySatisfied => options.count_vacuous_as_satisfied,
                    ConstraintStatus::Violated => false,
                })
                .count();
            if satisfied as f64 / n_traces >= options.support {
                kept.push(candidate);
            }
        }
    }

    let mut filtered = filter_subsumed(kept);
    filtered.sort_by(|a, b| {
        a.template()
            .cmp(&b.template())
            .then_with(|| a.params().cmp(b.params()))
    });
    filtered
}

/// Drop duplicates and constraints implied by a stronger one in the list.
/// The only implication among the supported templates that holds on every
/// trace is `chain_response(a,b) ⇒ response(a,b)`.
pub fn filter_subsumed(constraints: Vec<DeclareConstraint>) -> Vec<DeclareConstraint> {
    let chain_pairs: BTreeSet<(String, String)> = constraints
        .iter()
        .filter(|c| c.template() == Template::ChainResponse)
        .map(|c| (c.first().to_string(), c.second().unwrap().to_string()))
        .collect();
    let is_subsumed = |c: &DeclareConstraint| {
        c.template() == Template::Response
            && chain_pairs
                .contains(&(c.first().to_string(), c.second().unwrap().to_string()))
    };

    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(constraints.len());
    for c in constraints {
        if is_subsumed(&c) || !seen.insert(c.clone()) {
            continue;
        }
        out.push(c);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eventlog::{EventLog, Trace};

    fn log(traces: &[&[&str]]) -> EventLog {
        EventLog::new(
            traces
                .iter()
                .enumerate()
                .map(|(i, acts)| Trace::from_activities(format!("t{i}"), acts))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn zero_support_generates_both_orderings() {
        let found = discover(&log(&[&["a", "b"]]), 0.0, &[Template::Response]);
        assert!(found.contains(&DeclareConstraint::binary(Template::Response, "a", "b")));
        assert!(found.contains(&DeclareConstraint::binary(Template::Response, "b", "a")));
    }

    #[test]
    fn full_support_rejects_half_violated_candidates() {
        let found = discover(&log(&[&["a", "b"], &["b", "a"]]), 1.0, &[Template::Response]);
        assert!(!found.contains(&DeclareConstraint::binary(Template::Response, "a", "b")));
        assert!(!found.contains(&DeclareConstraint::binary(Template::Response, "b", "a")));
    }

    #[test]
    fn subsumption_prefers_chain_response() {
        let chain = DeclareConstraint::binary(Template::ChainResponse, "a", "b");
        let resp = DeclareConstraint::binary(Template::Response, "a", "b");
        assert_eq!(filter_subsumed(vec![chain.clone(), resp.clone()]), vec![chain.clone()]);
        assert_eq!(filter_subsumed(vec![resp.clone()]), vec![resp.clone()]);
        assert_eq!(filter_subsumed(vec![resp.clone(), resp.clone()]), vec![resp]);
    }

    #[test]
    fn discovery_is_deterministic() {
        let l = log(&[&["a", "b", "c"], &["a", "c"], &["b", "a", "b"]]);
        let x = discover(&l, 0.3, &Template::ALL);
        let y = discover(&l, 0.3, &Template::ALL);
        assert_eq!(x, y);
        let mut sorted = x.clone();
        sorted.sort_by(|a, b| {
            a.template().cmp(&b.template()).then_with(|| a.params().cmp(b.params()))
        });
        assert_eq!(x, sorted, "output is ordered by template then params");
    }

    #[test]
    fn discovered_constraints_meet_support() {
        let l = log(&[&["a", "b"], &["a", "b", "c"], &["c"], &["a", "c", "b"]]);
        for c in discover(&l, 0.5, &Template::ALL) {
            let ok = l
                .traces()
                .iter()
                .filter(|t| evaluate(&c, t).status != ConstraintStatus::Violated)
                .count();
            assert!(ok as f64 / l.len() as f64 >= 0.5, "{c} below support");
        }
    }
}
