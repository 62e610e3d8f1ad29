//! Declarative temporal constraints over finite traces.
//!
//! Six constraint templates are supported, each grounded on one or two
//! activities. Evaluating a constraint on a trace counts *activations*
//! (events that impose an obligation), *fulfillments* and *violations*:
//!
//! | constraint              | semantics                                 |
//! |-------------------------|-------------------------------------------|
//! | `existence(a)`          | `a` eventually occurs                     |
//! | `response(a,b)`         | `a` is always eventually followed by `b`  |
//! | `chain_response(a,b)`   | `a` is always immediately followed by `b` |
//! | `precedence(a,b)`       | `b` is always preceded by `a`             |
//! | `not_succession(a,b)`   | `a` is never eventually followed by `b`   |
//! | `coexistence(a,b)`      | `a` and `b` only occur together           |
//!
//! Activation rules: `response`, `chain_response` and `not_succession`
//! activate on each occurrence of the first activity; `precedence` on each
//! occurrence of the second; `coexistence` on occurrences of either; and
//! `existence` on each occurrence of its activity, except that a trace
//! without any occurrence counts as one violated trace-level activation —
//! an absent activity violates `existence`, it never satisfies it vacuously.

mod align;
mod discovery;

pub use align::{align, Alignment, EditOp};
pub use discovery::{discover, discover_with, filter_subsumed, DiscoveryOptions};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eventlog::Trace;

/// The six supported constraint templates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Template {
    Existence,
    Response,
    ChainResponse,
    Precedence,
    NotSuccession,
    Coexistence,
}

impl Template {
    pub const ALL: [Template; 6] = [
        Template::Existence,
        Template::Response,
        Template::ChainResponse,
        Template::Precedence,
        Template::NotSuccession,
        Template::Coexistence,
    ];

    pub fn arity(self) -> usize {
        match self {
            Template::Existence => 1,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Template::Existence => "existence",
            Template::Response => "response",
            Template::ChainResponse => "chain_response",
            Template::Precedence => "precedence",
            Template::NotSuccession => "not_succession",
            Template::Coexistence => "coexistence",
        }
    }
}

#[derive(Debug, Error)]
pub enum DeclareError {
    #[error("{template} takes {expected} parameter(s), got {got}")]
    BadArity { template: &'static str, expected: usize, got: usize },
    #[error("constraint parameters must be non-empty")]
    EmptyParam,
    #[error("{template}({a}, {a}) is degenerate; equal parameters are only meaningful for coexistence")]
    EqualParams { template: &'static str, a: String },
    #[error("unknown constraint template `{0}`")]
    UnknownTemplate(String),
    #[error("malformed constraint text `{0}`, expected template(param[, param])")]
    Malformed(String),
    #[error("cannot align trace `{case_id}` to {constraint} = {target} within {budget} edits")]
    Unalignable { case_id: String, constraint: String, target: i64, budget: usize },
}

/// A template grounded on concrete activities, e.g. `response(a, b)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DeclareConstraint {
    template: Template,
    params: Vec<String>,
}

impl DeclareConstraint {
    pub fn new(template: Template, params: Vec<String>) -> Result<Self, DeclareError> {
        if params.len() != template.arity() {
            return Err(DeclareError::BadArity {
                template: template.name(),
                expected: template.arity(),
                got: params.len(),
            });
        }
        if params.iter().any(|p| p.is_empty()) {
            return Err(DeclareError::EmptyParam);
        }
        if template.arity() == 2 && params[0] == params[1] && template != Template::Coexistence {
            return Err(DeclareError::EqualParams {
                template: template.name(),
                a: params[0].clone(),
            });
        }
        Ok(DeclareConstraint { template, params })
    }

    pub fn existence(a: impl Into<String>) -> Self {
        DeclareConstraint::new(Template::Existence, vec![a.into()]).unwrap()
    }

    pub fn binary(template: Template, a: impl Into<String>, b: impl Into<String>) -> Self {
        DeclareConstraint::new(template, vec![a.into(), b.into()]).unwrap()
    }

    pub fn template(&self) -> Template {
        self.template
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }

    pub fn first(&self) -> &str {
        &self.params[0]
    }

    pub fn second(&self) -> Option<&str> {
        self.params.get(1).map(|s| s.as_str())
    }
}

impl fmt::Display for DeclareConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.template.name(), self.params.join(", "))
    }
}

impl FromStr for DeclareConstraint {
    type Err = DeclareError;

    /// Parse the textual form `template(param[, param])`. Template names
    /// accept spaces or underscores (`chain response` ≡ `chain_response`).
    fn from_str(text: &str) -> Result<Self, DeclareError> {
        let text = text.trim();
        let open = text.find('(').ok_or_else(|| DeclareError::Malformed(text.into()))?;
        if !text.ends_with(')') {
            return Err(DeclareError::Malformed(text.into()));
        }
        let raw_name = text[..open].trim().to_lowercase().replace([' ', '-'], "_");
        let template = match raw_name.as_str() {
            "existence" => Template::Existence,
            "response" => Template::Response,
            "chain_response" => Template::ChainResponse,
            "precedence" => Template::Precedence,
            "not_succession" => Template::NotSuccession,
            "coexistence" => Template::Coexistence,
            other => return Err(DeclareError::UnknownTemplate(other.to_string())),
        };
        let params: Vec<String> = text[open + 1..text.len() - 1]
            .split(',')
            .map(|p| p.trim().to_string())
            .collect();
        DeclareConstraint::new(template, params)
    }
}

/// Compliance status of one constraint on one trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstraintStatus {
    Violated,
    VacuouslySatisfied,
    Satisfied,
}

/// Activation accounting for one constraint on one trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvaluationResult {
    pub status: ConstraintStatus,
    pub activation_count: usize,
    pub fulfillment_count: usize,
    pub violation_count: usize,
}

impl EvaluationResult {
    fn from_counts(activations: usize, fulfillments: usize) -> EvaluationResult {
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
}

/// Evaluate a constraint on a trace, counting activations, fulfillments and
/// violations per the template's activation rule.
pub fn evaluate(constraint: &DeclareConstraint, trace: &Trace) -> EvaluationResult {
    let acts: Vec<&str> = trace.activities().collect();
    match constraint.template {
        Template::Existence => {
            let a = constraint.first();
            let count = acts.iter().filter(|&&x| x == a).count();
            if count == 0 {
                // The trace-level obligation itself is the single violated
                // activation; `existence` is never vacuous.
                EvaluationResult::from_counts(1, 0)
            } else {
                EvaluationResult::from_counts(count, count)
            }
        }
        Template::Response => {
            let (a, b) = (constraint.first(), constraint.second().unwrap());
            let last_b = acts.iter().rposition(|&x| x == b);
            let mut activations = 0;
            let mut fulfillments = 0;
            for (i, &x) in acts.iter().enumerate() {
                if x == a {
                    activations += 1;
                    if matches!(last_b, Some(j) if j > i) {
                        fulfillments += 1;
                    }
                }
            }
            EvaluationResult::from_counts(activations, fulfillments)
        }
        Template::ChainResponse => {
            let (a, b) = (constraint.first(), constraint.second().unwrap());
            let mut activations = 0;
            let mut fulfillments = 0;
            for (i, &x) in acts.iter().enumerate() {
                if x == a {
                    activations += 1;
                    if acts.get(i + 1) == Some(&b) {
                        fulfillments += 1;
                    }
                }
            }
            EvaluationResult::from_counts(activations, fulfillments)
        }
        Template::Precedence => {
            let (a, b) = (constraint.first(), constraint.second().unwrap());
            let first_a = acts.iter().position(|&x| x == a);
            let mut activations = 0;
            let mut fulfillments = 0;
            for (i, &x) in acts.iter().enumerate() {
                if x == b {
                    activations += 1;
                    if matches!(first_a, Some(j) if j < i) {
                        fulfillments += 1;
                    }
                }
            }
            EvaluationResult::from_counts(activations, fulfillments)
        }
        Template::NotSuccession => {
            let (a, b) = (constraint.first(), constraint.second().unwrap());
            let last_b = acts.iter().rposition(|&x| x == b);
            let mut activations = 0;
            let mut fulfillments = 0;
            for (i, &x) in acts.iter().enumerate() {
                if x == a {
                    activations += 1;
                    if !matches!(last_b, Some(j) if j > i) {
                        fulfillments += 1;
                    }
                }
            }
            EvaluationResult::from_counts(activations, fulfillments)
        }
        Template::Coexistence => {
            let (a, b) = (constraint.first(), constraint.second().unwrap());
            let count_a = acts.iter().filter(|&&x| x == a).count();
            let count_b = acts.iter().filter(|&&x| x == b).count();
            if a == b {
                // coexistence(a, a) degenerates to existence-style counting
                return evaluate(&DeclareConstraint::existence(a), trace);
            }
            let activations = count_a + count_b;
            let fulfillments =
                if count_a > 0 && count_b > 0 { activations } else { 0 };
            EvaluationResult::from_counts(activations, fulfillments)
        }
    }
}

/// Map an evaluation to its feature value: −1 when violated, 0 when
/// vacuously satisfied, the activation count when satisfied.
pub fn encode_value(result: &EvaluationResult) -> i64 {
    match result.status {
        ConstraintStatus::Violated => -1,
        ConstraintStatus::VacuouslySatisfied => 0,
        ConstraintStatus::Satisfied => result.activation_count as i64,
    }
}

/// Shorthand for `encode_value(&evaluate(constraint, trace))`.
pub fn evaluate_value(constraint: &DeclareConstraint, trace: &Trace) -> i64 {
    encode_value(&evaluate(constraint, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eventlog::Trace;

    fn trace(acts: &[&str]) -> Trace {
        Trace::from_activities("t", acts)
    }

    #[test]
    fn response_accounting_on_worked_traces() {
        let c = DeclareConstraint::binary(Template::Response, "a", "b");

        // t1 = <a,a,b,c>: activated and fulfilled twice
        let r = evaluate(&c, &trace(&["a", "a", "b", "c"]));
        assert_eq!(r.status, ConstraintStatus::Satisfied);
        assert_eq!((r.activation_count, r.fulfillment_count, r.violation_count), (2, 2, 0));

        // t2 = <b,b,c,d>: vacuously satisfied, a never occurs
        let r = evaluate(&c, &trace(&["b", "b", "c", "d"]));
        assert_eq!(r.status, ConstraintStatus::VacuouslySatisfied);
        assert_eq!(r.activation_count, 0);

        // t3 = <a,b,c,b>: activated and fulfilled once
        let r = evaluate(&c, &trace(&["a", "b", "c", "b"]));
        assert_eq!(r.status, ConstraintStatus::Satisfied);
        assert_eq!(r.activation_count, 1);

        // t4 = <a,b,a,c>: one fulfillment, one violation
        let r = evaluate(&c, &trace(&["a", "b", "a", "c"]));
        assert_eq!(r.status, ConstraintStatus::Violated);
        assert_eq!((r.activation_count, r.fulfillment_count, r.violation_count), (2, 1, 1));
    }

    #[test]
    fn nine_event_encoding_example() {
        let t = trace(&["a", "b", "c", "a", "b", "c", "d", "a", "b"]);

        // third occurrence of a is not followed by c
        let r = evaluate(&DeclareConstraint::binary(Template::Response, "a", "c"), &t);
        assert_eq!(r.status, ConstraintStatus::Violated);
        assert_eq!((r.activation_count, r.fulfillment_count, r.violation_count), (3, 2, 1));
        assert_eq!(encode_value(&r), -1);

        let r = evaluate(&DeclareConstraint::binary(Template::Response, "a", "b"), &t);
        assert_eq!(r.status, ConstraintStatus::Satisfied);
        assert_eq!(encode_value(&r), 3);

        // d occurs once and b does follow it, so the constraint is activated
        // and fulfilled once; on the d-free prefix it is vacuous instead.
        let r = evaluate(&DeclareConstraint::binary(Template::Response, "d", "b"), &t);
        assert_eq!(r.status, ConstraintStatus::Satisfied);
        assert_eq!(r.activation_count, 1);
        let r = evaluate(
            &DeclareConstraint::binary(Template::Response, "d", "b"),
            &trace(&["a", "b", "c"]),
        );
        assert_eq!(r.status, ConstraintStatus::VacuouslySatisfied);
        assert_eq!(encode_value(&r), 0);
    }

    #[test]
    fn existence_is_never_vacuous() {
        let c = DeclareConstraint::existence("a");
        let r = evaluate(&c, &trace(&["b"]));
        assert_eq!(r.status, ConstraintStatus::Violated);
        assert_eq!(encode_value(&r), -1);

        let r = evaluate(&c, &trace(&["a", "b", "a"]));
        assert_eq!(encode_value(&r), 2);
    }

    #[test]
    fn not_succession_violation_persists_under_extension() {
        let c = DeclareConstraint::binary(Template::NotSuccession, "a", "b");
        let base = vec!["a", "b"];
        assert_eq!(evaluate(&c, &trace(&base)).status, ConstraintStatus::Violated);
        for extra in ["a", "b", "c"] {
            let mut ext = base.clone();
            ext.push(extra);
            assert_eq!(evaluate(&c, &trace(&ext)).status, ConstraintStatus::Violated);
        }
    }

    #[test]
    fn coexistence_counts_both_sides() {
        let c = DeclareConstraint::binary(Template::Coexistence, "a", "b");
        let r = evaluate(&c, &trace(&["a", "c", "b", "a"]));
        assert_eq!(r.status, ConstraintStatus::Satisfied);
        assert_eq!(r.activation_count, 3);

        let r = evaluate(&c, &trace(&["a", "a", "c"]));
        assert_eq!(r.status, ConstraintStatus::Violated);
        assert_eq!(r.violation_count, 2);

        let r = evaluate(&c, &trace(&["c", "c"]));
        assert_eq!(r.status, ConstraintStatus::VacuouslySatisfied);
    }

    #[test]
    fn result_invariants_hold() {
        let traces = [
            vec!["a"],
            vec!["b"],
            vec!["a", "b", "a"],
            vec![],
            vec!["b", "a", "b", "b"],
        ];
        for t in &traces {
            for template in Template::ALL {
                let c = if template.arity() == 1 {
                    DeclareConstraint::existence("a")
                } else {
                    DeclareConstraint::binary(template, "a", "b")
                };
                let r = evaluate(&c, &trace(t));
                assert_eq!(r.fulfillment_count + r.violation_count, r.activation_count);
                match r.status {
                    ConstraintStatus::Violated => assert!(r.violation_count >= 1),
                    ConstraintStatus::VacuouslySatisfied => assert_eq!(r.activation_count, 0),
                    ConstraintStatus::Satisfied => {
                        assert!(r.activation_count >= 1 && r.violation_count == 0)
                    }
                }
            }
        }
    }

    #[test]
    fn constraint_display_and_parse() {
        let c = DeclareConstraint::binary(Template::Response, "Register", "Accept Claim");
        assert_eq!(c.to_string(), "response(Register, Accept Claim)");
        let parsed: DeclareConstraint = "response(Register, Accept Claim)".parse().unwrap();
        assert_eq!(parsed, c);
        let parsed: DeclareConstraint = "chain response(a, b)".parse().unwrap();
        assert_eq!(parsed.template(), Template::ChainResponse);
        assert!("response(a, a)".parse::<DeclareConstraint>().is_err());
        assert!("unknown(a)".parse::<DeclareConstraint>().is_err());
    }
}
