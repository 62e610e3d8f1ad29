//! Synthetic claim-management log generation.
//!
//! The simulated process registers a claim, runs a basic or complex check
//! pair depending on claim severity, optionally assesses, then accepts or
//! rejects, notifies the claimant, and archives. A questionnaire branch
//! (create, send, optional resend and receipt or timeout) runs in parallel
//! and may interleave before the decision; accepted claims sometimes
//! trigger a late medical re-check after the questionnaire round.
//!
//! Each noise scenario pairs a *condition* rule (the true labeling) with a
//! *noise* rule used to relabel the training split, so a trained model
//! picks up a controlled wrong correlation that the explain-shuffle-retrain
//! loop is expected to weaken.

use chrono::{Duration, TimeZone, Utc};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::declare::{DeclareConstraint, Template};
use crate::encoding::EncodingKind;
use crate::eventlog::{apply_labeling, CmpOp, Event, EventLog, LabelRule, Trace};
use crate::rng::{mix, stream, tags};
use crate::value::Value;

/// The sixteen activities of the claim process.
pub const ACTIVITIES: [&str; 16] = [
    "Register",
    "Low Medical History",
    "High Medical History",
    "Low Insurance Check",
    "High Insurance Check",
    "Assess Claim",
    "Accept Claim",
    "Reject Claim",
    "Notify by Phone",
    "Notify by Post",
    "Notify by Email",
    "Create Questionnaire",
    "Send Questionnaire",
    "Receive Questionnaire",
    "Questionnaire Timeout",
    "Archive",
];

/// Which controlled wrong correlation the training split receives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NoiseScenario {
    None,
    /// Positional noise: training positives need `Accept Claim` at
    /// position 5 instead of anywhere.
    S1,
    /// Attribute noise: training accepts Silver customers alongside Gold.
    S2,
    /// Constraint noise: training positives additionally require a
    /// violated `response(Low Medical History, Create Questionnaire)`.
    S3,
}

impl NoiseScenario {
    /// The true outcome condition, evaluated on complete traces.
    pub fn condition_rule(self) -> LabelRule {
        match self {
            NoiseScenario::None | NoiseScenario::S1 | NoiseScenario::S3 => {
                LabelRule::Constraint(DeclareConstraint::existence("Accept Claim"))
            }
            NoiseScenario::S2 => LabelRule::and([
                LabelRule::AttributeCompare {
                    attribute: "Age".into(),
                    op: CmpOp::Lt,
                    value: Value::Int(60),
                },
                LabelRule::AttributeCompare {
                    attribute: "CType".into(),
                    op: CmpOp::Eq,
                    value: Value::Str("Gold".into()),
                },
            ]),
        }
    }

    /// The training-split relabeling, when the scenario has one.
    pub fn noise_rule(self) -> Option<LabelRule> {
        match self {
            NoiseScenario::None => None,
            NoiseScenario::S1 => Some(LabelRule::ActivityAt {
                position: 5,
                activity: "Accept Claim".into(),
            }),
            NoiseScenario::S2 => Some(LabelRule::and([
                LabelRule::AttributeCompare {
                    attribute: "Age".into(),
                    op: CmpOp::Lt,
                    value: Value::Int(60),
                },
                LabelRule::or([
                    LabelRule::AttributeCompare {
                        attribute: "CType".into(),
                        op: CmpOp::Eq,
                        value: Value::Str("Gold".into()),
                    },
                    LabelRule::AttributeCompare {
                        attribute: "CType".into(),
                        op: CmpOp::Eq,
                        value: Value::Str("Silver".into()),
                    },
                ]),
            ])),
            NoiseScenario::S3 => Some(LabelRule::and([
                LabelRule::Constraint(DeclareConstraint::existence("Accept Claim")),
                LabelRule::negate(LabelRule::Constraint(DeclareConstraint::binary(
                    Template::Response,
                    "Low Medical History",
                    "Create Questionnaire",
                ))),
            ])),
        }
    }

    /// The encoding each scenario was designed to stress.
    pub fn default_encoding(self) -> EncodingKind {
        match self {
            NoiseScenario::None | NoiseScenario::S1 => EncodingKind::Simple,
            NoiseScenario::S2 => EncodingKind::Complex,
            NoiseScenario::S3 => EncodingKind::Declare,
        }
    }

    /// Default prefix length per scenario.
    pub fn default_prefix(self) -> usize {
        match self {
            NoiseScenario::None | NoiseScenario::S1 => 4,
            NoiseScenario::S2 | NoiseScenario::S3 => 7,
        }
    }
}

impl std::str::FromStr for NoiseScenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(NoiseScenario::None),
            "s1" => Ok(NoiseScenario::S1),
            "s2" => Ok(NoiseScenario::S2),
            "s3" => Ok(NoiseScenario::S3),
            other => Err(format!("unknown noise scenario `{other}` (use none|s1|s2|s3)")),
        }
    }
}

impl std::fmt::Display for NoiseScenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NoiseScenario::None => write!(f, "none"),
            NoiseScenario::S1 => write!(f, "S1"),
            NoiseScenario::S2 => write!(f, "S2"),
            NoiseScenario::S3 => write!(f, "S3"),
        }
    }
}

/// Branch probabilities of the claim process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    /// Share of low-severity claims (basic check path).
    pub p_low: f64,
    pub p_accept_low: f64,
    pub p_accept_high: f64,
    /// Assessment before the decision, by outcome.
    pub p_assess_accept: f64,
    pub p_assess_reject: f64,
    /// Questionnaire branch interleaving before the decision, by outcome.
    pub p_early_quest_accept: f64,
    pub p_early_quest_reject: f64,
    /// Late medical re-check after the questionnaire round. Only
    /// low-severity claims of accepted cases re-check often; the re-check
    /// is what makes `response(Low Medical History, Create Questionnaire)`
    /// end up violated on the complete trace.
    pub p_recheck_accept_low: f64,
    pub p_recheck_accept_high: f64,
    pub p_recheck_reject: f64,
    /// Questionnaire resend rates; problematic questionnaires tend to be
    /// both resent and re-checked, which leaves a prefix-visible trace of
    /// the late re-check.
    pub p_resend_given_recheck: f64,
    pub p_resend_no_recheck: f64,
    /// Fast-track traces skip notification and questionnaire extras.
    pub p_fast_track: f64,
    pub p_notify_second: f64,
    pub p_receipt: f64,
    /// Customer-type distribution: Gold, Silver, Regular, VIP.
    pub ctype_weights: [f64; 4],
    pub p_pclaims_yes: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            p_low: 0.55,
            p_accept_low: 0.40,
            p_accept_high: 0.18,
            p_assess_accept: 0.50,
            p_assess_reject: 0.42,
            p_early_quest_accept: 0.15,
            p_early_quest_reject: 0.10,
            p_recheck_accept_low: 0.55,
            p_recheck_accept_high: 0.06,
            p_recheck_reject: 0.04,
            p_resend_given_recheck: 0.82,
            p_resend_no_recheck: 0.04,
            p_fast_track: 0.22,
            p_notify_second: 0.30,
            p_receipt: 0.75,
            ctype_weights: [0.40, 0.32, 0.18, 0.10],
            p_pclaims_yes: 0.45,
        }
    }
}

const CTYPES: [&str; 4] = ["Gold", "Silver", "Regular", "VIP"];

/// Generate a claim log with the default process parameters; the traces
/// carry the scenario's *true* labels. The noise relabeling of the
/// training split happens inside the pipeline, after splitting.
pub fn generate_claim_log(n_traces: usize, noise: NoiseScenario, seed: u64) -> EventLog {
    generate_claim_log_with(n_traces, noise, seed, &GeneratorConfig::default())
}

pub fn generate_claim_log_with(
    n_traces: usize,
    noise: NoiseScenario,
    seed: u64,
    config: &GeneratorConfig,
) -> EventLog {
    assert!(n_traces >= 1, "need at least one trace");
    let base_seed = mix(seed, tags::GENERATOR);
    let traces: Vec<Trace> = (0..n_traces)
        .map(|i| generate_trace(i, stream(base_seed, i as u64), config))
        .collect();
    let log = EventLog::new(traces).expect("generated traces have a consistent schema");
    apply_labeling(&log, &noise.condition_rule()).expect("condition rule is closed over the schema")
}

fn generate_trace(index: usize, mut rng: impl Rng, config: &GeneratorConfig) -> Trace {
    let mut trace = Trace::new(format!("case_{index:05}"));

    let age = rng.gen_range(18..=90i64);
    let ctype = weighted_choice(&mut rng, &config.ctype_weights);
    let pclaims = rng.gen_bool(config.p_pclaims_yes);
    trace.trace_attributes.insert("Age".into(), Value::Int(age));
    trace.trace_attributes.insert("CType".into(), Value::Str(CTYPES[ctype].into()));
    trace
        .trace_attributes
        .insert("PClaims".into(), Value::Str(if pclaims { "Yes" } else { "No" }.into()));

    let low = rng.gen_bool(config.p_low);
    let accept =
        rng.gen_bool(if low { config.p_accept_low } else { config.p_accept_high });
    let fast = rng.gen_bool(config.p_fast_track);
    let assess = rng.gen_bool(if accept { config.p_assess_accept } else { config.p_assess_reject });
    let early_quest = !fast
        && rng.gen_bool(if accept {
            config.p_early_quest_accept
        } else {
            config.p_early_quest_reject
        });
    let p_recheck = if !accept {
        config.p_recheck_reject
    } else if low {
        config.p_recheck_accept_low
    } else {
        config.p_recheck_accept_high
    };
    let recheck = !fast && rng.gen_bool(p_recheck);
    let resend = !fast
        && rng.gen_bool(if recheck {
            config.p_resend_given_recheck
        } else {
            config.p_resend_no_recheck
        });
    let check_dept = if low { "assessment" } else { "audit" };

    // main flow up to the decision
    let mut main: Vec<(&str, &str)> = vec![
        (if low { "Low Medical History" } else { "High Medical History" }, check_dept),
        (if low { "Low Insurance Check" } else { "High Insurance Check" }, check_dept),
    ];
    if assess {
        main.push(("Assess Claim", "assessment"));
    }
    main.push((if accept { "Accept Claim" } else { "Reject Claim" }, "assessment"));

    // questionnaire round
    let mut quest: Vec<(&str, &str)> = vec![
        ("Create Questionnaire", "secretary"),
        ("Send Questionnaire", "secretary"),
    ];
    if resend {
        quest.push(("Send Questionnaire", "secretary"));
    }
    if !fast {
        quest.push((
            if rng.gen_bool(config.p_receipt) {
                "Receive Questionnaire"
            } else {
                "Questionnaire Timeout"
            },
            "secretary",
        ));
    }

    // notifications go out once the questionnaire round is underway
    let mut tail: Vec<(&str, &str)> = Vec::new();
    if !fast {
        tail.push((notify_channel(&mut rng), "front office"));
        if rng.gen_bool(config.p_notify_second) {
            tail.push((notify_channel(&mut rng), "front office"));
        }
    }

    let mut events: Vec<(&str, &str)> = vec![("Register", "financial")];
    if early_quest {
        // the questionnaire round slots in right after the checks
        let cut = 1usize; // after Medical History and Insurance Check
        events.extend(main.drain(..=cut));
        events.append(&mut quest);
        events.append(&mut main);
        events.append(&mut tail);
    } else {
        events.append(&mut main);
        events.append(&mut quest);
        events.append(&mut tail);
    }

    if recheck {
        events.push((
            if low { "Low Medical History" } else { "High Medical History" },
            check_dept,
        ));
    }
    events.push(("Archive", "financial"));

    let start = Utc.with_ymd_and_hms(2024, 1, 1, 8, 0, 0).unwrap()
        + Duration::minutes(index as i64 * 13);
    for (pos, (activity, department)) in events.into_iter().enumerate() {
        let mut event = Event::new(activity);
        event.timestamp = Some(start + Duration::minutes(pos as i64 * 37));
        event
            .attributes
            .insert("department".into(), Value::Str(department.into()));
        trace.events.push(event);
    }
    trace
}

fn notify_channel(rng: &mut impl Rng) -> &'static str {
    match rng.gen_range(0..3u8) {
        0 => "Notify by Phone",
        1 => "Notify by Post",
        _ => "Notify by Email",
    }
}

fn weighted_choice(rng: &mut impl Rng, weights: &[f64; 4]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut draw = rng.gen_range(0.0..total);
    for (i, w) in weights.iter().enumerate() {
        if draw < *w {
            return i;
        }
        draw -= w;
    }
    weights.len() - 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eventlog::Label;

    #[test]
    fn generator_is_deterministic() {
        let a = generate_claim_log(50, NoiseScenario::S1, 7);
        let b = generate_claim_log(50, NoiseScenario::S1, 7);
        assert_eq!(a, b);
    }

    #[test]
    fn every_trace_is_well_formed() {
        let log = generate_claim_log(300, NoiseScenario::None, 11);
        for trace in log.traces() {
            let acts: Vec<&str> = trace.activities().collect();
            assert_eq!(acts[0], "Register");
            assert_eq!(*acts.last().unwrap(), "Archive");
            assert_eq!(acts.iter().filter(|&&a| a == "Create Questionnaire").count(), 1);
            let accepts = acts.iter().filter(|&&a| a == "Accept Claim").count();
            let rejects = acts.iter().filter(|&&a| a == "Reject Claim").count();
            assert_eq!(accepts + rejects, 1, "exactly one decision per trace");
            assert!(trace.label.is_some());
            // timestamps non-decreasing
            let stamps: Vec<_> = trace.events.iter().map(|e| e.timestamp.unwrap()).collect();
            assert!(stamps.windows(2).all(|w| w[0] <= w[1]));
        }
        assert!(log.activity_alphabet().len() <= 16);
    }

    #[test]
    fn label_balance_is_paperlike() {
        let log = generate_claim_log(4000, NoiseScenario::S1, 3);
        let positive = log
            .traces()
            .iter()
            .filter(|t| t.label == Some(Label::Positive))
            .count() as f64
            / log.len() as f64;
        assert!((0.24..=0.36).contains(&positive), "positive share {positive}");

        let log2 = generate_claim_log(4000, NoiseScenario::S2, 3);
        let positive2 = log2
            .traces()
            .iter()
            .filter(|t| t.label == Some(Label::Positive))
            .count() as f64
            / log2.len() as f64;
        assert!((0.18..=0.34).contains(&positive2), "S2 positive share {positive2}");
    }

    #[test]
    fn average_length_and_quintile_are_plausible() {
        let log = generate_claim_log(3000, NoiseScenario::None, 5);
        let lengths: Vec<usize> = log.traces().iter().map(|t| t.len()).collect();
        let avg = lengths.iter().sum::<usize>() as f64 / lengths.len() as f64;
        assert!((9.0..=12.5).contains(&avg), "average length {avg}");
        let q = crate::eventlog::first_quintile_length(&log).unwrap();
        assert!((7..=9).contains(&q), "first quintile {q}");
    }

    #[test]
    fn noise_rules_diverge_from_condition_only_on_some_traces() {
        let log = generate_claim_log(2000, NoiseScenario::S1, 9);
        let noise = apply_labeling(&log, &NoiseScenario::S1.noise_rule().unwrap()).unwrap();
        let mut diverging = 0usize;
        for (t, n) in log.traces().iter().zip(noise.traces()) {
            // positional noise is a strict subset of the true condition
            if n.label == Some(Label::Positive) {
                assert_eq!(t.label, Some(Label::Positive));
            }
            if t.label != n.label {
                diverging += 1;
            }
        }
        let share = diverging as f64 / log.len() as f64;
        assert!((0.05..=0.30).contains(&share), "diverging share {share}");
    }

    #[test]
    fn scenario_defaults_follow_the_experiment_setup() {
        use crate::encoding::EncodingKind;
        assert_eq!(NoiseScenario::S1.default_prefix(), 4);
        assert_eq!(NoiseScenario::S2.default_prefix(), 7);
        assert_eq!(NoiseScenario::S3.default_prefix(), 7);
        assert_eq!(NoiseScenario::S1.default_encoding(), EncodingKind::Simple);
        assert_eq!(NoiseScenario::S2.default_encoding(), EncodingKind::Complex);
        assert_eq!(NoiseScenario::S3.default_encoding(), EncodingKind::Declare);
        assert!(NoiseScenario::None.noise_rule().is_none());
        // without noise the train and test labelings coincide by definition
        assert_eq!(
            NoiseScenario::None.condition_rule(),
            NoiseScenario::S1.condition_rule()
        );
    }

    #[test]
    fn s3_noise_uses_the_response_violation() {
        let log = generate_claim_log(2000, NoiseScenario::S3, 13);
        let noise = apply_labeling(&log, &NoiseScenario::S3.noise_rule().unwrap()).unwrap();
        let noise_pos =
            noise.traces().iter().filter(|t| t.label == Some(Label::Positive)).count();
        let true_pos = log.traces().iter().filter(|t| t.label == Some(Label::Positive)).count();
        assert!(noise_pos > 0, "S3 noise labels nothing positive");
        assert!(noise_pos < true_pos, "S3 noise must strictly tighten the condition");
    }
}
