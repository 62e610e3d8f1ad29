//! Event logs: traces, events, labeling, prefixing and dataset splits.
//!
//! A log records finished executions of a business process. Each [`Trace`]
//! is one case: an ordered run of [`Event`]s plus case-level attributes and
//! an optional binary outcome label. The [`EventLog`] owns the traces
//! together with derived metadata (activity alphabet, attribute schema)
//! that the encoders and rule evaluation rely on.

mod csv_io;
mod label;
mod xes;

pub use csv_io::{parse_csv, write_csv, ColumnRole, SchemaHints};
pub use label::{apply_labeling, CmpOp, CountTarget, LabelRule};
pub use xes::parse_xes;

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::value::{Value, ValueKind};

/// Binary case outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Positive,
    Negative,
}

impl Label {
    pub fn from_bool(positive: bool) -> Label {
        if positive {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Label::Positive => write!(f, "positive"),
            Label::Negative => write!(f, "negative"),
        }
    }
}

/// One executed activity with its payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub activity: String,
    pub timestamp: Option<DateTime<Utc>>,
    pub resource: Option<String>,
    pub attributes: BTreeMap<String, Value>,
}

impl Event {
    pub fn new(activity: impl Into<String>) -> Event {
        Event {
            activity: activity.into(),
            timestamp: None,
            resource: None,
            attributes: BTreeMap::new(),
        }
    }

    pub fn with_attr(mut self, name: impl Into<String>, value: Value) -> Event {
        self.attributes.insert(name.into(), value);
        self
    }

    /// Attribute lookup, treating absence as [`Value::Unknown`].
    pub fn attribute(&self, name: &str) -> Value {
        self.attributes.get(name).cloned().unwrap_or(Value::Unknown)
    }
}

/// One case: an ordered event sequence plus case-level data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub case_id: String,
    pub events: Vec<Event>,
    pub trace_attributes: BTreeMap<String, Value>,
    pub label: Option<Label>,
}

impl Trace {
    pub fn new(case_id: impl Into<String>) -> Trace {
        Trace {
            case_id: case_id.into(),
            events: Vec::new(),
            trace_attributes: BTreeMap::new(),
            label: None,
        }
    }

    /// Build a trace from bare activity names; handy in tests and book
    /// examples.
    pub fn from_activities(case_id: impl Into<String>, activities: &[&str]) -> Trace {
        let mut t = Trace::new(case_id);
        t.events = activities.iter().map(|a| Event::new(*a)).collect();
        t
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn activities(&self) -> impl Iterator<Item = &str> {
        self.events.iter().map(|e| e.activity.as_str())
    }

    pub fn attribute(&self, name: &str) -> Value {
        self.trace_attributes.get(name).cloned().unwrap_or(Value::Unknown)
    }
}

/// Whether an attribute lives on the trace or on individual events.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AttributeScope {
    TraceStatic,
    EventDynamic,
}

/// Declared type and observed domain of one attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeInfo {
    pub scope: AttributeScope,
    pub kind: Option<ValueKind>,
    pub domain: BTreeSet<Value>,
}

/// A set of labeled traces with derived schema metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventLog {
    traces: Vec<Trace>,
    activity_alphabet: BTreeSet<String>,
    attribute_schema: BTreeMap<String, AttributeInfo>,
}

#[derive(Debug, Error)]
pub enum EventLogError {
    #[error("required column `{0}` is missing")]
    MissingColumn(&'static str),
    #[error("malformed timestamp in row {row}: {text:?}")]
    MalformedTimestamp { row: usize, text: String },
    #[error("attribute `{0}` mixes incompatible types or scopes")]
    MixedAttributeType(String),
    #[error("XML syntax error at byte {position}: {message}")]
    XmlSyntax { position: u64, message: String },
    #[error("missing concept:name on {kind} #{index}")]
    MissingConceptName { kind: &'static str, index: usize },
    #[error("labeling rule references unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("log has {0} traces; at least 5 are required to split")]
    TooFewTraces(usize),
    #[error("empty case id in row {0}")]
    EmptyCaseId(usize),
    #[error("empty activity in row {0}")]
    EmptyActivity(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl EventLog {
    /// Assemble a log, deriving the activity alphabet and attribute schema
    /// from the traces. Fails when an attribute name is used with
    /// conflicting value types or in both trace and event scope.
    ///
    /// Missing values are canonically represented by map absence, so
    /// explicit `unknown` entries are dropped here; lookups through
    /// [`Trace::attribute`] and [`Event::attribute`] still read them back
    /// as [`Value::Unknown`].
    pub fn new(mut traces: Vec<Trace>) -> Result<EventLog, EventLogError> {
        for trace in &mut traces {
            trace.trace_attributes.retain(|_, v| !v.is_unknown());
            for event in &mut trace.events {
                event.attributes.retain(|_, v| !v.is_unknown());
            }
        }
        let mut alphabet = BTreeSet::new();
        let mut schema: BTreeMap<String, AttributeInfo> = BTreeMap::new();

        let mut note = |name: &str,
                        scope: AttributeScope,
                        value: &Value|
         -> Result<(), EventLogError> {
            let info = schema.entry(name.to_string()).or_insert_with(|| AttributeInfo {
                scope,
                kind: None,
                domain: BTreeSet::new(),
            });
            if info.scope != scope {
                return Err(EventLogError::MixedAttributeType(name.to_string()));
            }
            if let Some(kind) = value.kind() {
                match info.kind {
                    None => info.kind = Some(kind),
                    Some(k) if k != kind => {
                        return Err(EventLogError::MixedAttributeType(name.to_string()))
                    }
                    _ => {}
                }
            }
            info.domain.insert(value.clone());
            Ok(())
        };

        for trace in &traces {
            for (name, value) in &trace.trace_attributes {
                note(name, AttributeScope::TraceStatic, value)?;
            }
            for event in &trace.events {
                alphabet.insert(event.activity.clone());
                for (name, value) in &event.attributes {
                    note(name, AttributeScope::EventDynamic, value)?;
                }
            }
        }

        Ok(EventLog {
            traces,
            activity_alphabet: alphabet,
            attribute_schema: schema,
        })
    }

    pub fn traces(&self) -> &[Trace] {
        &self.traces
    }

    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    pub fn activity_alphabet(&self) -> &BTreeSet<String> {
        &self.activity_alphabet
    }

    pub fn attribute_schema(&self) -> &BTreeMap<String, AttributeInfo> {
        &self.attribute_schema
    }

    pub fn trace(&self, case_id: &str) -> Option<&Trace> {
        self.traces.iter().find(|t| t.case_id == case_id)
    }

    /// Replace every trace label by evaluating `f` on the complete trace.
    pub(crate) fn relabel<F>(&self, mut f: F) -> Result<EventLog, EventLogError>
    where
        F: FnMut(&Trace) -> Result<bool, EventLogError>,
    {
        let mut out = self.clone();
        for trace in &mut out.traces {
            trace.label = Some(Label::from_bool(f(trace)?));
        }
        Ok(out)
    }
}

/// Keep the first `n` events of every trace, carrying over trace attributes
/// and the full-trace label. Traces shorter than `n` are dropped: padding
/// them would fabricate events the encoders cannot tell apart from real
/// ones.
pub fn extract_prefixes(log: &EventLog, n: usize) -> EventLog {
    assert!(n >= 1, "prefix length must be at least 1");
    let traces = log
        .traces
        .iter()
        .filter(|t| t.events.len() >= n)
        .map(|t| {
            let mut p = t.clone();
            p.events.truncate(n);
            p
        })
        .collect();
    EventLog::new(traces).expect("prefixing cannot introduce schema conflicts")
}

/// The 20th-percentile (nearest-rank) trace length, the default prefix
/// length when none is configured.
pub fn first_quintile_length(log: &EventLog) -> Option<usize> {
    if log.is_empty() {
        return None;
    }
    let mut lengths: Vec<usize> = log.traces.iter().map(|t| t.len()).collect();
    lengths.sort_unstable();
    let rank = ((lengths.len() as f64) * 0.20).ceil() as usize;
    Some(lengths[rank.saturating_sub(1).min(lengths.len() - 1)])
}

/// Deterministic 48/16/16/20 partition into train, validation, feedback and
/// test sets.
pub fn split_dataset(
    log: &EventLog,
    seed: u64,
) -> Result<(EventLog, EventLog, EventLog, EventLog), EventLogError> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    let n = log.traces.len();
    if n < 5 {
        return Err(EventLogError::TooFewTraces(n));
    }

    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let n_train = (0.48 * n as f64).floor() as usize;
    let n_valid = (0.16 * n as f64).floor() as usize;
    let n_feedback = n_valid;

    let cut = |count: usize, rest: &mut Vec<usize>| -> Vec<usize> {
        let mut part: Vec<usize> = rest.drain(..count).collect();
        part.sort_unstable();
        part
    };
    let mut rest = order;
    let train = cut(n_train, &mut rest);
    let valid = cut(n_valid, &mut rest);
    let feedback = cut(n_feedback, &mut rest);
    let mut test = rest;
    test.sort_unstable();

    let pick = |idx: &[usize]| -> EventLog {
        EventLog::new(idx.iter().map(|&i| log.traces[i].clone()).collect())
            .expect("subset of a valid log stays valid")
    };
    Ok((pick(&train), pick(&valid), pick(&feedback), pick(&test)))
}
