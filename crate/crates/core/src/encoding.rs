//! Feature encodings of prefix traces.
//!
//! Three feature spaces are supported. The *simple* encoding has one
//! feature per event position holding the activity at that position. The
//! *complex* encoding prepends the trace-level attributes and appends one
//! feature per (event attribute, position). The *declare* encoding has one
//! feature per constraint whose cell is the constraint's encoded value on
//! the trace: −1 violated, 0 vacuously satisfied, otherwise the activation
//! count.
//!
//! An [`Encoding`] is fitted on the training(+validation) portion so that
//! each feature knows its admissible values; applying it to later data maps
//! out-of-vocabulary categorical cells to `unknown`, which keeps the label
//! vocabulary from leaking into evaluation. Declare cells always keep
//! their true numeric value.

use std::collections::BTreeSet;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::declare::{evaluate_value, DeclareConstraint};
use crate::eventlog::{AttributeScope, EventLog, Label, Trace};
use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureKind {
    PositionalActivity,
    StaticAttribute,
    DynamicAttribute,
    DeclareConstraint,
}

/// Where a feature's cell value comes from. Positions are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FeatureOrigin {
    Position(usize),
    StaticAttribute(String),
    DynamicAttribute { attribute: String, position: usize },
    Constraint(DeclareConstraint),
}

/// One column of an encoded dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    pub origin: FeatureOrigin,
    pub admissible_values: BTreeSet<Value>,
}

impl FeatureSpec {
    pub fn kind(&self) -> FeatureKind {
        match self.origin {
            FeatureOrigin::Position(_) => FeatureKind::PositionalActivity,
            FeatureOrigin::StaticAttribute(_) => FeatureKind::StaticAttribute,
            FeatureOrigin::DynamicAttribute { .. } => FeatureKind::DynamicAttribute,
            FeatureOrigin::Constraint(_) => FeatureKind::DeclareConstraint,
        }
    }

    /// Numeric features use threshold splits in the classifier; everything
    /// else splits on category equality.
    pub fn is_numeric(&self) -> bool {
        !self.admissible_values.is_empty()
            && self
                .admissible_values
                .iter()
                .all(|v| v.is_unknown() || v.as_numeric().is_some())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EncodingKind {
    Simple,
    Complex,
    Declare,
}

impl std::fmt::Display for EncodingKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EncodingKind::Simple => write!(f, "simple-index"),
            EncodingKind::Complex => write!(f, "complex-index"),
            EncodingKind::Declare => write!(f, "declare"),
        }
    }
}

#[derive(Debug, Error)]
pub enum EncodingError {
    #[error("trace `{case_id}` has {got} events, expected exactly {expected}")]
    LengthMismatch { case_id: String, expected: usize, got: usize },
    #[error("trace `{case_id}` is too short for feature position {position}")]
    PositionOutOfRange { case_id: String, position: usize },
    #[error("trace `{0}` carries no outcome label")]
    MissingLabel(String),
    #[error("declare encoding needs a non-empty constraint list")]
    EmptyConstraintList,
    #[error("cannot fit an encoding on an empty log")]
    EmptyLog,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("binary dataset cache is corrupt: {0}")]
    Cache(String),
}

/// A fitted feature space that can encode any compatible log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Encoding {
    kind: EncodingKind,
    features: Vec<FeatureSpec>,
    prefix_length: Option<usize>,
}

/// Feature matrix over a set of traces, one row per trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodedDataset {
    pub kind: EncodingKind,
    pub features: Vec<FeatureSpec>,
    pub rows: Vec<Vec<Value>>,
    pub labels: Vec<Label>,
    pub trace_ids: Vec<String>,
}

impl Encoding {
    /// Fit the simple-index space: features `event_1..event_n`, admissible
    /// values = the log's activity alphabet.
    pub fn fit_simple(log: &EventLog, n: usize) -> Result<Encoding, EncodingError> {
        if log.is_empty() {
            return Err(EncodingError::EmptyLog);
        }
        check_lengths(log, n)?;
        let alphabet: BTreeSet<Value> = log
            .activity_alphabet()
            .iter()
            .map(|a| Value::Str(a.clone()))
            .collect();
        let features = positional_features(n, &alphabet);
        Ok(Encoding { kind: EncodingKind::Simple, features, prefix_length: Some(n) })
    }

    /// Fit the complex-index space: static trace attributes, then
    /// `event_1..event_n`, then per-position features for every event
    /// attribute (and the resource field when present).
    pub fn fit_complex(log: &EventLog, n: usize) -> Result<Encoding, EncodingError> {
        if log.is_empty() {
            return Err(EncodingError::EmptyLog);
        }
        check_lengths(log, n)?;
        let alphabet: BTreeSet<Value> = log
            .activity_alphabet()
            .iter()
            .map(|a| Value::Str(a.clone()))
            .collect();

        let mut features = Vec::new();
        for (name, info) in log.attribute_schema() {
            if info.scope == AttributeScope::TraceStatic {
                features.push(FeatureSpec {
                    name: name.clone(),
                    origin: FeatureOrigin::StaticAttribute(name.clone()),
                    admissible_values: non_unknown_domain(&info.domain),
                });
            }
        }
        features.extend(positional_features(n, &alphabet));

        let mut dynamic: Vec<(String, BTreeSet<Value>)> = log
            .attribute_schema()
            .iter()
            .filter(|(_, info)| info.scope == AttributeScope::EventDynamic)
            .map(|(name, info)| (name.clone(), non_unknown_domain(&info.domain)))
            .collect();
        // The resource field joins the dynamic attributes unless a data
        // attribute already claimed the name.
        let has_resource_attr = dynamic.iter().any(|(n, _)| n == "resource");
        let resources: BTreeSet<Value> = log
            .traces()
            .iter()
            .flat_map(|t| t.events.iter())
            .filter_map(|e| e.resource.clone())
            .map(Value::Str)
            .collect();
        if !has_resource_attr && !resources.is_empty() {
            dynamic.push(("resource".to_string(), resources));
            dynamic.sort_by(|a, b| a.0.cmp(&b.0));
        }
        for (attr, domain) in dynamic {
            for position in 1..=n {
                features.push(FeatureSpec {
                    name: format!("{attr}_{position}"),
                    origin: FeatureOrigin::DynamicAttribute {
                        attribute: attr.clone(),
                        position,
                    },
                    admissible_values: domain.clone(),
                });
            }
        }
        Ok(Encoding { kind: EncodingKind::Complex, features, prefix_length: Some(n) })
    }

    /// Fit the declare space for the given constraints. Admissible values
    /// are `{-1, 0, 1}` plus every activation count observed in the fit
    /// log, so shuffle targets always have a candidate pool.
    pub fn fit_declare(
        log: &EventLog,
        constraints: &[DeclareConstraint],
    ) -> Result<Encoding, EncodingError> {
        if log.is_empty() {
            return Err(EncodingError::EmptyLog);
        }
        if constraints.is_empty() {
            return Err(EncodingError::EmptyConstraintList);
        }
        let features = constraints
            .iter()
            .map(|c| {
                let mut admissible: BTreeSet<Value> =
                    [-1i64, 0, 1].into_iter().map(Value::Int).collect();
                for trace in log.traces() {
                    admissible.insert(Value::Int(evaluate_value(c, trace)));
                }
                FeatureSpec {
                    name: c.to_string(),
                    origin: FeatureOrigin::Constraint(c.clone()),
                    admissible_values: admissible,
                }
            })
            .collect();
        Ok(Encoding { kind: EncodingKind::Declare, features, prefix_length: None })
    }

    pub fn kind(&self) -> EncodingKind {
        self.kind
    }

    pub fn features(&self) -> &[FeatureSpec] {
        &self.features
    }

    /// Encode every trace of `log` in this feature space.
    pub fn encode(&self, log: &EventLog) -> Result<EncodedDataset, EncodingError> {
        let mut rows = Vec::with_capacity(log.len());
        let mut labels = Vec::with_capacity(log.len());
        let mut trace_ids = Vec::with_capacity(log.len());
        for trace in log.traces() {
            if let Some(n) = self.prefix_length {
                if trace.len() != n {
                    return Err(EncodingError::LengthMismatch {
                        case_id: trace.case_id.clone(),
                        expected: n,
                        got: trace.len(),
                    });
                }
            }
            rows.push(reencode_trace(trace, &self.features)?);
            labels.push(
                trace
                    .label
                    .ok_or_else(|| EncodingError::MissingLabel(trace.case_id.clone()))?,
            );
            trace_ids.push(trace.case_id.clone());
        }
        Ok(EncodedDataset {
            kind: self.kind,
            features: self.features.clone(),
            rows,
            labels,
            trace_ids,
        })
    }
}

fn check_lengths(log: &EventLog, n: usize) -> Result<(), EncodingError> {
    assert!(n >= 1, "prefix length must be positive");
    for trace in log.traces() {
        if trace.len() != n {
            return Err(EncodingError::LengthMismatch {
                case_id: trace.case_id.clone(),
                expected: n,
                got: trace.len(),
            });
        }
    }
    Ok(())
}

fn positional_features(n: usize, alphabet: &BTreeSet<Value>) -> Vec<FeatureSpec> {
    (1..=n)
        .map(|position| FeatureSpec {
            name: format!("event_{position}"),
            origin: FeatureOrigin::Position(position),
            admissible_values: alphabet.clone(),
        })
        .collect()
}

fn non_unknown_domain(domain: &BTreeSet<Value>) -> BTreeSet<Value> {
    let trimmed: BTreeSet<Value> =
        domain.iter().filter(|v| !v.is_unknown()).cloned().collect();
    if trimmed.is_empty() {
        domain.clone()
    } else {
        trimmed
    }
}

/// Encode one trace against a feature list. Categorical cells outside the
/// feature's admissible values read as `unknown`; declare cells always
/// carry the constraint's true encoded value.
pub fn reencode_trace(
    trace: &Trace,
    features: &[FeatureSpec],
) -> Result<Vec<Value>, EncodingError> {
    features
        .iter()
        .map(|spec| {
            let raw = match &spec.origin {
                FeatureOrigin::Position(p) => {
                    let event = trace.events.get(p - 1).ok_or_else(|| {
                        EncodingError::PositionOutOfRange {
                            case_id: trace.case_id.clone(),
                            position: *p,
                        }
                    })?;
                    Value::Str(event.activity.clone())
                }
                FeatureOrigin::StaticAttribute(name) => trace.attribute(name),
                FeatureOrigin::DynamicAttribute { attribute, position } => {
                    let event = trace.events.get(position - 1).ok_or_else(|| {
                        EncodingError::PositionOutOfRange {
                            case_id: trace.case_id.clone(),
                            position: *position,
                        }
                    })?;
                    if attribute == "resource" && !event.attributes.contains_key("resource") {
                        event
                            .resource
                            .clone()
                            .map(Value::Str)
                            .unwrap_or(Value::Unknown)
                    } else {
                        event.attribute(attribute)
                    }
                }
                FeatureOrigin::Constraint(c) => {
                    return Ok(Value::Int(evaluate_value(c, trace)))
                }
            };
            if raw.is_unknown() || spec.admissible_values.contains(&raw) {
                Ok(raw)
            } else {
                Ok(Value::Unknown)
            }
        })
        .collect()
}

/// One-shot simple-index encoding: fit on `log` and encode it.
pub fn encode_simple(log: &EventLog, n: usize) -> Result<EncodedDataset, EncodingError> {
    Encoding::fit_simple(log, n)?.encode(log)
}

/// One-shot complex-index encoding: fit on `log` and encode it.
pub fn encode_complex(log: &EventLog, n: usize) -> Result<EncodedDataset, EncodingError> {
    Encoding::fit_complex(log, n)?.encode(log)
}

/// One-shot declare encoding of `log` over `constraints`.
pub fn encode_declare(
    log: &EventLog,
    constraints: &[DeclareConstraint],
) -> Result<EncodedDataset, EncodingError> {
    Encoding::fit_declare(log, constraints)?.encode(log)
}

impl EncodedDataset {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    pub fn row_of(&self, trace_id: &str) -> Option<&[Value]> {
        self.trace_ids
            .iter()
            .position(|id| id == trace_id)
            .map(|i| self.rows[i].as_slice())
    }

    /// Check the structural invariants: aligned row/label/id counts, unique
    /// feature names, and every cell admissible (or `unknown`; declare
    /// cells may carry counts unseen at fit time).
    pub fn validate(&self) -> Result<(), String> {
        if self.rows.len() != self.labels.len() || self.rows.len() != self.trace_ids.len() {
            return Err("row, label and trace-id counts differ".into());
        }
        let mut names = BTreeSet::new();
        for f in &self.features {
            if !names.insert(&f.name) {
                return Err(format!("duplicate feature name {}", f.name));
            }
            if f.admissible_values.is_empty() {
                return Err(format!("feature {} has no admissible values", f.name));
            }
        }
        for (row_idx, row) in self.rows.iter().enumerate() {
            if row.len() != self.features.len() {
                return Err(format!("row {row_idx} has wrong width"));
            }
            for (cell, spec) in row.iter().zip(&self.features) {
                let ok = cell.is_unknown()
                    || spec.admissible_values.contains(cell)
                    || (spec.kind() == FeatureKind::DeclareConstraint
                        && matches!(cell, Value::Int(v) if *v >= -1));
                if !ok {
                    return Err(format!(
                        "row {row_idx}, feature {}: value {cell} not admissible",
                        spec.name
                    ));
                }
            }
        }
        Ok(())
    }

    /// Write the dataset as CSV: feature-name header plus a `label` column.
    pub fn write_csv<W: Write>(&self, sink: W) -> Result<(), EncodingError> {
        let mut writer = csv::Writer::from_writer(sink);
        let mut header: Vec<String> = self.features.iter().map(|f| f.name.clone()).collect();
        header.push("label".into());
        writer
            .write_record(&header)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
        for (row, label) in self.rows.iter().zip(&self.labels) {
            let mut record: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            record.push(label.to_string());
            writer
                .write_record(&record)
                .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
        }
        writer.flush()?;
        Ok(())
    }

    /// Compact binary cache, for handing datasets between CLI stages.
    pub fn write_binary<W: Write>(&self, sink: W) -> Result<(), EncodingError> {
        bincode::serialize_into(sink, self).map_err(|e| EncodingError::Cache(e.to_string()))
    }

    pub fn read_binary<R: std::io::Read>(source: R) -> Result<EncodedDataset, EncodingError> {
        bincode::deserialize_from(source).map_err(|e| EncodingError::Cache(e.to_string()))
    }
}
