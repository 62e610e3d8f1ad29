//! CSV reader and writer for event logs.
//!
//! The canonical layout is one event per row:
//!
//! ```text
//! case_id,activity,timestamp[,resource][,trace:<name>…][,event:<name>…][,label]
//! ```
//!
//! Timestamps are ISO-8601, empty cells read as `unknown`, and the optional
//! `label` column carries `positive`/`negative` trace outcomes so that a
//! written log parses back to an equal value.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use chrono::{DateTime, NaiveDateTime, Utc};

use super::{EventLog, EventLogError, Label, Trace};
use crate::value::{Value, ValueKind};

/// What a CSV column means. Inferred from the header by default; a
/// [`SchemaHints`] map overrides the inference for files with foreign
/// headers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnRole {
    CaseId,
    Activity,
    Timestamp,
    Resource,
    TraceAttribute(String),
    EventAttribute(String),
    Label,
    Ignore,
}

/// Optional per-column role overrides, keyed by header name.
pub type SchemaHints = BTreeMap<String, ColumnRole>;

fn infer_role(header: &str) -> ColumnRole {
    match header {
        "case_id" => ColumnRole::CaseId,
        "activity" => ColumnRole::Activity,
        "timestamp" => ColumnRole::Timestamp,
        "resource" => ColumnRole::Resource,
        "label" => ColumnRole::Label,
        _ => {
            if let Some(name) = header.strip_prefix("trace:") {
                ColumnRole::TraceAttribute(name.to_string())
            } else if let Some(name) = header.strip_prefix("event:") {
                ColumnRole::EventAttribute(name.to_string())
            } else {
                ColumnRole::Ignore
            }
        }
    }
}

fn parse_timestamp(text: &str) -> Option<DateTime<Utc>> {
    if let Ok(dt) = DateTime::parse_from_rfc3339(text) {
        return Some(dt.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"] {
        if let Ok(naive) = NaiveDateTime::parse_from_str(text, fmt) {
            return Some(naive.and_utc());
        }
    }
    None
}

/// Parse a CSV byte stream into an [`EventLog`].
///
/// Events are grouped by `case_id`, ordered by timestamp within a case
/// (file order breaks ties and applies when timestamps are absent), and
/// traces appear in order of first occurrence.
pub fn parse_csv<R: Read>(
    source: R,
    schema_hints: Option<&SchemaHints>,
) -> Result<EventLog, EventLogError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(source);

    let headers = reader
        .headers()
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?
        .clone();

    let roles: Vec<ColumnRole> = headers
        .iter()
        .map(|h| {
            schema_hints
                .and_then(|hints| hints.get(h).cloned())
                .unwrap_or_else(|| infer_role(h))
        })
        .collect();

    if !roles.contains(&ColumnRole::CaseId) {
        return Err(EventLogError::MissingColumn("case_id"));
    }
    if !roles.contains(&ColumnRole::Activity) {
        return Err(EventLogError::MissingColumn("activity"));
    }

    // Attribute value kinds are pinned by the first typed cell of each
    // attribute; later cells that do not parse under that kind are an error.
    let mut kinds: BTreeMap<String, ValueKind> = BTreeMap::new();
    let mut typed = |name: &str, raw: &str| -> Result<Value, EventLogError> {
        let raw = raw.trim();
        if raw.is_empty() || raw == "unknown" {
            return Ok(Value::Unknown);
        }
        match kinds.get(name) {
            Some(kind) => Value::parse_as(*kind, raw)
                .ok_or_else(|| EventLogError::MixedAttributeType(name.to_string())),
            None => {
                let v = Value::parse(raw);
                if let Some(k) = v.kind() {
                    kinds.insert(name.to_string(), k);
                }
                Ok(v)
            }
        }
    };

    struct PendingTrace {
        trace: Trace,
        order: Vec<(Option<DateTime<Utc>>, usize)>,
    }
    let mut order_of_case: Vec<String> = Vec::new();
    let mut pending: BTreeMap<String, PendingTrace> = BTreeMap::new();

    for (row_idx, record) in reader.records().enumerate() {
        let row = row_idx + 2; // 1-based, after the header
        let record = record.map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;

        let mut case_id = String::new();
        let mut event = super::Event::new("");
        let mut trace_attrs: Vec<(String, Value)> = Vec::new();
        let mut label: Option<Label> = None;

        for (field, role) in record.iter().zip(&roles) {
            match role {
                ColumnRole::CaseId => case_id = field.trim().to_string(),
                ColumnRole::Activity => event.activity = field.trim().to_string(),
                ColumnRole::Timestamp => {
                    let text = field.trim();
                    if !text.is_empty() {
                        event.timestamp = Some(parse_timestamp(text).ok_or(
                            EventLogError::MalformedTimestamp { row, text: text.to_string() },
                        )?);
                    }
                }
                ColumnRole::Resource => {
                    let text = field.trim();
                    if !text.is_empty() {
                        event.resource = Some(text.to_string());
                    }
                }
                ColumnRole::TraceAttribute(name) => {
                    trace_attrs.push((name.clone(), typed(name, field)?));
                }
                ColumnRole::EventAttribute(name) => {
                    let v = typed(name, field)?;
                    event.attributes.insert(name.clone(), v);
                }
                ColumnRole::Label => match field.trim() {
                    "" => {}
                    "positive" | "true" => label = Some(Label::Positive),
                    "negative" | "false" => label = Some(Label::Negative),
                    other => {
                        return Err(EventLogError::MixedAttributeType(format!(
                            "label (unrecognized value {other:?} in row {row})"
                        )))
                    }
                },
                ColumnRole::Ignore => {}
            }
        }

        if case_id.is_empty() {
            return Err(EventLogError::EmptyCaseId(row));
        }
        if event.activity.is_empty() {
            return Err(EventLogError::EmptyActivity(row));
        }

        let entry = pending.entry(case_id.clone()).or_insert_with(|| {
            order_of_case.push(case_id.clone());
            PendingTrace { trace: Trace::new(case_id.clone()), order: Vec::new() }
        });
        for (name, value) in trace_attrs {
            entry.trace.trace_attributes.insert(name, value);
        }
        if label.is_some() {
            entry.trace.label = label;
        }
        entry.order.push((event.timestamp, entry.trace.events.len()));
        entry.trace.events.push(event);
    }

    let mut traces = Vec::with_capacity(order_of_case.len());
    for case_id in order_of_case {
        let PendingTrace { mut trace, mut order } = pending.remove(&case_id).unwrap();
        // Sort by timestamp when present; the file-order index keeps the
        // sort stable for ties and timestamp-free logs.
        order.sort_by(|a, b| match (a.0, b.0) {
            (Some(x), Some(y)) => x.cmp(&y).then(a.1.cmp(&b.1)),
            _ => a.1.cmp(&b.1),
        });
        trace.events = {
            let mut events: Vec<Option<super::Event>> =
                trace.events.into_iter().map(Some).collect();
            order.iter().map(|&(_, i)| events[i].take().unwrap()).collect()
        };
        traces.push(trace);
    }

    EventLog::new(traces)
}

/// Write a log in the canonical CSV layout. The label column is emitted
/// only when at least one trace is labeled.
pub fn write_csv<W: Write>(log: &EventLog, sink: W) -> Result<(), EventLogError> {
    let mut trace_attrs: Vec<String> = Vec::new();
    let mut event_attrs: Vec<String> = Vec::new();
    for (name, info) in log.attribute_schema() {
        match info.scope {
            super::AttributeScope::TraceStatic => trace_attrs.push(name.clone()),
            super::AttributeScope::EventDynamic => event_attrs.push(name.clone()),
        }
    }
    let any_resource = log
        .traces()
        .iter()
        .any(|t| t.events.iter().any(|e| e.resource.is_some()));
    let any_label = log.traces().iter().any(|t| t.label.is_some());

    let mut writer = csv::Writer::from_writer(sink);
    let mut header: Vec<String> = vec!["case_id".into(), "activity".into(), "timestamp".into()];
    if any_resource {
        header.push("resource".into());
    }
    header.extend(trace_attrs.iter().map(|a| format!("trace:{a}")));
    header.extend(event_attrs.iter().map(|a| format!("event:{a}")));
    if any_label {
        header.push("label".into());
    }
    writer.write_record(&header).map_err(io_err)?;

    let fmt_value = |v: &Value| -> String {
        match v {
            Value::Unknown => String::new(),
            other => other.to_string(),
        }
    };

    for trace in log.traces() {
        for event in &trace.events {
            let mut row: Vec<String> = vec![
                trace.case_id.clone(),
                event.activity.clone(),
                event
                    .timestamp
                    .map(|ts| ts.to_rfc3339_opts(chrono::SecondsFormat::Millis, true))
                    .unwrap_or_default(),
            ];
            if any_resource {
                row.push(event.resource.clone().unwrap_or_default());
            }
            for name in &trace_attrs {
                row.push(fmt_value(&trace.attribute(name)));
            }
            for name in &event_attrs {
                row.push(fmt_value(&event.attribute(name)));
            }
            if any_label {
                row.push(trace.label.map(|l| l.to_string()).unwrap_or_default());
            }
            writer.write_record(&row).map_err(io_err)?;
        }
    }
    writer.flush()?;
    Ok(())
}

fn io_err(e: csv::Error) -> EventLogError {
    EventLogError::Io(std::io::Error::new(std::io::ErrorKind::InvalidData, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_only_gives_empty_log() {
        let log = parse_csv("case_id,activity,timestamp\n".as_bytes(), None).unwrap();
        assert_eq!(log.len(), 0);
    }

    #[test]
    fn two_single_event_cases() {
        let csv = "case_id,activity,timestamp\nc1,a,\nc2,b,\n";
        let log = parse_csv(csv.as_bytes(), None).unwrap();
        assert_eq!(log.len(), 2);
        assert_eq!(log.traces()[0].case_id, "c1");
        assert_eq!(log.traces()[0].events[0].activity, "a");
        assert_eq!(log.traces()[1].case_id, "c2");
        assert_eq!(log.traces()[1].len(), 1);
    }

    #[test]
    fn trace_and_event_attributes_are_typed() {
        let csv = "case_id,activity,timestamp,trace:age,event:department\n\
                   s1,Register,2024-01-01T09:00:00Z,33,financial\n\
                   s1,Accept Claim,2024-01-01T10:00:00Z,33,assessment\n";
        let log = parse_csv(csv.as_bytes(), None).unwrap();
        let t = &log.traces()[0];
        assert_eq!(t.events[0].activity, "Register");
        assert_eq!(t.attribute("age"), Value::Int(33));
        assert_eq!(t.events[0].attribute("department"), Value::Str("financial".into()));
        assert_eq!(t.events[1].attribute("department"), Value::Str("assessment".into()));
    }

    #[test]
    fn missing_required_column() {
        let err = parse_csv("activity,timestamp\na,\n".as_bytes(), None).unwrap_err();
        assert!(matches!(err, EventLogError::MissingColumn("case_id")));
    }

    #[test]
    fn malformed_timestamp_reports_row() {
        let csv = "case_id,activity,timestamp\nc1,a,2024-01-01T09:00:00Z\nc1,b,not-a-time\n";
        let err = parse_csv(csv.as_bytes(), None).unwrap_err();
        assert!(matches!(err, EventLogError::MalformedTimestamp { row: 3, .. }));
    }

    #[test]
    fn mixed_attribute_type_detected() {
        let csv = "case_id,activity,timestamp,trace:age\nc1,a,,33\nc2,b,,old\n";
        let err = parse_csv(csv.as_bytes(), None).unwrap_err();
        assert!(matches!(err, EventLogError::MixedAttributeType(name) if name == "age"));
    }

    #[test]
    fn events_sorted_by_timestamp_with_file_order_ties() {
        let csv = "case_id,activity,timestamp\n\
                   c1,late,2024-01-02T00:00:00Z\n\
                   c1,early,2024-01-01T00:00:00Z\n\
                   c1,tie1,2024-01-03T00:00:00Z\n\
                   c1,tie2,2024-01-03T00:00:00Z\n";
        let log = parse_csv(csv.as_bytes(), None).unwrap();
        let acts: Vec<&str> = log.traces()[0].activities().collect();
        assert_eq!(acts, vec!["early", "late", "tie1", "tie2"]);
    }

    #[test]
    fn round_trip_preserves_log() {
        let csv = "case_id,activity,timestamp,resource,trace:age,trace:ctype,event:department,label\n\
                   s1,Register,2024-01-01T09:00:00.000Z,alice,33,Gold,financial,positive\n\
                   s1,Accept Claim,2024-01-01T10:00:00.000Z,bob,33,Gold,assessment,positive\n\
                   s2,Register,2024-01-01T09:30:00.000Z,alice,56,Regular,financial,negative\n\
                   s2,Send Questionnaire,2024-01-01T11:00:00.000Z,,56,Regular,,negative\n";
        let log = parse_csv(csv.as_bytes(), None).unwrap();
        let mut buf = Vec::new();
        write_csv(&log, &mut buf).unwrap();
        let reparsed = parse_csv(buf.as_slice(), None).unwrap();
        assert_eq!(log, reparsed);
    }
}
