//! XES reader (core subset).
//!
//! Understands `log`/`trace`/`event` elements with `string`, `int`, `float`,
//! `boolean` and `date` attributes. `concept:name` names traces and events,
//! `time:timestamp` and `org:resource` map onto the event fields, and every
//! other key becomes a data attribute. Reading only; CSV is the canonical
//! write format.

use std::io::BufRead;

use chrono::{DateTime, Utc};
use quick_xml::events::{BytesStart, Event as XmlEvent};
use quick_xml::Reader;

use super::{Event, EventLog, EventLogError, Trace};
use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Level {
    Log,
    Trace,
    Event,
}

fn xml_err(reader: &Reader<impl BufRead>, e: quick_xml::Error) -> EventLogError {
    EventLogError::XmlSyntax { position: reader.buffer_position(), message: e.to_string() }
}

fn key_value(tag: &BytesStart<'_>) -> (Option<String>, Option<String>) {
    let mut key = None;
    let mut value = None;
    for attr in tag.attributes().flatten() {
        match attr.key.as_ref() {
            b"key" => key = attr.unescape_value().ok().map(|v| v.into_owned()),
            b"value" => value = attr.unescape_value().ok().map(|v| v.into_owned()),
            _ => {}
        }
    }
    (key, value)
}

fn parse_typed(tag_name: &[u8], raw: &str) -> Option<Value> {
    match tag_name {
        b"string" => Some(Value::Str(raw.to_string())),
        b"int" => raw.parse::<i64>().ok().map(Value::Int),
        b"float" => raw.parse::<f64>().ok().map(Value::Real),
        b"boolean" => match raw {
            "true" => Some(Value::Bool(true)),
            "false" => Some(Value::Bool(false)),
            _ => None,
        },
        b"date" => None, // handled by the caller, kept out of data payloads
        _ => None,
    }
}

/// Parse a XES byte stream into an [`EventLog`].
pub fn parse_xes<R: BufRead>(source: R) -> Result<EventLog, EventLogError> {
    let mut reader = Reader::from_reader(source);
    reader.config_mut().trim_text(true);

    let mut level = Level::Log;
    let mut traces: Vec<Trace> = Vec::new();
    let mut trace_idx = 0usize;
    let mut event_idx = 0usize;

    let mut cur_trace: Option<Trace> = None;
    let mut cur_trace_name: Option<String> = None;
    let mut cur_event: Option<Event> = None;
    let mut cur_event_named = false;

    let mut buf = Vec::new();
    loop {
        let ev = reader.read_event_into(&mut buf).map_err(|e| xml_err(&reader, e))?;
        match ev {
            XmlEvent::Start(tag) | XmlEvent::Empty(tag) => {
                let name = tag.name().as_ref().to_vec();
                match &name[..] {
                    b"log" => {}
                    b"trace" => {
                        level = Level::Trace;
                        cur_trace = Some(Trace::new(format!("trace_{trace_idx}")));
                        cur_trace_name = None;
                        event_idx = 0;
                    }
                    b"event" => {
                        level = Level::Event;
                        cur_event = Some(Event::new(""));
                        cur_event_named = false;
                    }
                    b"string" | b"int" | b"float" | b"boolean" | b"date" => {
                        let (key, value) = key_value(&tag);
                        let (Some(key), Some(raw)) = (key, value) else {
                            buf.clear();
                            continue;
                        };
                        apply_attribute(
                            &reader,
                            level,
                            &name,
                            &key,
                            &raw,
                            cur_trace.as_mut(),
                            &mut cur_trace_name,
                            cur_event.as_mut(),
                            &mut cur_event_named,
                        )?;
                    }
                    // extensions, globals, classifiers: metadata we ignore
                    _ => {}
                }
            }
            XmlEvent::End(tag) => match tag.name().as_ref() {
                b"event" => {
                    let event = cur_event.take().expect("event end without start");
                    if !cur_event_named {
                        return Err(EventLogError::MissingConceptName {
                            kind: "event",
                            index: event_idx,
                        });
                    }
                    if let Some(trace) = cur_trace.as_mut() {
                        trace.events.push(event);
                    }
                    event_idx += 1;
                    level = Level::Trace;
                }
                b"trace" => {
                    let mut trace = cur_trace.take().expect("trace end without start");
                    match cur_trace_name.take() {
                        Some(name) => trace.case_id = name,
                        None => {
                            return Err(EventLogError::MissingConceptName {
                                kind: "trace",
                                index: trace_idx,
                            })
                        }
                    }
                    // XES files usually come event-ordered already; a stable
                    // sort enforces the timestamp invariant when they do not.
                    if trace.events.iter().all(|e| e.timestamp.is_some()) {
                        trace.events.sort_by_key(|e| e.timestamp);
                    }
                    traces.push(trace);
                    trace_idx += 1;
                    level = Level::Log;
                }
                _ => {}
            },
            XmlEvent::Eof => break,
            _ => {}
        }
        buf.clear();
    }

    EventLog::new(traces)
}

#[allow(clippy::too_many_arguments)]
fn apply_attribute(
    reader: &Reader<impl BufRead>,
    level: Level,
    tag_name: &[u8],
    key: &str,
    raw: &str,
    cur_trace: Option<&mut Trace>,
    cur_trace_name: &mut Option<String>,
    cur_event: Option<&mut Event>,
    cur_event_named: &mut bool,
) -> Result<(), EventLogError> {
    match level {
        Level::Log => {} // log-level metadata is not modeled
        Level::Trace => {
            let Some(trace) = cur_trace else { return Ok(()) };
            if key == "concept:name" {
                *cur_trace_name = Some(raw.to_string());
            } else if let Some(v) = parse_typed(tag_name, raw) {
                trace.trace_attributes.insert(key.to_string(), v);
            }
        }
        Level::Event => {
            let Some(event) = cur_event else { return Ok(()) };
            match key {
                "concept:name" => {
                    event.activity = raw.to_string();
                    *cur_event_named = true;
                }
                "time:timestamp" => {
                    let ts = DateTime::parse_from_rfc3339(raw)
                        .map(|dt| dt.with_timezone(&Utc))
                        .map_err(|e| EventLogError::XmlSyntax {
                            position: reader.buffer_position(),
                            message: format!("bad time:timestamp {raw:?}: {e}"),
                        })?;
                    event.timestamp = Some(ts);
                }
                "org:resource" => event.resource = Some(raw.to_string()),
                _ => {
                    if let Some(v) = parse_typed(tag_name, raw) {
                        event.attributes.insert(key.to_string(), v);
                    }
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"<?xml version="1.0" encoding="UTF-8"?>
<log xes.version="1.0">
  <trace>
    <string key="concept:name" value="case_1"/>
    <int key="age" value="33"/>
    <event>
      <string key="concept:name" value="b"/>
      <date key="time:timestamp" value="2024-01-01T10:00:00Z"/>
      <string key="department" value="assessment"/>
    </event>
    <event>
      <string key="concept:name" value="a"/>
      <date key="time:timestamp" value="2024-01-01T09:00:00Z"/>
      <org:resource/>
    </event>
  </trace>
</log>"#;

    #[test]
    fn empty_log_parses() {
        let log = parse_xes(r#"<log xes.version="1.0"></log>"#.as_bytes()).unwrap();
        assert_eq!(log.len(), 0);
    }

    #[test]
    fn events_come_back_in_timestamp_order() {
        let log = parse_xes(SAMPLE.as_bytes()).unwrap();
        assert_eq!(log.len(), 1);
        let t = &log.traces()[0];
        assert_eq!(t.case_id, "case_1");
        assert_eq!(t.attribute("age"), Value::Int(33));
        let acts: Vec<&str> = t.activities().collect();
        assert_eq!(acts, vec!["a", "b"]);
        assert_eq!(t.events[1].attribute("department"), Value::Str("assessment".into()));
    }

    #[test]
    fn missing_event_name_is_an_error() {
        let xml = r#"<log><trace>
            <string key="concept:name" value="c"/>
            <event><string key="x" value="y"/></event>
        </trace></log>"#;
        let err = parse_xes(xml.as_bytes()).unwrap_err();
        assert!(matches!(err, EventLogError::MissingConceptName { kind: "event", index: 0 }));
    }

    #[test]
    fn syntax_error_carries_position() {
        let err = parse_xes("<log><trace></log>".as_bytes()).unwrap_err();
        assert!(matches!(err, EventLogError::XmlSyntax { .. }));
    }
}
