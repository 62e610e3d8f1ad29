//! Outcome labeling rules.
//!
//! A [`LabelRule`] is a boolean expression over a complete trace: declare
//! constraints, attribute comparisons, positional activity checks and
//! occurrence counts, combined with `and`/`or`/`not`. Rules have a textual
//! form for the command line and config files, e.g.
//!
//! ```text
//! existence(Accept Claim)
//! Age < 60 and CType = Gold
//! existence(Accept Claim) and !response(Low Medical History, Create Questionnaire)
//! position(5, Accept Claim)
//! count(Reject Claim) >= 1
//! ```

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{AttributeScope, EventLog, EventLogError, Trace};
use crate::declare::{evaluate, ConstraintStatus, DeclareConstraint};
use crate::value::{compare_values, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    fn check(self, ord: Option<Ordering>, values_equal: bool) -> bool {
        match self {
            CmpOp::Eq => values_equal,
            CmpOp::Ne => !values_equal,
            CmpOp::Lt => matches!(ord, Some(Ordering::Less)),
            CmpOp::Le => matches!(ord, Some(Ordering::Less | Ordering::Equal)),
            CmpOp::Gt => matches!(ord, Some(Ordering::Greater)),
            CmpOp::Ge => matches!(ord, Some(Ordering::Greater | Ordering::Equal)),
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

/// What a `count(...)` atom counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CountTarget {
    Activity(String),
    EventAttribute { attribute: String, value: Value },
}

/// Boolean labeling expression over a complete trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LabelRule {
    /// True when the constraint is satisfied on the trace, vacuously or
    /// not. The negation `!constraint` therefore means *violated*.
    Constraint(DeclareConstraint),
    AttributeCompare { attribute: String, op: CmpOp, value: Value },
    /// True when the 1-based position holds the given activity.
    ActivityAt { position: usize, activity: String },
    CountCompare { target: CountTarget, op: CmpOp, count: i64 },
    And(Vec<LabelRule>),
    Or(Vec<LabelRule>),
    Not(Box<LabelRule>),
}

impl LabelRule {
    pub fn and(rules: impl IntoIterator<Item = LabelRule>) -> LabelRule {
        LabelRule::And(rules.into_iter().collect())
    }

    pub fn or(rules: impl IntoIterator<Item = LabelRule>) -> LabelRule {
        LabelRule::Or(rules.into_iter().collect())
    }

    pub fn negate(rule: LabelRule) -> LabelRule {
        LabelRule::Not(Box::new(rule))
    }

    /// Evaluate on a complete trace. `log` supplies the attribute schema
    /// for scope resolution and closure checking.
    pub fn evaluate(&self, trace: &Trace, log: &EventLog) -> Result<bool, EventLogError> {
        match self {
            LabelRule::Constraint(c) => {
                Ok(evaluate(c, trace).status != ConstraintStatus::Violated)
            }
            LabelRule::AttributeCompare { attribute, op, value } => {
                let Some(info) = log.attribute_schema().get(attribute) else {
                    return Err(EventLogError::UnknownAttribute(attribute.clone()));
                };
                match info.scope {
                    AttributeScope::TraceStatic => {
                        let actual = trace.attribute(attribute);
                        Ok(op.check(compare_values(&actual, value), &actual == value))
                    }
                    AttributeScope::EventDynamic => Ok(trace.events.iter().any(|e| {
                        let actual = e.attribute(attribute);
                        op.check(compare_values(&actual, value), &actual == value)
                    })),
                }
            }
            LabelRule::ActivityAt { position, activity } => Ok(trace
                .events
                .get(position.wrapping_sub(1))
                .is_some_and(|e| e.activity == *activity)),
            LabelRule::CountCompare { target, op, count } => {
                let n = match target {
                    CountTarget::Activity(a) => {
                        trace.activities().filter(|&x| x == a).count() as i64
                    }
                    CountTarget::EventAttribute { attribute, value } => trace
                        .events
                        .iter()
                        .filter(|e| &e.attribute(attribute) == value)
                        .count() as i64,
                };
                Ok(op.check(Some(n.cmp(count)), n == *count))
            }
            LabelRule::And(rules) => {
                for r in rules {
                    if !r.evaluate(trace, log)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            LabelRule::Or(rules) => {
                for r in rules {
                    if r.evaluate(trace, log)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            LabelRule::Not(rule) => Ok(!rule.evaluate(trace, log)?),
        }
    }
}

/// Label every trace by evaluating `rule` on the complete trace: positive
/// when it holds, negative otherwise.
pub fn apply_labeling(log: &EventLog, rule: &LabelRule) -> Result<EventLog, EventLogError> {
    log.relabel(|trace| rule.evaluate(trace, log))
}

impl fmt::Display for LabelRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelRule::Constraint(c) => write!(f, "{c}"),
            LabelRule::AttributeCompare { attribute, op, value } => {
                write!(f, "{attribute} {} {value}", op.symbol())
            }
            LabelRule::ActivityAt { position, activity } => {
                write!(f, "position({position}, {activity})")
            }
            LabelRule::CountCompare { target, op, count } => match target {
                CountTarget::Activity(a) => write!(f, "count({a}) {} {count}", op.symbol()),
                CountTarget::EventAttribute { attribute, value } => {
                    write!(f, "count({attribute} = {value}) {} {count}", op.symbol())
                }
            },
            LabelRule::And(rules) => {
                let parts: Vec<String> = rules.iter().map(wrap).collect();
                write!(f, "{}", parts.join(" and "))
            }
            LabelRule::Or(rules) => {
                let parts: Vec<String> = rules.iter().map(wrap).collect();
                write!(f, "{}", parts.join(" or "))
            }
            LabelRule::Not(rule) => write!(f, "!({})", rule),
        }
    }
}

fn wrap(rule: &LabelRule) -> String {
    match rule {
        LabelRule::And(_) | LabelRule::Or(_) => format!("({rule})"),
        other => other.to_string(),
    }
}

// ---------------------------------------------------------------------------
// Textual rule parser
// ---------------------------------------------------------------------------

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl FromStr for LabelRule {
    type Err = EventLogError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut parser = Parser { text, pos: 0 };
        let rule = parser.parse_or()?;
        parser.skip_ws();
        if parser.pos < parser.text.len() {
            return Err(parse_err(text, parser.pos, "trailing input"));
        }
        Ok(rule)
    }
}

fn parse_err(text: &str, pos: usize, msg: &str) -> EventLogError {
    EventLogError::Io(std::io::Error::new(
        std::io::ErrorKind::InvalidData,
        format!("label rule parse error at byte {pos} of {text:?}: {msg}"),
    ))
}

impl<'a> Parser<'a> {
    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.text.len() - trimmed.len();
    }

    /// Does the remaining input start with `word` as a standalone keyword?
    fn at_keyword(&self, word: &str) -> bool {
        let rest = self.rest();
        rest.len() >= word.len()
            && rest[..word.len()].eq_ignore_ascii_case(word)
            && rest[word.len()..]
                .chars()
                .next()
                .is_none_or(|c| !c.is_alphanumeric() && c != '_')
    }

    fn eat_keyword(&mut self, word: &str) -> bool {
        self.skip_ws();
        if self.at_keyword(word) {
            self.pos += word.len();
            true
        } else {
            false
        }
    }

    fn parse_or(&mut self) -> Result<LabelRule, EventLogError> {
        let mut parts = vec![self.parse_and()?];
        while self.eat_keyword("or") {
            parts.push(self.parse_and()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { LabelRule::Or(parts) })
    }

    fn parse_and(&mut self) -> Result<LabelRule, EventLogError> {
        let mut parts = vec![self.parse_unary()?];
        while self.eat_keyword("and") {
            parts.push(self.parse_unary()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { LabelRule::And(parts) })
    }

    fn parse_unary(&mut self) -> Result<LabelRule, EventLogError> {
        self.skip_ws();
        if self.rest().starts_with('!') {
            self.pos += 1;
            return Ok(LabelRule::negate(self.parse_unary()?));
        }
        if self.eat_keyword("not") {
            return Ok(LabelRule::negate(self.parse_unary()?));
        }
        if self.rest().starts_with('(') {
            self.pos += 1;
            let inner = self.parse_or()?;
            self.skip_ws();
            if !self.rest().starts_with(')') {
                return Err(parse_err(self.text, self.pos, "expected `)`"));
            }
            self.pos += 1;
            return Ok(inner);
        }
        self.parse_atom()
    }

    /// Grab the raw text of one atom: everything up to a top-level `and`,
    /// `or` or closing parenthesis.
    fn parse_atom(&mut self) -> Result<LabelRule, EventLogError> {
        self.skip_ws();
        let start = self.pos;
        let mut depth = 0usize;
        while self.pos < self.text.len() {
            if depth == 0 && (self.at_keyword("and") || self.at_keyword("or")) {
                break;
            }
            let c = self.rest().chars().next().unwrap();
            match c {
                '(' => depth += 1,
                ')' => {
                    if depth == 0 {
                        break;
                    }
                    depth -= 1;
                }
                _ => {}
            }
            self.pos += c.len_utf8();
        }
        let raw = self.text[start..self.pos].trim();
        if raw.is_empty() {
            return Err(parse_err(self.text, start, "expected an atom"));
        }
        parse_atom_text(raw).map_err(|msg| parse_err(self.text, start, &msg))
    }
}

fn parse_atom_text(raw: &str) -> Result<LabelRule, String> {
    // call-style atoms: template(...), position(...), count(...) [cmp int]
    if let Some(open) = raw.find('(') {
        let head = raw[..open].trim().to_lowercase().replace([' ', '-'], "_");
        let close = raw.rfind(')').ok_or("unbalanced parentheses")?;
        let args_text = &raw[open + 1..close];
        let tail = raw[close + 1..].trim();
        let args: Vec<&str> = args_text.split(',').map(str::trim).collect();

        match head.as_str() {
            "position" => {
                if !tail.is_empty() {
                    return Err(format!("unexpected trailing text {tail:?}"));
                }
                if args.len() != 2 {
                    return Err("position(i, activity) takes two arguments".into());
                }
                let position: usize =
                    args[0].parse().map_err(|_| format!("bad position {:?}", args[0]))?;
                if position == 0 {
                    return Err("positions are 1-based".into());
                }
                Ok(LabelRule::ActivityAt { position, activity: args[1].to_string() })
            }
            "count" => {
                let (op, count_text) =
                    split_cmp(tail).ok_or("count(...) needs a comparison, e.g. count(a) > 0")?;
                let count: i64 = count_text
                    .trim()
                    .parse()
                    .map_err(|_| format!("bad count {count_text:?}"))?;
                let target = if let Some((attr, val)) = args_text.split_once('=') {
                    CountTarget::EventAttribute {
                        attribute: attr.trim().to_string(),
                        value: Value::parse(val),
                    }
                } else {
                    CountTarget::Activity(args_text.trim().to_string())
                };
                Ok(LabelRule::CountCompare { target, op, count })
            }
            _ => {
                if !tail.is_empty() {
                    return Err(format!("unexpected trailing text {tail:?}"));
                }
                raw.parse::<DeclareConstraint>()
                    .map(LabelRule::Constraint)
                    .map_err(|e| e.to_string())
            }
        }
    } else {
        // attribute comparison: name op value
        let (op, pos, len) = find_cmp(raw).ok_or_else(|| format!("unrecognized atom {raw:?}"))?;
        let attribute = raw[..pos].trim().to_string();
        let value = Value::parse(raw[pos + len..].trim());
        if attribute.is_empty() {
            return Err("missing attribute name before comparison".into());
        }
        Ok(LabelRule::AttributeCompare { attribute, op, value })
    }
}

/// Split text like `>= 2` into the operator and the remainder.
fn split_cmp(text: &str) -> Option<(CmpOp, &str)> {
    let text = text.trim_start();
    let (op, len) = match_cmp(text)?;
    Some((op, &text[len..]))
}

fn find_cmp(raw: &str) -> Option<(CmpOp, usize, usize)> {
    let bytes = raw.as_bytes();
    for i in 0..bytes.len() {
        if let Some((op, len)) = match_cmp(&raw[i..]) {
            return Some((op, i, len));
        }
    }
    None
}

fn match_cmp(text: &str) -> Option<(CmpOp, usize)> {
    for (sym, op) in [
        ("!=", CmpOp::Ne),
        ("≠", CmpOp::Ne),
        ("<=", CmpOp::Le),
        ("≤", CmpOp::Le),
        (">=", CmpOp::Ge),
        ("≥", CmpOp::Ge),
        ("=", CmpOp::Eq),
        ("<", CmpOp::Lt),
        (">", CmpOp::Gt),
    ] {
        if text.starts_with(sym) {
            return Some((op, sym.len()));
        }
    }
    None
}
