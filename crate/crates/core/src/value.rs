//! Attribute and feature values.
//!
//! Everything an event log or an encoded dataset stores in a cell is a
//! [`Value`]. The distinguished [`Value::Unknown`] stands in for missing
//! data wherever it occurs: empty CSV cells, attributes absent from an
//! event, or out-of-vocabulary values seen only at prediction time.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

/// A typed attribute or feature value.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Value {
    /// Missing or out-of-vocabulary data.
    Unknown,
    Bool(bool),
    Int(i64),
    Real(f64),
    Str(String),
}

/// The type of an attribute, fixed by its first observed value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ValueKind {
    Bool,
    Int,
    Real,
    Str,
}

impl Value {
    /// Parse a raw text cell. Empty text means [`Value::Unknown`]; otherwise
    /// integer, real and boolean literals are recognized before falling back
    /// to a string.
    pub fn parse(cell: &str) -> Value {
        let cell = cell.trim();
        if cell.is_empty() || cell == "unknown" {
            return Value::Unknown;
        }
        if let Ok(i) = cell.parse::<i64>() {
            return Value::Int(i);
        }
        if looks_numeric(cell) {
            if let Ok(r) = cell.parse::<f64>() {
                return Value::Real(r);
            }
        }
        match cell {
            "true" => Value::Bool(true),
            "false" => Value::Bool(false),
            _ => Value::Str(cell.to_string()),
        }
    }

    /// Parse a cell under an already established kind. `None` signals a type
    /// conflict with the attribute's earlier values.
    pub fn parse_as(kind: ValueKind, cell: &str) -> Option<Value> {
        let cell = cell.trim();
        if cell.is_empty() || cell == "unknown" {
            return Some(Value::Unknown);
        }
        match kind {
            ValueKind::Int => cell.parse::<i64>().ok().map(Value::Int),
            ValueKind::Real => {
                if looks_numeric(cell) {
                    cell.parse::<f64>().ok().map(Value::Real)
                } else {
                    None
                }
            }
            ValueKind::Bool => match cell {
                "true" => Some(Value::Bool(true)),
                "false" => Some(Value::Bool(false)),
                _ => None,
            },
            ValueKind::Str => Some(Value::Str(cell.to_string())),
        }
    }

    pub fn kind(&self) -> Option<ValueKind> {
        match self {
            Value::Unknown => None,
            Value::Bool(_) => Some(ValueKind::Bool),
            Value::Int(_) => Some(ValueKind::Int),
            Value::Real(_) => Some(ValueKind::Real),
            Value::Str(_) => Some(ValueKind::Str),
        }
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Value::Unknown)
    }

    /// Numeric view used by threshold splits. Booleans and strings have no
    /// numeric interpretation.
    pub fn as_numeric(&self) -> Option<f64> {
        match self {
            Value::Int(i) => Some(*i as f64),
            Value::Real(r) => Some(*r),
            _ => None,
        }
    }
}

fn looks_numeric(cell: &str) -> bool {
    let rest = cell.strip_prefix(['-', '+']).unwrap_or(cell);
    !rest.is_empty() && rest.chars().all(|c| c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' || c == '-' || c == '+')
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Unknown => write!(f, "unknown"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            // A trailing ".0" keeps whole reals distinguishable from ints
            // on the way back in.
            Value::Real(r) if r.fract() == 0.0 && r.is_finite() => write!(f, "{r:.1}"),
            Value::Real(r) => write!(f, "{r}"),
            Value::Str(s) => write!(f, "{s}"),
        }
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::Unknown, Value::Unknown) => true,
            (Value::Bool(a), Value::Bool(b)) => a == b,
            (Value::Int(a), Value::Int(b)) => a == b,
            (Value::Real(a), Value::Real(b)) => a.to_bits() == b.to_bits(),
            (Value::Str(a), Value::Str(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Value {}

impl Hash for Value {
    fn hash<H: Hasher>(&self, state: &mut H) {
        core::mem::discriminant(self).hash(state);
        match self {
            Value::Unknown => {}
            Value::Bool(b) => b.hash(state),
            Value::Int(i) => i.hash(state),
            Value::Real(r) => r.to_bits().hash(state),
            Value::Str(s) => s.hash(state),
        }
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        fn rank(v: &Value) -> u8 {
            match v {
                Value::Unknown => 0,
                Value::Bool(_) => 1,
                Value::Int(_) => 2,
                Value::Real(_) => 3,
                Value::Str(_) => 4,
            }
        }
        match (self, other) {
            (Value::Bool(a), Value::Bool(b)) => a.cmp(b),
            (Value::Int(a), Value::Int(b)) => a.cmp(b),
            (Value::Real(a), Value::Real(b)) => a.total_cmp(b),
            (Value::Str(a), Value::Str(b)) => a.cmp(b),
            (a, b) => rank(a).cmp(&rank(b)),
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Str(s.to_string())
    }
}

impl From<i64> for Value {
    fn from(i: i64) -> Self {
        Value::Int(i)
    }
}

/// Compare two values the way a labeling rule does: numerically across
/// `Int`/`Real`, lexicographically for strings, exact otherwise. `None`
/// means the pair is not order-comparable.
pub fn compare_values(a: &Value, b: &Value) -> Option<Ordering> {
    match (a, b) {
        (Value::Unknown, Value::Unknown) => Some(Ordering::Equal),
        (Value::Unknown, _) | (_, Value::Unknown) => None,
        (Value::Int(_) | Value::Real(_), Value::Int(_) | Value::Real(_)) => {
            Some(a.as_numeric()?.total_cmp(&b.as_numeric()?))
        }
        (Value::Str(x), Value::Str(y)) => Some(x.cmp(y)),
        (Value::Bool(x), Value::Bool(y)) => Some(x.cmp(y)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_recognizes_types() {
        assert_eq!(Value::parse("33"), Value::Int(33));
        assert_eq!(Value::parse("33.5"), Value::Real(33.5));
        assert_eq!(Value::parse("true"), Value::Bool(true));
        assert_eq!(Value::parse("financial"), Value::Str("financial".into()));
        assert_eq!(Value::parse(""), Value::Unknown);
        assert_eq!(Value::parse("unknown"), Value::Unknown);
    }

    #[test]
    fn display_round_trips_whole_reals() {
        let v = Value::Real(33.0);
        assert_eq!(v.to_string(), "33.0");
        assert_eq!(Value::parse(&v.to_string()), v);
    }

    #[test]
    fn parse_as_enforces_kind() {
        assert_eq!(Value::parse_as(ValueKind::Int, "07"), Some(Value::Int(7)));
        assert_eq!(Value::parse_as(ValueKind::Int, "7.5"), None);
        assert_eq!(Value::parse_as(ValueKind::Real, "7"), Some(Value::Real(7.0)));
        assert_eq!(Value::parse_as(ValueKind::Str, "7"), Some(Value::Str("7".into())));
        assert_eq!(Value::parse_as(ValueKind::Bool, "maybe"), None);
    }

    #[test]
    fn cross_kind_comparison() {
        use std::cmp::Ordering::*;
        assert_eq!(compare_values(&Value::Int(3), &Value::Real(3.5)), Some(Less));
        assert_eq!(compare_values(&Value::Str("a".into()), &Value::Str("b".into())), Some(Less));
        assert_eq!(compare_values(&Value::Unknown, &Value::Int(1)), None);
    }
}
