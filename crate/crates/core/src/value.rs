use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use chrono::{Datelike, NaiveDate};
use ordered_float::OrderedFloat;

/// A tuple maps attribute names to values.
pub type Tuple = BTreeMap<String, Value>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ValueKind {
    Integer,
    Decimal,
    Text,
    Date,
}

impl ValueKind {
    pub fn name(self) -> &'static str {
        match self {
            ValueKind::Integer => "integer",
            ValueKind::Decimal => "decimal",
            ValueKind::Text => "text",
            ValueKind::Date => "date",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "integer" | "int" => Some(ValueKind::Integer),
            "decimal" => Some(ValueKind::Decimal),
            "text" => Some(ValueKind::Text),
            "date" => Some(ValueKind::Date),
            _ => None,
        }
    }

    /// Integers and dates have successors, so open bounds can be closed.
    pub fn is_discrete(self) -> bool {
        matches!(self, ValueKind::Integer | ValueKind::Date)
    }
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A domain value. Ordering is only meaningful between values of one kind.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Integer(i64),
    Decimal(OrderedFloat<f64>),
    Text(String),
    Date(NaiveDate),
}

pub const DATE_FORMAT: &str = "%Y-%m-%d";

impl Value {
    pub fn kind(&self) -> ValueKind {
        match self {
            Value::Integer(_) => ValueKind::Integer,
            Value::Decimal(_) => ValueKind::Decimal,
            Value::Text(_) => ValueKind::Text,
            Value::Date(_) => ValueKind::Date,
        }
    }

    pub fn decimal(v: f64) -> Self {
        Value::Decimal(OrderedFloat(v))
    }

    pub fn text(s: impl Into<String>) -> Self {
        Value::Text(s.into())
    }

    /// Panics on an invalid calendar date; meant for literals in code and tests.
    pub fn date(year: i32, month: u32, day: u32) -> Self {
        Value::Date(NaiveDate::from_ymd_opt(year, month, day).expect("valid date"))
    }

    /// Parses a raw (unquoted) cell or literal as the given kind.
    pub fn parse(kind: ValueKind, raw: &str) -> Option<Self> {
        match kind {
            ValueKind::Integer => raw.trim().parse().ok().map(Value::Integer),
            ValueKind::Decimal => raw
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(Value::decimal),
            ValueKind::Text => Some(Value::Text(raw.to_string())),
            ValueKind::Date => NaiveDate::parse_from_str(raw.trim(), DATE_FORMAT)
                .ok()
                .map(Value::Date),
        }
    }

    /// Same-kind comparison; `None` across kinds.
    pub fn compare(&self, other: &Value) -> Option<Ordering> {
        if self.kind() == other.kind() {
            Some(self.cmp(other))
        } else {
            None
        }
    }

    pub fn successor(&self) -> Option<Value> {
        match self {
            Value::Integer(v) => v.checked_add(1).map(Value::Integer),
            Value::Date(d) => d.succ_opt().map(Value::Date),
            _ => None,
        }
    }

    pub fn predecessor(&self) -> Option<Value> {
        match self {
            Value::Integer(v) => v.checked_sub(1).map(Value::Integer),
            Value::Date(d) => d.pred_opt().map(Value::Date),
            _ => None,
        }
    }

    /// Renders the value as a literal of the query language.
    pub fn to_literal(&self) -> String {
        match self {
            Value::Integer(_) | Value::Decimal(_) => self.to_string(),
            Value::Text(s) => format!("'{}'", s.replace('\'', "''")),
            Value::Date(_) => format!("'{self}'"),
        }
    }

    pub(crate) fn date_days(d: &NaiveDate) -> i32 {
        d.num_days_from_ce()
    }

    pub(crate) fn date_from_days(days: i32) -> Option<NaiveDate> {
        NaiveDate::from_num_days_from_ce_opt(days)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Integer(v) => write!(f, "{v}"),
            Value::Decimal(v) => {
                let shown = v.into_inner().to_string();
                if shown.contains('.') {
                    f.write_str(&shown)
                } else {
                    write!(f, "{shown}.0")
                }
            }
            Value::Text(s) => f.write_str(s),
            Value::Date(d) => write!(f, "{}", d.format(DATE_FORMAT)),
        }
    }
}
