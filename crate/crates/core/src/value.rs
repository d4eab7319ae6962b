//! Logical types and decoded cell values.

use std::cmp::Ordering;
use std::fmt;

use chrono::{Datelike, NaiveDate};

use crate::error::{Error, Result};

/// Interpretation of a column's cells.
///
/// Everything except `RawString` lives in the numeric block as one 64-bit
/// word per row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LogicalDtype {
    Int64,
    Float64,
    /// Days since 1970-01-01 (proleptic Gregorian), signed.
    Date,
    /// Index into the column's dictionary.
    DictCode,
    RawString,
}

impl LogicalDtype {
    pub fn is_string(self) -> bool {
        matches!(self, LogicalDtype::DictCode | LogicalDtype::RawString)
    }

    pub fn in_block(self) -> bool {
        self != LogicalDtype::RawString
    }
}

/// One decoded cell.
#[derive(Debug, Clone)]
pub enum Value {
    Int(i64),
    Float(f64),
    Date(i64),
    Str(String),
}

impl Value {
    fn tag(&self) -> u8 {
        match self {
            Value::Int(_) => 0,
            Value::Float(_) => 1,
            Value::Date(_) => 2,
            Value::Str(_) => 3,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Float(v) => Some(*v),
            Value::Int(v) | Value::Date(v) => Some(*v as f64),
            Value::Str(_) => None,
        }
    }
}

/// Total order: floats by `total_cmp`, strings bytewise, and variants by tag.
/// Equality under this order is bit equality for floats, which is what the
/// grouping and join keys use.
impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) | (Value::Date(a), Value::Date(b)) => a.cmp(b),
            (Value::Float(a), Value::Float(b)) => a.total_cmp(b),
            (Value::Str(a), Value::Str(b)) => a.as_bytes().cmp(b.as_bytes()),
            _ => self.tag().cmp(&other.tag()),
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Value {}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Float(v) => write!(f, "{v}"),
            Value::Date(d) => f.write_str(&format_date(*d)),
            Value::Str(s) => f.write_str(s),
        }
    }
}

fn epoch() -> NaiveDate {
    NaiveDate::from_ymd_opt(1970, 1, 1).expect("valid epoch")
}

/// Parses `yyyy-mm-dd` into days since the epoch.
pub fn parse_date(s: &str) -> Result<i64> {
    let date = NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .map_err(|e| Error::Expr(format!("invalid date {s:?}: {e}")))?;
    Ok(date.signed_duration_since(epoch()).num_days())
}

pub fn date_from_days(days: i64) -> Option<NaiveDate> {
    epoch().checked_add_signed(chrono::TimeDelta::try_days(days)?)
}

pub fn format_date(days: i64) -> String {
    match date_from_days(days) {
        Some(d) => d.format("%Y-%m-%d").to_string(),
        None => format!("<date {days}>"),
    }
}

/// Calendar year of a day number; out-of-range days map to `i64::MIN`.
pub fn year_of(days: i64) -> i64 {
    date_from_days(days).map_or(i64::MIN, |d| d.year() as i64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dates_round_trip() {
        assert_eq!(parse_date("1970-01-01").unwrap(), 0);
        assert_eq!(parse_date("1969-12-31").unwrap(), -1);
        // 1994-01-01: 24 years incl. 6 leap days (72,76,80,84,88,92).
        assert_eq!(parse_date("1994-01-01").unwrap(), 24 * 365 + 6);
        assert_eq!(format_date(parse_date("1998-12-01").unwrap()), "1998-12-01");
        assert_eq!(year_of(parse_date("1995-06-17").unwrap()), 1995);
        assert!(parse_date("1995-13-01").is_err());
    }

    #[test]
    fn float_equality_is_bitwise() {
        assert_ne!(Value::Float(0.0), Value::Float(-0.0));
        assert_eq!(Value::Float(f64::NAN), Value::Float(f64::NAN));
        assert!(Value::Int(3) < Value::Float(-1.0));
    }
}
