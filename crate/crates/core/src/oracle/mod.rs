//! Row-at-a-time reference engine over decoded values.
//!
//! Nothing here touches the columnar machinery: no key buffers, no hashing,
//! no dictionaries, no parallelism. Grouping uses an ordered map from value
//! tuples, joins are nested loops and sorting is a stable comparison sort.
//! Float aggregates accumulate in logical row order, the same order the
//! engine uses, so results compare bit for bit.

mod interp;
mod ops;
pub mod trials;

use std::fmt;

use sha2::{Digest, Sha256};

pub use interp::{naive_compute, naive_filter, naive_like};
pub use ops::{
    naive_anti_join, naive_concat, naive_groupby, naive_join, naive_limit, naive_select,
    naive_semi_join, naive_sort,
};

use crate::error::Result;
use crate::frame::{Frame, FrameBuilder};
use crate::value::{LogicalDtype, Value};

/// Decoded column type; strings carry no encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlainType {
    Int,
    Float,
    Date,
    Str,
}

impl PlainType {
    pub fn of(dtype: LogicalDtype) -> Self {
        match dtype {
            LogicalDtype::Int64 => PlainType::Int,
            LogicalDtype::Float64 => PlainType::Float,
            LogicalDtype::Date => PlainType::Date,
            LogicalDtype::DictCode | LogicalDtype::RawString => PlainType::Str,
        }
    }

    /// The dtype an unencoded column of this type gets.
    pub fn dtype(self) -> LogicalDtype {
        match self {
            PlainType::Int => LogicalDtype::Int64,
            PlainType::Float => LogicalDtype::Float64,
            PlainType::Date => LogicalDtype::Date,
            PlainType::Str => LogicalDtype::RawString,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlainTable {
    pub names: Vec<String>,
    pub types: Vec<PlainType>,
    pub rows: Vec<Vec<Value>>,
}

impl PlainTable {
    pub fn new(names: Vec<String>, types: Vec<PlainType>) -> Self {
        Self {
            names,
            types,
            rows: Vec::new(),
        }
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn position(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| crate::Error::Name(name.to_owned()))
    }

    pub fn column(&self, name: &str) -> Result<Vec<&Value>> {
        let j = self.position(name)?;
        Ok(self.rows.iter().map(|r| &r[j]).collect())
    }
}

impl fmt::Display for PlainTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.names.join(" | "))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Value::to_string).collect();
            writeln!(f, "{}", cells.join(" | "))?;
        }
        Ok(())
    }
}

/// Decodes the logical view of `f`.
pub fn to_plain(f: &Frame) -> PlainTable {
    PlainTable {
        names: f.names().to_vec(),
        types: f.metas().iter().map(|m| PlainType::of(m.dtype)).collect(),
        rows: (0..f.num_rows()).map(|i| f.row_values(i)).collect(),
    }
}

/// Builds a frame, placing string columns by cardinality.
pub fn from_plain(t: &PlainTable, threshold: f64) -> Result<Frame> {
    let mut b = FrameBuilder::with_rows(t.num_rows());
    for (j, (name, ty)) in t.names.iter().zip(&t.types).enumerate() {
        let col = t.rows.iter().map(|r| &r[j]);
        b = match ty {
            PlainType::Int => b.int64(name, col.map(int_of).collect())?,
            PlainType::Date => b.date(name, col.map(int_of).collect())?,
            PlainType::Float => b.float64(
                name,
                col.map(|v| match v {
                    Value::Float(x) => *x,
                    other => panic!("non-float {other:?} in float column {name}"),
                })
                .collect(),
            )?,
            PlainType::Str => {
                let strs: Vec<&str> = col.map(|v| v.as_str().expect("string column")).collect();
                b.strings(name, strs.iter().copied(), threshold)?
            }
        };
    }
    b.build()
}

fn int_of(v: &Value) -> i64 {
    match v {
        Value::Int(x) | Value::Date(x) => *x,
        other => panic!("non-integral {other:?} in integral column"),
    }
}

/// Hex SHA-256 over a canonical serialization of names, types and rows.
pub fn content_hash(t: &PlainTable) -> String {
    let mut h = Sha256::new();
    let put_str = |h: &mut Sha256, s: &str| {
        h.update((s.len() as u64).to_le_bytes());
        h.update(s.as_bytes());
    };
    h.update((t.names.len() as u64).to_le_bytes());
    for (name, ty) in t.names.iter().zip(&t.types) {
        put_str(&mut h, name);
        h.update([*ty as u8]);
    }
    h.update((t.rows.len() as u64).to_le_bytes());
    for row in &t.rows {
        for v in row {
            match v {
                Value::Int(x) => {
                    h.update([0]);
                    h.update(x.to_le_bytes());
                }
                Value::Float(x) => {
                    h.update([1]);
                    h.update(x.to_bits().to_le_bytes());
                }
                Value::Date(x) => {
                    h.update([2]);
                    h.update(x.to_le_bytes());
                }
                Value::Str(s) => {
                    h.update([3]);
                    put_str(&mut h, s);
                }
            }
        }
    }
    format!("{:x}", h.finalize())
}
