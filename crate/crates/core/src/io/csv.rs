//! Delimited text ingestion. The dialect is dbgen's: one record per line, a
//! single-byte delimiter, an optional trailing delimiter and no quoting.
//!
//! Schemas live in a sidecar text file, one `name type` pair per line in
//! column order, with `i64`, `f64`, `date` or `str` as the type. Lines
//! starting with `#` are comments; `@delimiter C` and `@threshold R` override
//! the defaults.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::encoding::{analyze_cardinality, DEFAULT_THRESHOLD};
use crate::error::{Error, Result};
use crate::frame::{ColumnData, Frame, FrameBuilder};
use crate::io::mfb::{write_mfb, MfbDirectory};
use crate::value::{format_date, parse_date, LogicalDtype};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsvType {
    I64,
    F64,
    Date,
    Str,
}

impl CsvType {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "i64" => CsvType::I64,
            "f64" => CsvType::F64,
            "date" => CsvType::Date,
            "str" => CsvType::Str,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CsvType::I64 => "i64",
            CsvType::F64 => "f64",
            CsvType::Date => "date",
            CsvType::Str => "str",
        }
    }

    pub fn of_dtype(dtype: LogicalDtype) -> Self {
        match dtype {
            LogicalDtype::Int64 => CsvType::I64,
            LogicalDtype::Float64 => CsvType::F64,
            LogicalDtype::Date => CsvType::Date,
            LogicalDtype::DictCode | LogicalDtype::RawString => CsvType::Str,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvSchema {
    pub columns: Vec<(String, CsvType)>,
    pub delimiter: u8,
    pub threshold: f64,
}

impl CsvSchema {
    pub fn new(columns: Vec<(String, CsvType)>) -> Result<Self> {
        let schema = Self {
            columns,
            delimiter: b'|',
            threshold: DEFAULT_THRESHOLD,
        };
        schema.validate()?;
        Ok(schema)
    }

    fn validate(&self) -> Result<()> {
        for (i, (name, _)) in self.columns.iter().enumerate() {
            if self.columns[..i].iter().any(|(n, _)| n == name) {
                return Err(Error::DuplicateName(name.clone()));
            }
        }
        if matches!(self.delimiter, b'\n' | b'\r') {
            return Err(Error::Schema("delimiter must not be a line break".into()));
        }
        Ok(())
    }

    /// Schema matching the logical dtypes of `f`.
    pub fn for_frame(f: &Frame) -> Self {
        Self {
            columns: f
                .names()
                .iter()
                .zip(f.metas())
                .map(|(n, m)| (n.clone(), CsvType::of_dtype(m.dtype)))
                .collect(),
            delimiter: b'|',
            threshold: DEFAULT_THRESHOLD,
        }
    }

    pub fn parse_sidecar(text: &str) -> Result<Self> {
        let mut columns = Vec::new();
        let mut delimiter = b'|';
        let mut threshold = DEFAULT_THRESHOLD;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: String| Error::Schema(format!("line {}: {msg}", i + 1));
            let mut parts = line.split_whitespace();
            let (Some(key), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(bad(format!("expected two fields, got {line:?}")));
            };
            match key {
                "@delimiter" => match value.as_bytes() {
                    [b] => delimiter = *b,
                    _ => return Err(bad(format!("delimiter must be one byte: {value:?}"))),
                },
                "@threshold" => {
                    threshold = value
                        .parse()
                        .map_err(|_| bad(format!("bad threshold {value:?}")))?;
                }
                name => {
                    let ty = CsvType::parse(value)
                        .ok_or_else(|| bad(format!("unknown type {value:?}")))?;
                    columns.push((name.to_owned(), ty));
                }
            }
        }
        let schema = Self {
            columns,
            delimiter,
            threshold,
        };
        schema.validate()?;
        Ok(schema)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_sidecar(&text)
    }

    pub fn to_sidecar(&self) -> String {
        let mut out = String::new();
        if self.delimiter != b'|' {
            let _ = writeln!(out, "@delimiter {}", self.delimiter as char);
        }
        if self.threshold != DEFAULT_THRESHOLD {
            let _ = writeln!(out, "@threshold {}", self.threshold);
        }
        for (name, ty) in &self.columns {
            let _ = writeln!(out, "{name} {}", ty.as_str());
        }
        out
    }
}

enum Parsed {
    Words(Vec<u64>),
    Strings(Vec<String>),
}

/// Parses a delimited file into a frame, placing string columns by
/// cardinality.
pub fn read_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Frame> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter)
        .has_headers(false)
        .quoting(false)
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::io(path, std::io::Error::other(e)))?;
    let width = schema.columns.len();
    let mut cols: Vec<Parsed> = schema
        .columns
        .iter()
        .map(|(_, ty)| match ty {
            CsvType::Str => Parsed::Strings(Vec::new()),
            _ => Parsed::Words(Vec::new()),
        })
        .collect();
    let mut record = csv::ByteRecord::new();
    loop {
        let more = reader.read_byte_record(&mut record).map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::Parse {
                line,
                column: 0,
                msg: e.to_string(),
            }
        })?;
        if !more {
            break;
        }
        let line = record.position().map_or(0, |p| p.line() as usize);
        let mut n_fields = record.len();
        if n_fields == width + 1 && record[width].is_empty() {
            n_fields = width;
        }
        if n_fields != width {
            return Err(Error::Parse {
                line,
                column: n_fields.min(width) + 1,
                msg: format!("expected {width} fields, found {n_fields}"),
            });
        }
        for (j, ((_, ty), out)) in schema.columns.iter().zip(&mut cols).enumerate() {
            let err = |msg: String| Error::Parse {
                line,
                column: j + 1,
                msg,
            };
            let field = std::str::from_utf8(&record[j]).map_err(|_| err("invalid UTF-8".into()))?;
            match (ty, out) {
                (CsvType::Str, Parsed::Strings(v)) => v.push(field.to_owned()),
                (CsvType::I64, Parsed::Words(v)) => v.push(
                    field
                        .trim()
                        .parse::<i64>()
                        .map_err(|e| err(format!("{field:?}: {e}")))? as u64,
                ),
                (CsvType::F64, Parsed::Words(v)) => v.push(
                    field
                        .trim()
                        .parse::<f64>()
                        .map_err(|e| err(format!("{field:?}: {e}")))?
                        .to_bits(),
                ),
                (CsvType::Date, Parsed::Words(v)) => {
                    v.push(parse_date(field.trim()).map_err(|e| err(e.to_string()))? as u64)
                }
                _ => unreachable!("column buffers follow the schema"),
            }
        }
    }

    let mut b = FrameBuilder::new();
    for ((name, ty), col) in schema.columns.iter().zip(cols) {
        b = match (ty, col) {
            (CsvType::Str, Parsed::Strings(v)) => {
                b.strings(name, v.iter().map(String::as_str), schema.threshold)?
            }
            (CsvType::I64, Parsed::Words(v)) => b.cells(name, LogicalDtype::Int64, v)?,
            (CsvType::F64, Parsed::Words(v)) => b.cells(name, LogicalDtype::Float64, v)?,
            (CsvType::Date, Parsed::Words(v)) => b.cells(name, LogicalDtype::Date, v)?,
            _ => unreachable!("column buffers follow the schema"),
        };
    }
    b.build()
}

/// Writes the logical rows of `f` in the dialect `read_csv` accepts.
pub fn write_csv(f: &Frame, path: impl AsRef<Path>, delimiter: u8) -> Result<()> {
    let path = path.as_ref();
    let io = |e| Error::io(path, e);
    let mut w = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    let views: Vec<_> = (0..f.num_columns()).map(|j| f.view_at(j)).collect();
    let mut line = String::new();
    for &r in f.rows() {
        line.clear();
        for (j, v) in views.iter().enumerate() {
            if j > 0 {
                line.push(delimiter as char);
            }
            match (v.dtype, &v.data) {
                (LogicalDtype::Int64, ColumnData::Cells(c)) => {
                    let _ = write!(line, "{}", c[r] as i64);
                }
                (LogicalDtype::Float64, ColumnData::Cells(c)) => {
                    let _ = write!(line, "{:?}", f64::from_bits(c[r]));
                }
                (LogicalDtype::Date, ColumnData::Cells(c)) => {
                    line.push_str(&format_date(c[r] as i64))
                }
                _ => line.push_str(v.str_at(r).expect("string column")),
            }
        }
        line.push('\n');
        w.write_all(line.as_bytes()).map_err(io)?;
    }
    w.flush().map_err(io)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnConversion {
    pub name: String,
    pub dtype: LogicalDtype,
    /// Distinct values and ratio, for string columns.
    pub n_distinct: Option<usize>,
    pub ratio: Option<f64>,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConversionReport {
    pub n_rows: usize,
    pub columns: Vec<ColumnConversion>,
}

pub fn csv_to_mfb(
    csv_path: impl AsRef<Path>,
    schema: &CsvSchema,
    out_path: impl AsRef<Path>,
) -> Result<ConversionReport> {
    let f = read_csv(csv_path, schema)?;
    let dir: MfbDirectory = write_mfb(&f, out_path)?;
    let columns = dir
        .columns
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let card = c.dtype.is_string().then(|| {
                let v = f.view_at(j);
                analyze_cardinality(
                    f.rows().iter().map(|&r| v.str_at(r).expect("string")),
                    schema.threshold,
                )
            });
            ColumnConversion {
                name: c.name.clone(),
                dtype: c.dtype,
                n_distinct: card.as_ref().map(|r| r.n_distinct),
                ratio: card.as_ref().map(|r| r.ratio),
                bytes: c.payload_bytes(),
            }
        })
        .collect();
    Ok(ConversionReport {
        n_rows: f.num_rows(),
        columns,
    })
}
