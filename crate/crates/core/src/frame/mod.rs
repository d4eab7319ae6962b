//! Hybrid physical layout: a column-major block of 64-bit cells for numeric
//! and dictionary-coded columns, string pools for offloaded columns, and
//! row/column indexers that define the logical view over both.

mod footprint;
mod ops;
mod pool;

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

pub use footprint::{ColumnFootprint, FootprintReport};
pub use ops::SortKey;
pub use pool::StringPool;

use crate::encoding::{analyze_cardinality, dict_encode, Cardinality, Dictionary};
use crate::error::{Error, Result};
use crate::value::{LogicalDtype, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StorageKind {
    Block,
    Pool,
}

/// Physical home of one logical column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Slot {
    pub kind: StorageKind,
    pub index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ColumnMeta {
    pub dtype: LogicalDtype,
    pub slot: Slot,
    /// Set for `DictCode` columns only.
    pub dict: Option<usize>,
}

/// Column-major 64-bit cells; every column has exactly `n_rows` cells.
#[derive(Debug, Clone, Default)]
pub struct NumericBlock {
    n_rows: usize,
    columns: Vec<Arc<Vec<u64>>>,
}

impl NumericBlock {
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, i: usize) -> &[u64] {
        &self.columns[i]
    }
}

/// Physical row ids in logical order. No duplicates.
#[derive(Debug, Clone)]
pub struct RowIndexer {
    rows: Arc<Vec<usize>>,
}

impl RowIndexer {
    pub fn identity(n: usize) -> Self {
        Self {
            rows: Arc::new((0..n).collect()),
        }
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Logical column order as physical slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnIndexer {
    pub order: Vec<Slot>,
}

/// Borrowed physical data of one column.
#[derive(Debug, Clone, Copy)]
pub enum ColumnData<'a> {
    Cells(&'a [u64]),
    Pool(&'a StringPool),
}

#[derive(Debug, Clone, Copy)]
pub struct ColumnView<'a> {
    pub dtype: LogicalDtype,
    pub data: ColumnData<'a>,
    pub dict: Option<&'a Dictionary>,
}

impl<'a> ColumnView<'a> {
    pub fn cells(&self) -> Option<&'a [u64]> {
        match self.data {
            ColumnData::Cells(c) => Some(c),
            ColumnData::Pool(_) => None,
        }
    }

    /// Decoded string at physical row `phys`, for string-typed columns.
    pub fn str_at(&self, phys: usize) -> Option<&'a str> {
        match (self.data, self.dict) {
            (ColumnData::Pool(p), _) => Some(p.get(phys)),
            (ColumnData::Cells(c), Some(d)) => d.value(c[phys]).ok(),
            _ => None,
        }
    }

    pub fn value_at(&self, phys: usize) -> Value {
        match self.dtype {
            LogicalDtype::Int64 => Value::Int(self.cells().unwrap()[phys] as i64),
            LogicalDtype::Float64 => Value::Float(f64::from_bits(self.cells().unwrap()[phys])),
            LogicalDtype::Date => Value::Date(self.cells().unwrap()[phys] as i64),
            LogicalDtype::DictCode | LogicalDtype::RawString => {
                Value::Str(self.str_at(phys).unwrap_or_default().to_owned())
            }
        }
    }
}

/// Immutable logical table. Cloning is cheap: storage is shared.
#[derive(Clone)]
pub struct Frame {
    names: Vec<String>,
    metas: Vec<ColumnMeta>,
    block: NumericBlock,
    pools: Vec<Arc<StringPool>>,
    dicts: Vec<Arc<Dictionary>>,
    row_idx: RowIndexer,
}

impl Frame {
    pub fn empty() -> Self {
        FrameBuilder::with_rows(0).build().expect("empty frame")
    }

    pub fn num_rows(&self) -> usize {
        self.row_idx.len()
    }

    pub fn num_columns(&self) -> usize {
        self.names.len()
    }

    pub fn physical_rows(&self) -> usize {
        self.block.n_rows
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn metas(&self) -> &[ColumnMeta] {
        &self.metas
    }

    pub fn block(&self) -> &NumericBlock {
        &self.block
    }

    pub fn pools(&self) -> impl Iterator<Item = &StringPool> {
        self.pools.iter().map(|p| &**p)
    }

    pub fn dicts(&self) -> impl Iterator<Item = &Dictionary> {
        self.dicts.iter().map(|d| &**d)
    }

    pub fn row_indexer(&self) -> &RowIndexer {
        &self.row_idx
    }

    /// Physical row ids in logical order.
    pub fn rows(&self) -> &[usize] {
        self.row_idx.rows()
    }

    pub fn column_indexer(&self) -> ColumnIndexer {
        ColumnIndexer {
            order: self.metas.iter().map(|m| m.slot).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.num_rows() == self.physical_rows()
            && self.rows().iter().enumerate().all(|(i, &r)| i == r)
    }

    pub fn position(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::Name(name.to_owned()))
    }

    pub fn dtype(&self, name: &str) -> Result<LogicalDtype> {
        Ok(self.metas[self.position(name)?].dtype)
    }

    pub fn view_at(&self, j: usize) -> ColumnView<'_> {
        let meta = &self.metas[j];
        let data = match meta.slot.kind {
            StorageKind::Block => ColumnData::Cells(self.block.column(meta.slot.index)),
            StorageKind::Pool => ColumnData::Pool(&self.pools[meta.slot.index]),
        };
        ColumnView {
            dtype: meta.dtype,
            data,
            dict: meta.dict.map(|d| &*self.dicts[d]),
        }
    }

    pub fn column(&self, name: &str) -> Result<ColumnView<'_>> {
        Ok(self.view_at(self.position(name)?))
    }

    pub(crate) fn dict_arc(&self, j: usize) -> Option<Arc<Dictionary>> {
        self.metas[j].dict.map(|d| Arc::clone(&self.dicts[d]))
    }

    /// Decoded value of logical cell `(row, col)`.
    pub fn value(&self, row: usize, col: usize) -> Value {
        self.view_at(col).value_at(self.rows()[row])
    }

    /// Decoded logical row.
    pub fn row_values(&self, row: usize) -> Vec<Value> {
        (0..self.num_columns())
            .map(|j| self.value(row, j))
            .collect()
    }

    pub(crate) fn with_rows(&self, rows: Vec<usize>) -> Frame {
        Frame {
            row_idx: RowIndexer {
                rows: Arc::new(rows),
            },
            ..self.clone()
        }
    }

    /// Appends a block column holding `cells` in physical row order.
    pub fn with_block_column(
        &self,
        name: &str,
        dtype: LogicalDtype,
        cells: Vec<u64>,
        dict: Option<Arc<Dictionary>>,
    ) -> Result<Frame> {
        if self.names.iter().any(|n| n == name) {
            return Err(Error::DuplicateName(name.to_owned()));
        }
        if cells.len() != self.physical_rows() {
            return Err(Error::Length {
                column: name.to_owned(),
                expected: self.physical_rows(),
                actual: cells.len(),
            });
        }
        let mut out = self.clone();
        let dict = dict.map(|d| {
            out.dicts.push(d);
            out.dicts.len() - 1
        });
        out.block.columns.push(Arc::new(cells));
        out.names.push(name.to_owned());
        out.metas.push(ColumnMeta {
            dtype,
            slot: Slot {
                kind: StorageKind::Block,
                index: out.block.columns.len() - 1,
            },
            dict,
        });
        Ok(out)
    }

    /// Renames columns in order; `names` must cover every column.
    pub fn rename(&self, names: &[&str]) -> Result<Frame> {
        if names.len() != self.num_columns() {
            return Err(Error::Schema(format!(
                "rename needs {} names, got {}",
                self.num_columns(),
                names.len()
            )));
        }
        check_unique(names.iter().copied())?;
        Ok(Frame {
            names: names.iter().map(|s| s.to_string()).collect(),
            ..self.clone()
        })
    }

    /// Columns of `self` followed by those of `other`, both materialized with
    /// the same row count. `other_names` renames the appended columns.
    pub(crate) fn zip_columns(&self, other: &Frame, other_names: Vec<String>) -> Result<Frame> {
        debug_assert!(self.is_identity() && other.is_identity());
        debug_assert_eq!(self.physical_rows(), other.physical_rows());
        let mut out = self.clone();
        for (j, name) in other_names.into_iter().enumerate() {
            let meta = other.metas[j];
            let slot = match meta.slot.kind {
                StorageKind::Block => {
                    out.block
                        .columns
                        .push(Arc::clone(&other.block.columns[meta.slot.index]));
                    Slot {
                        kind: StorageKind::Block,
                        index: out.block.columns.len() - 1,
                    }
                }
                StorageKind::Pool => {
                    out.pools.push(Arc::clone(&other.pools[meta.slot.index]));
                    Slot {
                        kind: StorageKind::Pool,
                        index: out.pools.len() - 1,
                    }
                }
            };
            let dict = other.dict_arc(j).map(|d| {
                out.dicts.push(d);
                out.dicts.len() - 1
            });
            out.names.push(name);
            out.metas.push(ColumnMeta {
                dtype: meta.dtype,
                slot,
                dict,
            });
        }
        check_unique(out.names.iter().map(String::as_str))?;
        Ok(out)
    }
}

fn check_unique<'a>(names: impl IntoIterator<Item = &'a str>) -> Result<()> {
    let mut seen = HashSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(Error::DuplicateName(n.to_owned()));
        }
    }
    Ok(())
}

impl fmt::Debug for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Frame")
            .field("names", &self.names)
            .field("rows", &self.num_rows())
            .field("physical_rows", &self.physical_rows())
            .finish()
    }
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> = (0..self.num_rows())
            .map(|i| self.row_values(i).iter().map(ToString::to_string).collect())
            .collect();
        let widths: Vec<usize> = self
            .names
            .iter()
            .enumerate()
            .map(|(j, n)| {
                rows.iter()
                    .map(|r| r[j].len())
                    .max()
                    .unwrap_or(0)
                    .max(n.len())
            })
            .collect();
        let line = |cells: Vec<&str>| -> String {
            cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect::<Vec<_>>()
                .join(" | ")
        };
        writeln!(
            f,
            "{}",
            line(self.names.iter().map(String::as_str).collect())
        )?;
        writeln!(
            f,
            "{}",
            widths
                .iter()
                .map(|w| "-".repeat(*w))
                .collect::<Vec<_>>()
                .join("-+-")
        )?;
        for r in &rows {
            writeln!(f, "{}", line(r.iter().map(String::as_str).collect()))?;
        }
        Ok(())
    }
}

/// Assembles a frame column by column with identity indexers.
#[derive(Debug, Default)]
pub struct FrameBuilder {
    n_rows: Option<usize>,
    names: Vec<String>,
    metas: Vec<ColumnMeta>,
    block: Vec<Arc<Vec<u64>>>,
    pools: Vec<Arc<StringPool>>,
    dicts: Vec<Arc<Dictionary>>,
}

impl FrameBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Fixes the row count up front, needed for zero-column frames.
    pub fn with_rows(n: usize) -> Self {
        Self {
            n_rows: Some(n),
            ..Self::default()
        }
    }

    fn check(&mut self, name: &str, len: usize) -> Result<()> {
        if self.names.iter().any(|n| n == name) {
            return Err(Error::DuplicateName(name.to_owned()));
        }
        match self.n_rows {
            Some(n) if n != len => Err(Error::Length {
                column: name.to_owned(),
                expected: n,
                actual: len,
            }),
            _ => {
                self.n_rows = Some(len);
                Ok(())
            }
        }
    }

    /// Raw 64-bit cells of any block dtype except `DictCode`.
    pub fn cells(mut self, name: &str, dtype: LogicalDtype, cells: Vec<u64>) -> Result<Self> {
        if !dtype.in_block() || dtype == LogicalDtype::DictCode {
            return Err(Error::Schema(format!(
                "{dtype:?} is not a plain block dtype"
            )));
        }
        self.check(name, cells.len())?;
        self.push_block(name, dtype, cells, None);
        Ok(self)
    }

    fn push_block(
        &mut self,
        name: &str,
        dtype: LogicalDtype,
        cells: Vec<u64>,
        dict: Option<usize>,
    ) {
        self.block.push(Arc::new(cells));
        self.names.push(name.to_owned());
        self.metas.push(ColumnMeta {
            dtype,
            slot: Slot {
                kind: StorageKind::Block,
                index: self.block.len() - 1,
            },
            dict,
        });
    }

    pub fn int64(self, name: &str, values: Vec<i64>) -> Result<Self> {
        let cells = values.into_iter().map(|v| v as u64).collect();
        self.cells(name, LogicalDtype::Int64, cells)
    }

    pub fn float64(self, name: &str, values: Vec<f64>) -> Result<Self> {
        let cells = values.into_iter().map(f64::to_bits).collect();
        self.cells(name, LogicalDtype::Float64, cells)
    }

    pub fn date(self, name: &str, days: Vec<i64>) -> Result<Self> {
        let cells = days.into_iter().map(|v| v as u64).collect();
        self.cells(name, LogicalDtype::Date, cells)
    }

    /// Dictionary-coded column; every code must be below `dict.len()`.
    pub fn dict(mut self, name: &str, codes: Vec<u64>, dict: Arc<Dictionary>) -> Result<Self> {
        if let Some(&bad) = codes.iter().find(|&&c| c >= dict.len() as u64) {
            return Err(Error::Code {
                code: bad,
                len: dict.len(),
            });
        }
        self.check(name, codes.len())?;
        let id = match self.dicts.iter().position(|d| Arc::ptr_eq(d, &dict)) {
            Some(id) => id,
            None => {
                self.dicts.push(dict);
                self.dicts.len() - 1
            }
        };
        self.push_block(name, LogicalDtype::DictCode, codes, Some(id));
        Ok(self)
    }

    /// Offloaded string column.
    pub fn raw(mut self, name: &str, pool: StringPool) -> Result<Self> {
        self.check(name, pool.len())?;
        self.pools.push(Arc::new(pool));
        self.names.push(name.to_owned());
        self.metas.push(ColumnMeta {
            dtype: LogicalDtype::RawString,
            slot: Slot {
                kind: StorageKind::Pool,
                index: self.pools.len() - 1,
            },
            dict: None,
        });
        Ok(self)
    }

    /// String column placed by cardinality: dictionary-coded in the block when
    /// the distinct ratio is at most `threshold`, otherwise offloaded.
    pub fn strings<'a, I>(self, name: &str, values: I, threshold: f64) -> Result<Self>
    where
        I: IntoIterator<Item = &'a str>,
        I::IntoIter: Clone,
    {
        let iter = values.into_iter();
        match analyze_cardinality(iter.clone(), threshold).verdict {
            Cardinality::Low => {
                let (codes, dict) = dict_encode(iter);
                let codes = codes.into_iter().map(|c| c as u64).collect();
                self.dict(name, codes, Arc::new(dict))
            }
            Cardinality::High => self.raw(name, iter.collect()),
        }
    }

    pub fn build(self) -> Result<Frame> {
        let n_rows = self.n_rows.unwrap_or(0);
        Ok(Frame {
            names: self.names,
            metas: self.metas,
            block: NumericBlock {
                n_rows,
                columns: self.block,
            },
            pools: self.pools,
            dicts: self.dicts,
            row_idx: RowIndexer::identity(n_rows),
        })
    }
}
