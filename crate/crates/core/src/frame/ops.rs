//! Layout-level operations: projection, gather, sort, distinct, limit, concat.

use std::cmp::Ordering;
use std::sync::Arc;

use rayon::prelude::*;

use super::{
    ColumnData, ColumnMeta, Frame, NumericBlock, RowIndexer, Slot, StorageKind, StringPool,
};
use crate::encoding::Dictionary;
use crate::error::{Error, Result};
use crate::exec::ExecOptions;
use crate::groupby;
use crate::value::LogicalDtype;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortKey {
    pub name: String,
    pub ascending: bool,
}

impl SortKey {
    pub fn asc(name: &str) -> Self {
        Self {
            name: name.to_owned(),
            ascending: true,
        }
    }

    pub fn desc(name: &str) -> Self {
        Self {
            name: name.to_owned(),
            ascending: false,
        }
    }
}

enum Comparand<'a> {
    Int(&'a [u64]),
    Float(&'a [u64]),
    /// Dictionary codes compared through the rank of their decoded value.
    Ranked(&'a [u64], Vec<u64>),
    Pool(&'a StringPool),
}

impl Comparand<'_> {
    fn cmp(&self, a: usize, b: usize) -> Ordering {
        match self {
            Comparand::Int(c) => (c[a] as i64).cmp(&(c[b] as i64)),
            Comparand::Float(c) => f64::from_bits(c[a]).total_cmp(&f64::from_bits(c[b])),
            Comparand::Ranked(c, ranks) => ranks[c[a] as usize].cmp(&ranks[c[b] as usize]),
            Comparand::Pool(p) => p.get(a).as_bytes().cmp(p.get(b).as_bytes()),
        }
    }
}

impl Frame {
    /// View with the named columns in the given order; storage is shared.
    pub fn select_columns<S: AsRef<str>>(&self, names: &[S]) -> Result<Frame> {
        let mut out_names = Vec::with_capacity(names.len());
        let mut metas = Vec::with_capacity(names.len());
        for name in names {
            let j = self.position(name.as_ref())?;
            if out_names.iter().any(|n: &String| n == name.as_ref()) {
                return Err(Error::DuplicateName(name.as_ref().to_owned()));
            }
            out_names.push(self.names[j].clone());
            metas.push(self.metas[j]);
        }
        Ok(Frame {
            names: out_names,
            metas,
            ..self.clone()
        })
    }

    /// Materializes the listed physical rows, in order, into fresh storage
    /// holding only the logical columns. The result has identity indexers.
    pub fn gather_rows(&self, ids: &[usize]) -> Result<Frame> {
        self.gather_rows_with(ids, &ExecOptions::default())
    }

    pub fn gather_rows_with(&self, ids: &[usize], opts: &ExecOptions) -> Result<Frame> {
        let n = self.physical_rows();
        if let Some(&bad) = ids.iter().find(|&&id| id >= n) {
            return Err(Error::Bounds { id: bad, n_rows: n });
        }
        let chunk = opts.chunk();
        let mut block = Vec::new();
        let mut pools = Vec::new();
        let mut dicts: Vec<Arc<Dictionary>> = Vec::new();
        let mut metas = Vec::with_capacity(self.metas.len());
        for (j, meta) in self.metas.iter().enumerate() {
            let slot = match self.view_at(j).data {
                ColumnData::Cells(src) => {
                    let mut out = vec![0u64; ids.len()];
                    out.par_chunks_mut(chunk)
                        .zip(ids.par_chunks(chunk))
                        .for_each(|(dst, rows)| {
                            for (d, &r) in dst.iter_mut().zip(rows) {
                                *d = src[r];
                            }
                        });
                    block.push(Arc::new(out));
                    Slot {
                        kind: StorageKind::Block,
                        index: block.len() - 1,
                    }
                }
                ColumnData::Pool(src) => {
                    pools.push(Arc::new(src.gather(ids, chunk)));
                    Slot {
                        kind: StorageKind::Pool,
                        index: pools.len() - 1,
                    }
                }
            };
            let dict =
                self.dict_arc(j)
                    .map(|d| match dicts.iter().position(|x| Arc::ptr_eq(x, &d)) {
                        Some(i) => i,
                        None => {
                            dicts.push(d);
                            dicts.len() - 1
                        }
                    });
            metas.push(ColumnMeta {
                dtype: meta.dtype,
                slot,
                dict,
            });
        }
        Ok(Frame {
            names: self.names.clone(),
            metas,
            block: NumericBlock {
                n_rows: ids.len(),
                columns: block,
            },
            pools,
            dicts,
            row_idx: RowIndexer::identity(ids.len()),
        })
    }

    /// Physical copy of the logical view.
    pub fn materialize(&self) -> Frame {
        self.gather_rows(self.rows())
            .expect("row indexer holds valid ids")
    }

    /// Stable multi-key sort; permutes the row indexer only.
    pub fn sort_by(&self, keys: &[SortKey]) -> Result<Frame> {
        let comparands = keys
            .iter()
            .map(|k| {
                let view = self.column(&k.name)?;
                let c = match (view.dtype, view.data) {
                    (LogicalDtype::Int64 | LogicalDtype::Date, ColumnData::Cells(c)) => {
                        Comparand::Int(c)
                    }
                    (LogicalDtype::Float64, ColumnData::Cells(c)) => Comparand::Float(c),
                    (LogicalDtype::DictCode, ColumnData::Cells(c)) => {
                        Comparand::Ranked(c, view.dict.expect("dict column").sort_ranks())
                    }
                    (_, ColumnData::Pool(p)) => Comparand::Pool(p),
                    (dtype, _) => unreachable!("{dtype:?} stored in the block"),
                };
                Ok((c, k.ascending))
            })
            .collect::<Result<Vec<_>>>()?;

        let mut rows = self.rows().to_vec();
        rows.par_sort_by(|&a, &b| {
            for (c, asc) in &comparands {
                let ord = c.cmp(a, b);
                if ord != Ordering::Equal {
                    return if *asc { ord } else { ord.reverse() };
                }
            }
            Ordering::Equal
        });
        Ok(self.with_rows(rows))
    }

    /// Keeps the first logical occurrence of each distinct key combination.
    pub fn distinct<S: AsRef<str>>(&self, names: &[S]) -> Result<Frame> {
        let table = groupby::group_keys(self, names, &ExecOptions::default())?;
        let rows = self.rows();
        Ok(self.with_rows(table.first_rows().iter().map(|&i| rows[i]).collect()))
    }

    pub fn limit(&self, k: usize) -> Frame {
        if k >= self.num_rows() {
            return self.clone();
        }
        self.with_rows(self.rows()[..k].to_vec())
    }

    /// Vertical union of frames with matching names and dtypes. Dictionary
    /// columns are re-coded into one merged dictionary; a column that is
    /// dictionary-coded in some inputs and raw in others comes out raw.
    pub fn concat(frames: &[Frame]) -> Result<Frame> {
        let Some(first) = frames.first() else {
            return Ok(Frame::empty());
        };
        for f in &frames[1..] {
            if f.names != first.names {
                return Err(Error::Schema(format!(
                    "concat column mismatch: {:?} vs {:?}",
                    first.names, f.names
                )));
            }
        }
        let total: usize = frames.iter().map(Frame::num_rows).sum();
        let mut builder = super::FrameBuilder::with_rows(total);
        for (j, name) in first.names.iter().enumerate() {
            let dtypes: Vec<LogicalDtype> = frames.iter().map(|f| f.metas[j].dtype).collect();
            let all_strings = dtypes.iter().all(|d| d.is_string());
            if !all_strings && dtypes.iter().any(|&d| d != dtypes[0]) {
                return Err(Error::Schema(format!(
                    "concat dtype mismatch in column {name}"
                )));
            }
            builder = if all_strings && dtypes.iter().all(|&d| d == LogicalDtype::DictCode) {
                let mut dict = Dictionary::new();
                let mut codes = Vec::with_capacity(total);
                for f in frames {
                    let view = f.view_at(j);
                    let src = view.dict.expect("dict column");
                    let remap: Vec<u64> = src.values().iter().map(|v| dict.intern(v)).collect();
                    let cells = view.cells().expect("block column");
                    codes.extend(f.rows().iter().map(|&r| remap[cells[r] as usize]));
                }
                builder.dict(name, codes, Arc::new(dict))?
            } else if all_strings {
                let mut pool = StringPool::new();
                for f in frames {
                    let view = f.view_at(j);
                    for &r in f.rows() {
                        pool.push(view.str_at(r).expect("string column"));
                    }
                }
                builder.raw(name, pool)?
            } else {
                let mut cells = Vec::with_capacity(total);
                for f in frames {
                    let src = f.view_at(j).cells().expect("block column");
                    cells.extend(f.rows().iter().map(|&r| src[r]));
                }
                builder.cells(name, dtypes[0], cells)?
            };
        }
        builder.build()
    }
}
