//! Multi-column group-by.
//!
//! The default strategy transposes the key columns into a row-major buffer so
//! each row's composite key is one contiguous run of `k` words, hashed once.
//! The incremental strategy walks key columns one at a time, growing per-row
//! key lists and mixing a running hash; it must produce the same
//! [`GroupTable`] and is kept as a cross-check and benchmark baseline.

use std::collections::HashSet;
use std::sync::Arc;

use hashbrown::HashTable;
use rayon::prelude::*;

use crate::encoding::dict_encode;
use crate::error::{Error, Result};
use crate::exec::{ExecOptions, GroupStrategy, KeyHash};
use crate::frame::{ColumnData, Frame, FrameBuilder, StringPool};
use crate::value::LogicalDtype;

const CONSTANT_HASH: u64 = 0x42;

/// Hash of one composite key, all words at once.
#[inline]
pub fn hash_key(words: &[u64], hash: KeyHash) -> u64 {
    match hash {
        KeyHash::Xxh3 { seed } => {
            xxhash_rust::xxh3::xxh3_64_with_seed(bytemuck::cast_slice(words), seed)
        }
        KeyHash::Constant => CONSTANT_HASH,
    }
}

#[inline]
fn mix(acc: u64, word: u64, hash: KeyHash) -> u64 {
    match hash {
        KeyHash::Xxh3 { .. } => (acc.rotate_left(23) ^ word.wrapping_mul(0x9e37_79b9_7f4a_7c15))
            .wrapping_mul(0xff51_afd7_ed55_8ccd),
        KeyHash::Constant => CONSTANT_HASH,
    }
}

/// Distinct composite keys with dense ids in insertion order. Lookups
/// compare hashes first and full keys second, so hash collisions only cost
/// time.
#[derive(Debug, Clone)]
pub struct KeyTable {
    k: usize,
    keys: Vec<u64>,
    hashes: Vec<u64>,
    table: HashTable<u32>,
}

impl KeyTable {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            keys: Vec::new(),
            hashes: Vec::new(),
            table: HashTable::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.hashes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hashes.is_empty()
    }

    pub fn key(&self, id: u32) -> &[u64] {
        let id = id as usize;
        &self.keys[id * self.k..(id + 1) * self.k]
    }

    pub fn find(&self, key: &[u64], hash: u64) -> Option<u32> {
        self.table
            .find(hash, |&id| {
                self.hashes[id as usize] == hash && self.key(id) == key
            })
            .copied()
    }

    /// Id of `key`, and whether it was newly inserted.
    pub fn find_or_insert(&mut self, key: &[u64], hash: u64) -> (u32, bool) {
        if let Some(id) = self.find(key, hash) {
            return (id, false);
        }
        let id = self.hashes.len() as u32;
        self.keys.extend_from_slice(key);
        self.hashes.push(hash);
        let hashes = &self.hashes;
        self.table.insert_unique(hash, id, |&g| hashes[g as usize]);
        (id, true)
    }
}

/// Row-major key words: `words[i * k + j]` is column `j` of logical row `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyBuffer {
    pub n: usize,
    pub k: usize,
    pub words: Vec<u64>,
}

impl KeyBuffer {
    pub fn row(&self, i: usize) -> &[u64] {
        &self.words[i * self.k..(i + 1) * self.k]
    }
}

/// Per-column key words in logical order: block cells as stored, offloaded
/// strings as first-occurrence codes.
enum KeySource<'a> {
    Cells(&'a [u64]),
    Codes(Vec<u64>),
}

impl KeySource<'_> {
    #[inline]
    fn word(&self, logical: usize, phys: usize) -> u64 {
        match self {
            KeySource::Cells(c) => c[phys],
            KeySource::Codes(v) => v[logical],
        }
    }
}

fn key_sources<'a, S: AsRef<str>>(f: &'a Frame, keys: &[S]) -> Result<Vec<KeySource<'a>>> {
    keys.iter()
        .map(|name| {
            Ok(match f.column(name.as_ref())?.data {
                ColumnData::Cells(c) => KeySource::Cells(c),
                ColumnData::Pool(p) => {
                    let (codes, _) = dict_encode(f.rows().iter().map(|&r| p.get(r)));
                    KeySource::Codes(codes.into_iter().map(|c| c as u64).collect())
                }
            })
        })
        .collect()
}

pub fn transpose_gather<S: AsRef<str>>(
    f: &Frame,
    keys: &[S],
    opts: &ExecOptions,
) -> Result<KeyBuffer> {
    let sources = key_sources(f, keys)?;
    Ok(transpose_sources(f, &sources, opts))
}

fn transpose_sources(f: &Frame, sources: &[KeySource<'_>], opts: &ExecOptions) -> KeyBuffer {
    let n = f.num_rows();
    let k = sources.len();
    let rows = f.rows();
    let mut words = vec![0u64; n * k];
    if k > 0 {
        let chunk = opts.chunk();
        words
            .par_chunks_mut(chunk * k)
            .enumerate()
            .for_each(|(c, out)| {
                let start = c * chunk;
                for (off, row) in out.chunks_exact_mut(k).enumerate() {
                    let i = start + off;
                    for (j, src) in sources.iter().enumerate() {
                        row[j] = src.word(i, rows[i]);
                    }
                }
            });
    }
    KeyBuffer { n, k, words }
}

/// Partition of logical rows by composite key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupTable {
    k: usize,
    keys: Vec<u64>,
    first_rows: Vec<usize>,
    row_to_group: Vec<u32>,
}

impl GroupTable {
    pub fn n_groups(&self) -> usize {
        self.first_rows.len()
    }

    pub fn key_width(&self) -> usize {
        self.k
    }

    /// Key words of group `g`.
    pub fn key(&self, g: usize) -> &[u64] {
        &self.keys[g * self.k..(g + 1) * self.k]
    }

    /// Logical row of each group's first occurrence, ascending.
    pub fn first_rows(&self) -> &[usize] {
        &self.first_rows
    }

    pub fn row_to_group(&self) -> &[u32] {
        &self.row_to_group
    }

    /// One group holding every row, used for aggregates without keys.
    fn single(n: usize) -> Self {
        Self {
            k: 0,
            keys: Vec::new(),
            first_rows: vec![0],
            row_to_group: vec![0; n],
        }
    }
}

struct LocalGroups {
    table: KeyTable,
    first_rows: Vec<usize>,
    row_to_group: Vec<u32>,
}

/// Groups the rows of a transposed key buffer. Chunks build local tables in
/// parallel; the merge walks chunks in order so global ids follow first
/// logical occurrence regardless of chunking.
pub fn group_rows(buffer: &KeyBuffer, opts: &ExecOptions) -> GroupTable {
    let (n, k) = (buffer.n, buffer.k);
    let chunk = opts.chunk();
    let hash = opts.key_hash;
    let locals: Vec<LocalGroups> = (0..n.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let start = c * chunk;
            let end = (start + chunk).min(n);
            let mut table = KeyTable::new(k);
            let mut first_rows = Vec::new();
            let mut row_to_group = Vec::with_capacity(end - start);
            for i in start..end {
                let key = buffer.row(i);
                let (id, new) = table.find_or_insert(key, hash_key(key, hash));
                if new {
                    first_rows.push(i);
                }
                row_to_group.push(id);
            }
            LocalGroups {
                table,
                first_rows,
                row_to_group,
            }
        })
        .collect();

    let mut global = KeyTable::new(k);
    let mut first_rows = Vec::new();
    let remaps: Vec<Vec<u32>> = locals
        .iter()
        .map(|local| {
            (0..local.table.len() as u32)
                .map(|l| {
                    let (id, new) =
                        global.find_or_insert(local.table.key(l), local.table.hashes[l as usize]);
                    if new {
                        first_rows.push(local.first_rows[l as usize]);
                    }
                    id
                })
                .collect()
        })
        .collect();

    let mut row_to_group = vec![0u32; n];
    row_to_group
        .par_chunks_mut(chunk)
        .zip(locals.par_iter().zip(remaps.par_iter()))
        .for_each(|(out, (local, remap))| {
            for (o, &l) in out.iter_mut().zip(&local.row_to_group) {
                *o = remap[l as usize];
            }
        });

    GroupTable {
        k,
        keys: global.keys,
        first_rows,
        row_to_group,
    }
}

/// Column-at-a-time baseline: each key column is mapped to dense ids, the ids
/// are appended to per-row key lists and folded into per-row hashes, then the
/// finished lists are inserted into the key table.
pub fn group_rows_incremental<S: AsRef<str>>(
    f: &Frame,
    keys: &[S],
    opts: &ExecOptions,
) -> Result<GroupTable> {
    let sources = key_sources(f, keys)?;
    let n = f.num_rows();
    let k = sources.len();
    let rows = f.rows();
    let seed = match opts.key_hash {
        KeyHash::Xxh3 { seed } => seed,
        KeyHash::Constant => CONSTANT_HASH,
    };
    let mut key_lists: Vec<Vec<u64>> = vec![Vec::with_capacity(k); n];
    let mut hashes = vec![seed; n];

    for src in &sources {
        // Sparse-to-dense: first-occurrence ids over this column's words.
        let mut dense = KeyTable::new(1);
        let ids: Vec<u64> = (0..n)
            .map(|i| {
                let w = [src.word(i, rows[i])];
                dense.find_or_insert(&w, hash_key(&w, opts.key_hash)).0 as u64
            })
            .collect();
        key_lists
            .par_iter_mut()
            .zip(hashes.par_iter_mut())
            .zip(ids.par_iter())
            .for_each(|((list, h), &id)| {
                list.push(id);
                *h = mix(*h, id, opts.key_hash);
            });
    }

    let mut table = KeyTable::new(k);
    let mut first_rows = Vec::new();
    let row_to_group = key_lists
        .iter()
        .zip(&hashes)
        .enumerate()
        .map(|(i, (list, &h))| {
            let (id, new) = table.find_or_insert(list, h);
            if new {
                first_rows.push(i);
            }
            id
        })
        .collect();

    // Report keys as the original words, not the dense ids.
    let mut keys_out = Vec::with_capacity(first_rows.len() * k);
    for &i in &first_rows {
        keys_out.extend(sources.iter().map(|s| s.word(i, rows[i])));
    }
    Ok(GroupTable {
        k,
        keys: keys_out,
        first_rows,
        row_to_group,
    })
}

/// Groups `f` by `keys` with the strategy chosen in `opts`.
pub fn group_keys<S: AsRef<str>>(f: &Frame, keys: &[S], opts: &ExecOptions) -> Result<GroupTable> {
    match opts.group_strategy {
        GroupStrategy::Transposed => Ok(group_rows(&transpose_gather(f, keys, opts)?, opts)),
        GroupStrategy::Incremental => group_rows_incremental(f, keys, opts),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggFunc {
    Sum,
    Count,
    Mean,
    Min,
    Max,
    CountDistinct,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AggSpec {
    pub input: String,
    pub func: AggFunc,
    pub output: String,
}

impl AggSpec {
    pub fn new(input: &str, func: AggFunc, output: &str) -> Self {
        Self {
            input: input.to_owned(),
            func,
            output: output.to_owned(),
        }
    }
}

enum AggColumn {
    Cells(
        LogicalDtype,
        Vec<u64>,
        Option<Arc<crate::encoding::Dictionary>>,
    ),
    Strings(StringPool),
}

fn check_spec(f: &Frame, spec: &AggSpec) -> Result<LogicalDtype> {
    use LogicalDtype::*;
    let dtype = f.dtype(&spec.input)?;
    let ok = match spec.func {
        AggFunc::Sum | AggFunc::Mean => matches!(dtype, Int64 | Float64),
        AggFunc::Count | AggFunc::CountDistinct | AggFunc::Min | AggFunc::Max => true,
    };
    if ok {
        Ok(dtype)
    } else {
        Err(Error::Agg(format!(
            "{:?} is not defined on {dtype:?} column {}",
            spec.func, spec.input
        )))
    }
}

fn compute_agg(f: &Frame, gt: &GroupTable, spec: &AggSpec) -> Result<AggColumn> {
    use LogicalDtype::*;
    let dtype = check_spec(f, spec)?;
    let j = f.position(&spec.input)?;
    let view = f.view_at(j);
    let rows = f.rows();
    let groups = gt.row_to_group();
    let n_groups = gt.n_groups();
    let mut counts = vec![0u64; n_groups];
    for &g in groups {
        counts[g as usize] += 1;
    }
    let empty_group = |func: AggFunc| -> Result<()> {
        if counts.contains(&0) {
            return Err(Error::Agg(format!(
                "{func:?} of an empty group ({})",
                spec.input
            )));
        }
        Ok(())
    };

    let col = match spec.func {
        AggFunc::Count => AggColumn::Cells(Int64, counts.clone(), None),
        AggFunc::Sum | AggFunc::Mean => {
            let cells = view.cells().expect("numeric column");
            let sums: Vec<f64> = if dtype == Int64 {
                let mut acc = vec![0i64; n_groups];
                for (&g, &r) in groups.iter().zip(rows) {
                    let a = &mut acc[g as usize];
                    *a = a.checked_add(cells[r] as i64).ok_or_else(|| {
                        Error::Overflow(format!("sum of {} overflows i64", spec.input))
                    })?;
                }
                if spec.func == AggFunc::Sum {
                    return Ok(AggColumn::Cells(
                        Int64,
                        acc.into_iter().map(|v| v as u64).collect(),
                        None,
                    ));
                }
                acc.into_iter().map(|v| v as f64).collect()
            } else {
                let mut acc = vec![0f64; n_groups];
                for (&g, &r) in groups.iter().zip(rows) {
                    acc[g as usize] += f64::from_bits(cells[r]);
                }
                acc
            };
            let out = if spec.func == AggFunc::Mean {
                sums.iter()
                    .zip(&counts)
                    .map(|(s, &c)| s / c as f64)
                    .collect()
            } else {
                sums
            };
            AggColumn::Cells(Float64, out.into_iter().map(f64::to_bits).collect(), None)
        }
        AggFunc::Min | AggFunc::Max => {
            empty_group(spec.func)?;
            let want = if spec.func == AggFunc::Min {
                std::cmp::Ordering::Less
            } else {
                std::cmp::Ordering::Greater
            };
            match view.data {
                ColumnData::Cells(cells) => {
                    let ranks = view.dict.map(|d| d.sort_ranks());
                    let cmp = |a: u64, b: u64| match (dtype, &ranks) {
                        (Float64, _) => f64::from_bits(a).total_cmp(&f64::from_bits(b)),
                        (DictCode, Some(r)) => r[a as usize].cmp(&r[b as usize]),
                        _ => (a as i64).cmp(&(b as i64)),
                    };
                    let mut best: Vec<Option<u64>> = vec![None; n_groups];
                    for (&g, &r) in groups.iter().zip(rows) {
                        let slot = &mut best[g as usize];
                        let v = cells[r];
                        if slot.is_none_or(|b| cmp(v, b) == want) {
                            *slot = Some(v);
                        }
                    }
                    AggColumn::Cells(
                        dtype,
                        best.into_iter().map(Option::unwrap).collect(),
                        f.dict_arc(j),
                    )
                }
                ColumnData::Pool(p) => {
                    let mut best: Vec<Option<&str>> = vec![None; n_groups];
                    for (&g, &r) in groups.iter().zip(rows) {
                        let slot = &mut best[g as usize];
                        let v = p.get(r);
                        if slot.is_none_or(|b| v.as_bytes().cmp(b.as_bytes()) == want) {
                            *slot = Some(v);
                        }
                    }
                    AggColumn::Strings(best.into_iter().map(Option::unwrap).collect())
                }
            }
        }
        AggFunc::CountDistinct => {
            let distinct: Vec<u64> = match view.data {
                ColumnData::Cells(cells) => {
                    let mut sets: Vec<HashSet<u64>> = vec![HashSet::new(); n_groups];
                    for (&g, &r) in groups.iter().zip(rows) {
                        sets[g as usize].insert(cells[r]);
                    }
                    sets.iter().map(|s| s.len() as u64).collect()
                }
                ColumnData::Pool(p) => {
                    let mut sets: Vec<HashSet<&str>> = vec![HashSet::new(); n_groups];
                    for (&g, &r) in groups.iter().zip(rows) {
                        sets[g as usize].insert(p.get(r));
                    }
                    sets.iter().map(|s| s.len() as u64).collect()
                }
            };
            AggColumn::Cells(Int64, distinct, None)
        }
    };
    Ok(col)
}

/// One output row per group in group order: the key columns (taken from each
/// group's first row) followed by one column per aggregate.
pub fn aggregate<S: AsRef<str>>(
    f: &Frame,
    keys: &[S],
    gt: &GroupTable,
    specs: &[AggSpec],
) -> Result<Frame> {
    let key_frame = if keys.is_empty() {
        FrameBuilder::with_rows(gt.n_groups()).build()?
    } else {
        let rows = f.rows();
        let phys: Vec<usize> = gt.first_rows().iter().map(|&i| rows[i]).collect();
        f.select_columns(keys)?.gather_rows(&phys)?
    };
    let columns = specs
        .par_iter()
        .map(|s| compute_agg(f, gt, s))
        .collect::<Result<Vec<_>>>()?;
    let mut builder = FrameBuilder::with_rows(gt.n_groups());
    for (spec, col) in specs.iter().zip(columns) {
        builder = match col {
            AggColumn::Cells(LogicalDtype::DictCode, cells, Some(d)) => {
                builder.dict(&spec.output, cells, d)?
            }
            AggColumn::Cells(dtype, cells, _) => builder.cells(&spec.output, dtype, cells)?,
            AggColumn::Strings(pool) => builder.raw(&spec.output, pool)?,
        };
    }
    let aggs = builder.build()?;
    key_frame.zip_columns(&aggs, aggs.names().to_vec())
}

/// Group `f` by `keys` and aggregate. With no keys the whole input forms one
/// group, so the result has exactly one row even for empty input.
pub fn group_by<S: AsRef<str>>(
    f: &Frame,
    keys: &[S],
    specs: &[AggSpec],
    opts: &ExecOptions,
) -> Result<Frame> {
    for spec in specs {
        check_spec(f, spec)?;
    }
    let gt = if keys.is_empty() {
        GroupTable::single(f.num_rows())
    } else {
        group_keys(f, keys, opts)?
    };
    aggregate(f, keys, &gt, specs)
}
