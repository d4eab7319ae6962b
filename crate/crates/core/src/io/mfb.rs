//! MFB: a little-endian columnar file with a seekable column directory.
//!
//! ```text
//! header     "MFB1" | version u32 | n_rows u64 | n_cols u32
//! directory  n_cols × { name_len u16 | name | dtype u8 |
//!                       data_offset u64 | data_len u64 | aux_offset u64 | aux_len u64 }
//! payloads   cells: n_rows × 8 bytes
//!            strings: (n_rows + 1) × 8-byte offsets, then bytes
//!            dictionary aux: count u64, (count + 1) × 8-byte offsets, then bytes
//! ```
//!
//! Offsets are absolute. Readers touch only the header, the directory and the
//! payload ranges of requested columns.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::Path;
use std::sync::Arc;

use crate::encoding::Dictionary;
use crate::error::{Error, Result};
use crate::frame::{ColumnData, Frame, FrameBuilder, StringPool};
use crate::value::LogicalDtype;

pub const MAGIC: &[u8; 4] = b"MFB1";
pub const VERSION: u32 = 1;
const HEADER_BYTES: u64 = 20;
const ENTRY_FIXED_BYTES: u64 = 2 + 1 + 32;

pub fn dtype_tag(dtype: LogicalDtype) -> u8 {
    match dtype {
        LogicalDtype::Int64 => 0,
        LogicalDtype::Float64 => 1,
        LogicalDtype::Date => 2,
        LogicalDtype::DictCode => 3,
        LogicalDtype::RawString => 4,
    }
}

pub fn dtype_from_tag(tag: u8) -> Result<LogicalDtype> {
    Ok(match tag {
        0 => LogicalDtype::Int64,
        1 => LogicalDtype::Float64,
        2 => LogicalDtype::Date,
        3 => LogicalDtype::DictCode,
        4 => LogicalDtype::RawString,
        t => return Err(Error::Format(format!("unknown dtype tag {t}"))),
    })
}

/// One directory entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MfbColumn {
    pub name: String,
    pub dtype: LogicalDtype,
    pub data_offset: u64,
    pub data_len: u64,
    pub aux_offset: u64,
    pub aux_len: u64,
}

impl MfbColumn {
    pub fn payload_bytes(&self) -> u64 {
        self.data_len + self.aux_len
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MfbDirectory {
    pub n_rows: u64,
    pub columns: Vec<MfbColumn>,
    /// Header plus directory size.
    pub bytes: u64,
}

impl MfbDirectory {
    pub fn column(&self, name: &str) -> Result<&MfbColumn> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::Name(name.to_owned()))
    }

    pub fn total_payload_bytes(&self) -> u64 {
        self.columns.iter().map(MfbColumn::payload_bytes).sum()
    }
}

/// Byte counts of one read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct IoStats {
    pub header_bytes: u64,
    pub payload_bytes: u64,
    pub columns_read: usize,
}

fn le_words(words: &[u64]) -> Vec<u8> {
    words.iter().flat_map(|w| w.to_le_bytes()).collect()
}

fn pool_payload(pool: &StringPool) -> Vec<u8> {
    let mut out = le_words(pool.offsets());
    out.extend_from_slice(pool.bytes());
    out
}

fn dict_payload(dict: &Dictionary) -> Vec<u8> {
    let pool: StringPool = dict.values().iter().map(String::as_str).collect();
    let mut out = (dict.len() as u64).to_le_bytes().to_vec();
    out.extend(pool_payload(&pool));
    out
}

/// Writes `f` (materializing views first) and returns the directory written.
pub fn write_mfb(f: &Frame, path: impl AsRef<Path>) -> Result<MfbDirectory> {
    let path = path.as_ref();
    let f = if f.is_identity() {
        f.clone()
    } else {
        f.materialize()
    };
    let n = f.num_rows() as u64;

    let payloads: Vec<(Vec<u8>, Vec<u8>)> = (0..f.num_columns())
        .map(|j| {
            let view = f.view_at(j);
            match view.data {
                ColumnData::Cells(c) => {
                    (le_words(c), view.dict.map(dict_payload).unwrap_or_default())
                }
                ColumnData::Pool(p) => (pool_payload(p), Vec::new()),
            }
        })
        .collect();

    let dir_bytes: u64 = f
        .names()
        .iter()
        .map(|name| ENTRY_FIXED_BYTES + name.len() as u64)
        .sum();
    let mut cursor = HEADER_BYTES + dir_bytes;
    let mut columns = Vec::with_capacity(f.num_columns());
    for (j, (data, aux)) in payloads.iter().enumerate() {
        let name = &f.names()[j];
        if name.len() > u16::MAX as usize {
            return Err(Error::Format(format!("column name too long: {name}")));
        }
        let data_offset = cursor;
        cursor += data.len() as u64;
        let (aux_offset, aux_len) = if aux.is_empty() {
            (0, 0)
        } else {
            let at = cursor;
            cursor += aux.len() as u64;
            (at, aux.len() as u64)
        };
        columns.push(MfbColumn {
            name: name.clone(),
            dtype: f.metas()[j].dtype,
            data_offset,
            data_len: data.len() as u64,
            aux_offset,
            aux_len,
        });
    }

    let io = |e| Error::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    let mut put = |bytes: &[u8]| w.write_all(bytes).map_err(io);
    put(MAGIC)?;
    put(&VERSION.to_le_bytes())?;
    put(&n.to_le_bytes())?;
    put(&(columns.len() as u32).to_le_bytes())?;
    for c in &columns {
        put(&(c.name.len() as u16).to_le_bytes())?;
        put(c.name.as_bytes())?;
        put(&[dtype_tag(c.dtype)])?;
        for v in [c.data_offset, c.data_len, c.aux_offset, c.aux_len] {
            put(&v.to_le_bytes())?;
        }
    }
    for (data, aux) in &payloads {
        put(data)?;
        put(aux)?;
    }
    w.flush().map_err(io)?;
    Ok(MfbDirectory {
        n_rows: n,
        columns,
        bytes: HEADER_BYTES + dir_bytes,
    })
}

struct Source<R> {
    inner: R,
    len: u64,
}

impl<R: Read + Seek> Source<R> {
    fn exact<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.inner
            .read_exact(&mut buf)
            .map_err(|_| Error::Format("truncated header or directory".into()))?;
        Ok(buf)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.exact()?))
    }

    fn range(&mut self, offset: u64, len: u64) -> Result<Vec<u8>> {
        if offset.checked_add(len).is_none_or(|end| end > self.len) {
            return Err(Error::Format(format!(
                "payload [{offset}, +{len}) extends past end of file ({} bytes)",
                self.len
            )));
        }
        self.inner
            .seek(SeekFrom::Start(offset))
            .map_err(|e| Error::Format(e.to_string()))?;
        let mut buf = vec![0u8; len as usize];
        self.inner
            .read_exact(&mut buf)
            .map_err(|_| Error::Format("truncated payload".into()))?;
        Ok(buf)
    }
}

fn open(path: &Path) -> Result<Source<BufReader<File>>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let len = file.metadata().map_err(|e| Error::io(path, e))?.len();
    Ok(Source {
        inner: BufReader::new(file),
        len,
    })
}

fn directory<R: Read + Seek>(src: &mut Source<R>) -> Result<MfbDirectory> {
    if &src.exact::<4>()? != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u32::from_le_bytes(src.exact()?);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let n_rows = src.u64()?;
    let n_cols = u32::from_le_bytes(src.exact()?);
    let mut bytes = HEADER_BYTES;
    let mut columns = Vec::new();
    for _ in 0..n_cols {
        let name_len = u16::from_le_bytes(src.exact()?) as usize;
        let mut name = vec![0u8; name_len];
        src.inner
            .read_exact(&mut name)
            .map_err(|_| Error::Format("truncated directory".into()))?;
        let name = String::from_utf8(name)
            .map_err(|_| Error::Format("column name is not UTF-8".into()))?;
        let dtype = dtype_from_tag(src.exact::<1>()?[0])?;
        let (data_offset, data_len, aux_offset, aux_len) =
            (src.u64()?, src.u64()?, src.u64()?, src.u64()?);
        bytes += ENTRY_FIXED_BYTES + name_len as u64;
        columns.push(MfbColumn {
            name,
            dtype,
            data_offset,
            data_len,
            aux_offset,
            aux_len,
        });
    }
    Ok(MfbDirectory {
        n_rows,
        columns,
        bytes,
    })
}

/// Header and directory only; no payload bytes are read.
pub fn read_directory(path: impl AsRef<Path>) -> Result<MfbDirectory> {
    directory(&mut open(path.as_ref())?)
}

fn words(bytes: &[u8]) -> Vec<u64> {
    bytes
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect()
}

fn parse_pool(bytes: &[u8], n: usize, what: &str) -> Result<StringPool> {
    let off_bytes = (n + 1) * 8;
    if bytes.len() < off_bytes {
        return Err(Error::Format(format!(
            "{what}: string payload shorter than its offsets"
        )));
    }
    StringPool::from_parts(words(&bytes[..off_bytes]), bytes[off_bytes..].to_vec())
        .map_err(|e| Error::Format(format!("{what}: {e}")))
}

fn read_column<R: Read + Seek>(
    src: &mut Source<R>,
    b: FrameBuilder,
    c: &MfbColumn,
    n: usize,
) -> Result<FrameBuilder> {
    let data = src.range(c.data_offset, c.data_len)?;
    if c.dtype.in_block() && data.len() != n * 8 {
        return Err(Error::Format(format!(
            "{}: expected {} data bytes, found {}",
            c.name,
            n * 8,
            data.len()
        )));
    }
    match c.dtype {
        LogicalDtype::RawString => b.raw(&c.name, parse_pool(&data, n, &c.name)?),
        LogicalDtype::DictCode => {
            let aux = src.range(c.aux_offset, c.aux_len)?;
            if aux.len() < 8 {
                return Err(Error::Format(format!("{}: missing dictionary", c.name)));
            }
            let count = u64::from_le_bytes(aux[..8].try_into().expect("8 bytes")) as usize;
            let pool = parse_pool(&aux[8..], count, &c.name)?;
            let dict = Dictionary::from_values(pool.iter().map(str::to_owned).collect())?;
            b.dict(&c.name, words(&data), Arc::new(dict))
                .map_err(|e| Error::Format(format!("{}: {e}", c.name)))
        }
        dtype => b.cells(&c.name, dtype, words(&data)),
    }
}

fn read_selected(path: &Path, select: Option<&[&str]>) -> Result<(Frame, IoStats)> {
    let mut src = open(path)?;
    let dir = directory(&mut src)?;
    let chosen: Vec<&MfbColumn> = match select {
        None => dir.columns.iter().collect(),
        Some(names) => names.iter().map(|n| dir.column(n)).collect::<Result<_>>()?,
    };
    let n = usize::try_from(dir.n_rows).map_err(|_| Error::Format("row count overflow".into()))?;
    let mut stats = IoStats {
        header_bytes: dir.bytes,
        ..IoStats::default()
    };
    let mut b = FrameBuilder::with_rows(n);
    for c in chosen {
        b = read_column(&mut src, b, c, n)?;
        stats.payload_bytes += c.payload_bytes();
        stats.columns_read += 1;
    }
    Ok((b.build()?, stats))
}

/// Reads only the named columns, in the order given.
pub fn read_mfb<S: AsRef<str>>(path: impl AsRef<Path>, columns: &[S]) -> Result<(Frame, IoStats)> {
    let names: Vec<&str> = columns.iter().map(AsRef::as_ref).collect();
    read_selected(path.as_ref(), Some(&names))
}

pub fn read_mfb_all(path: impl AsRef<Path>) -> Result<(Frame, IoStats)> {
    read_selected(path.as_ref(), None)
}
