use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use cardframe::io::{gen::table_path, read_mfb, IoStats};
use cardframe::oracle::{content_hash, to_plain, PlainTable};
use cardframe::{with_threads, ExecOptions, Frame, GroupStrategy, JoinMode};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::QueryId;
use crate::plan::Plan;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Process-level failure, each kind mapped to an exit code.
#[derive(Debug, Error)]
pub enum Failure {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Missing(String),
    #[error("{0}")]
    Divergence(String),
    #[error("{0}")]
    Other(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Missing(_) => 3,
            Failure::Divergence(_) => 4,
            Failure::Other(_) => 1,
        }
    }
}

impl From<cardframe::Error> for Failure {
    fn from(e: cardframe::Error) -> Self {
        use cardframe::Error as E;
        match &e {
            E::Name(_) | E::Format(_) => Failure::Missing(e.to_string()),
            E::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => {
                Failure::Missing(e.to_string())
            }
            _ => Failure::Other(e.to_string()),
        }
    }
}

/// Written next to generated tables so reports can name scale and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataManifest {
    pub scale: f64,
    pub seed: u64,
    pub tables: Vec<ManifestTable>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestTable {
    pub table: String,
    pub file: String,
    pub n_rows: usize,
    pub bytes: u64,
    pub sha256: String,
}

impl DataManifest {
    /// The manifest in `dir`, if one was written there.
    pub fn find(dir: &Path) -> Option<DataManifest> {
        let text = std::fs::read_to_string(dir.join(MANIFEST_FILE)).ok()?;
        serde_json::from_str(&text).ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Knobs {
    pub threads: usize,
    pub groupby: GroupStrategy,
    pub join: JoinMode,
}

impl Knobs {
    pub fn options(&self) -> ExecOptions {
        ExecOptions {
            group_strategy: self.groupby,
            join_mode: self.join,
            ..ExecOptions::default()
        }
    }
}

pub fn groupby_label(s: GroupStrategy) -> &'static str {
    match s {
        GroupStrategy::Transposed => "transposed",
        GroupStrategy::Incremental => "incremental",
    }
}

pub fn join_label(m: JoinMode) -> &'static str {
    match m {
        JoinMode::Hash => "hash",
        JoinMode::SortMerge => "sortmerge",
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRead {
    pub table: String,
    pub columns: Vec<String>,
    pub header_bytes: u64,
    pub payload_bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IoReport {
    pub header_bytes: u64,
    pub payload_bytes: u64,
    pub columns_read: usize,
    pub tables: Vec<TableRead>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub query: String,
    pub scale: Option<f64>,
    pub seed: Option<u64>,
    pub threads: usize,
    pub groupby: String,
    pub join: String,
    pub load_ms: f64,
    pub compute_ms: f64,
    pub io: IoReport,
    pub rows: usize,
    pub content_hash: String,
}

/// Tables projected to the columns a plan uses.
pub struct Dataset {
    pub tables: BTreeMap<String, Frame>,
    pub io: IoReport,
}

pub fn load(dir: &Path, plan: &Plan) -> Result<Dataset, Failure> {
    let mut tables = BTreeMap::new();
    let mut io = IoReport {
        header_bytes: 0,
        payload_bytes: 0,
        columns_read: 0,
        tables: Vec::new(),
    };
    for (table, columns) in plan.projections() {
        let path = table_path(dir, table);
        let (frame, stats): (Frame, IoStats) = read_mfb(&path, &columns)?;
        io.header_bytes += stats.header_bytes;
        io.payload_bytes += stats.payload_bytes;
        io.columns_read += stats.columns_read;
        io.tables.push(TableRead {
            table: table.to_owned(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            header_bytes: stats.header_bytes,
            payload_bytes: stats.payload_bytes,
        });
        tables.insert(table.to_owned(), frame);
    }
    Ok(Dataset { tables, io })
}

/// The same projected tables, decoded for the reference engine.
pub fn load_plain(dir: &Path, plan: &Plan) -> Result<BTreeMap<String, PlainTable>, Failure> {
    let data = load(dir, plan)?;
    Ok(data
        .tables
        .iter()
        .map(|(k, f)| (k.clone(), to_plain(f)))
        .collect())
}

fn millis(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

/// Loads and runs one query under the given knobs.
pub fn run_query(dir: &Path, id: QueryId, knobs: Knobs) -> Result<(RunReport, Frame), Failure> {
    let plan = id.plan();
    let opts = knobs.options();
    let manifest = DataManifest::find(dir);
    let outcome = with_threads(knobs.threads, || -> Result<_, Failure> {
        let start = Instant::now();
        let data = load(dir, &plan)?;
        let load_ms = millis(start);
        let start = Instant::now();
        let result = plan.run(&data.tables, &opts)?;
        Ok((data.io, load_ms, millis(start), result))
    })?;
    let (io, load_ms, compute_ms, result) = outcome?;
    let report = RunReport {
        query: id.name().to_owned(),
        scale: manifest.as_ref().map(|m| m.scale),
        seed: manifest.as_ref().map(|m| m.seed),
        threads: knobs.threads,
        groupby: groupby_label(knobs.groupby).to_owned(),
        join: join_label(knobs.join).to_owned(),
        load_ms,
        compute_ms,
        io,
        rows: result.num_rows(),
        content_hash: content_hash(&to_plain(&result)),
    };
    Ok((report, result))
}

/// Runs the reference engine on the same projected inputs.
pub fn run_oracle(dir: &Path, id: QueryId) -> Result<PlainTable, Failure> {
    let plan = id.plan();
    let tables = load_plain(dir, &plan)?;
    Ok(plan.run_naive(&tables)?)
}
