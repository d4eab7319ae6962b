use std::io::Write;
use std::path::Path;

use cardframe::io::gen::table_path;
use cardframe::io::{csv_to_mfb, gen_tables, write_csv, write_mfb, CsvSchema};
use cardframe::oracle::to_plain;
use cardframe::{GroupStrategy, JoinMode};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::catalog::QueryId;
use crate::runner::{
    groupby_label, join_label, run_query, DataManifest, Failure, Knobs, ManifestTable, RunReport,
    MANIFEST_FILE,
};

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Other(format!("{}: {e}", path.display()))
}

fn emit<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), Failure> {
    let line = serde_json::to_string(value).map_err(|e| Failure::Other(e.to_string()))?;
    writeln!(out, "{line}").map_err(|e| Failure::Other(e.to_string()))
}

pub fn gen(
    scale: f64,
    seed: u64,
    out_dir: &Path,
    csv_dir: Option<&Path>,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Failure::Usage(format!(
            "scale must be positive, got {scale}"
        )));
    }
    std::fs::create_dir_all(out_dir).map_err(|e| io_failure(out_dir, e))?;
    if let Some(dir) = csv_dir {
        std::fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
    }
    let mut tables = Vec::new();
    for (name, frame) in gen_tables(scale, seed)? {
        let path = table_path(out_dir, name);
        write_mfb(&frame, &path)?;
        let bytes = std::fs::read(&path).map_err(|e| io_failure(&path, e))?;
        tables.push(ManifestTable {
            table: name.to_owned(),
            file: format!("{name}.mfb"),
            n_rows: frame.num_rows(),
            bytes: bytes.len() as u64,
            sha256: format!("{:x}", Sha256::digest(&bytes)),
        });
        if let Some(dir) = csv_dir {
            let schema = CsvSchema::for_frame(&frame);
            write_csv(&frame, dir.join(format!("{name}.tbl")), schema.delimiter)?;
            let sidecar = dir.join(format!("{name}.schema"));
            std::fs::write(&sidecar, schema.to_sidecar()).map_err(|e| io_failure(&sidecar, e))?;
        }
    }
    let manifest = DataManifest {
        scale,
        seed,
        tables,
    };
    let path = out_dir.join(MANIFEST_FILE);
    let text =
        serde_json::to_string_pretty(&manifest).map_err(|e| Failure::Other(e.to_string()))?;
    std::fs::write(&path, text).map_err(|e| io_failure(&path, e))?;
    emit(out, &manifest)
}

#[derive(Debug, Serialize)]
struct ConvertedColumn {
    name: String,
    dtype: String,
    n_distinct: Option<usize>,
    ratio: Option<f64>,
    bytes: u64,
}

#[derive(Debug, Serialize)]
struct ConvertedTable {
    table: String,
    n_rows: usize,
    columns: Vec<ConvertedColumn>,
}

/// Converts every `<table>.tbl` in `csv_dir` using `<table>.schema` from `schema_dir`.
pub fn convert(
    csv_dir: &Path,
    schema_dir: &Path,
    out_dir: &Path,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let entries = std::fs::read_dir(csv_dir)
        .map_err(|e| Failure::Usage(format!("{}: {e}", csv_dir.display())))?;
    let mut inputs: Vec<_> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "tbl"))
        .collect();
    inputs.sort();
    if inputs.is_empty() {
        return Err(Failure::Usage(format!(
            "no .tbl files in {}",
            csv_dir.display()
        )));
    }
    let mut schemas = Vec::new();
    for input in &inputs {
        let table = input
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_owned();
        let sidecar = schema_dir.join(format!("{table}.schema"));
        if !sidecar.is_file() {
            return Err(Failure::Usage(format!(
                "missing schema file {}",
                sidecar.display()
            )));
        }
        let schema = CsvSchema::load(&sidecar).map_err(|e| Failure::Usage(e.to_string()))?;
        schemas.push((table, schema));
    }
    std::fs::create_dir_all(out_dir).map_err(|e| io_failure(out_dir, e))?;
    for (input, (table, schema)) in inputs.iter().zip(schemas) {
        let report = csv_to_mfb(input, &schema, table_path(out_dir, &table))?;
        emit(
            out,
            &ConvertedTable {
                table,
                n_rows: report.n_rows,
                columns: report
                    .columns
                    .into_iter()
                    .map(|c| ConvertedColumn {
                        name: c.name,
                        dtype: format!("{:?}", c.dtype),
                        n_distinct: c.n_distinct,
                        ratio: c.ratio,
                        bytes: c.bytes,
                    })
                    .collect(),
            },
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Table,
}

pub fn query(
    data: &Path,
    id: QueryId,
    knobs: Knobs,
    format: Format,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let (report, result) = run_query(data, id, knobs)?;
    if format == Format::Table {
        write!(out, "{}", to_plain(&result)).map_err(|e| Failure::Other(e.to_string()))?;
    }
    emit(out, &report)
}

pub const GROUPBY_MODES: [GroupStrategy; 2] =
    [GroupStrategy::Transposed, GroupStrategy::Incremental];
pub const JOIN_MODES: [JoinMode; 2] = [JoinMode::Hash, JoinMode::SortMerge];

/// Every knob combination for the given thread counts.
pub fn cells(threads: &[usize]) -> Vec<Knobs> {
    let mut out = Vec::new();
    for &t in threads {
        for groupby in GROUPBY_MODES {
            for join in JOIN_MODES {
                out.push(Knobs {
                    threads: t,
                    groupby,
                    join,
                });
            }
        }
    }
    out
}

#[derive(Debug, Serialize)]
struct BenchRun<'a> {
    kind: &'static str,
    repeat: usize,
    #[serde(flatten)]
    report: &'a RunReport,
}

#[derive(Debug, Serialize)]
struct BenchMean<'a> {
    kind: &'static str,
    query: &'a str,
    threads: usize,
    groupby: &'static str,
    join: &'static str,
    repeats: usize,
    load_ms: f64,
    compute_ms: f64,
    content_hash: &'a str,
}

/// Times every (query, threads, mode) cell. Hashes must agree across all
/// cells of a query before any of its timings are written.
pub fn bench(
    data: &Path,
    ids: &[QueryId],
    threads: &[usize],
    repeats: usize,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    if repeats == 0 {
        return Err(Failure::Usage("repeats must be at least 1".into()));
    }
    if threads.contains(&0) {
        return Err(Failure::Usage("thread counts must be at least 1".into()));
    }
    for &id in ids {
        let mut runs: Vec<(Knobs, Vec<RunReport>)> = Vec::new();
        for knobs in cells(threads) {
            let reports = (0..repeats)
                .map(|_| run_query(data, id, knobs).map(|(r, _)| r))
                .collect::<Result<Vec<_>, _>>()?;
            runs.push((knobs, reports));
        }
        let reference = &runs[0].1[0].content_hash;
        for (knobs, reports) in &runs {
            if let Some(bad) = reports.iter().find(|r| &r.content_hash != reference) {
                return Err(Failure::Divergence(format!(
                    "{id}: content hash {} at {} threads, groupby {}, join {} differs from {reference}",
                    bad.content_hash,
                    knobs.threads,
                    groupby_label(knobs.groupby),
                    join_label(knobs.join)
                )));
            }
        }
        for (knobs, reports) in &runs {
            for (i, report) in reports.iter().enumerate() {
                emit(
                    out,
                    &BenchRun {
                        kind: "run",
                        repeat: i,
                        report,
                    },
                )?;
            }
            let n = reports.len() as f64;
            emit(
                out,
                &BenchMean {
                    kind: "mean",
                    query: id.name(),
                    threads: knobs.threads,
                    groupby: groupby_label(knobs.groupby),
                    join: join_label(knobs.join),
                    repeats,
                    load_ms: reports.iter().map(|r| r.load_ms).sum::<f64>() / n,
                    compute_ms: reports.iter().map(|r| r.compute_ms).sum::<f64>() / n,
                    content_hash: reference,
                },
            )?;
        }
    }
    Ok(())
}
