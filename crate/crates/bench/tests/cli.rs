use std::path::Path;
use std::process::{Command, Output};

use cardframe::io::read_mfb_all;
use cardframe::oracle::to_plain;
use cardframe_bench::runner::RunReport;
use serde_json::Value;

fn cardframe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cardframe"))
        .args(args)
        .output()
        .unwrap()
}

fn gen(dir: &Path, csv: Option<&Path>) {
    let mut args = vec![
        "gen",
        "--scale",
        "0.001",
        "--seed",
        "42",
        "--out",
        dir.to_str().unwrap(),
    ];
    if let Some(c) = csv {
        args.extend(["--csv", c.to_str().unwrap()]);
    }
    let out = cardframe(&args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn lines(out: &Output) -> Vec<Value> {
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn gen_writes_every_table_and_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), None);
    for t in [
        "region", "nation", "supplier", "customer", "part", "partsupp", "orders", "lineitem",
    ] {
        assert!(dir.path().join(format!("{t}.mfb")).is_file(), "{t}");
    }
    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["tables"].as_array().unwrap().len(), 8);
    assert_eq!(manifest["seed"], 42);
}

#[test]
fn convert_matches_direct_generation() {
    let (direct, csv, converted) = (
        tempfile::tempdir().unwrap(),
        tempfile::tempdir().unwrap(),
        tempfile::tempdir().unwrap(),
    );
    gen(direct.path(), Some(csv.path()));
    let c = csv.path().to_str().unwrap();
    let out = cardframe(&[
        "convert",
        "--csv",
        c,
        "--schema",
        c,
        "--out",
        converted.path().to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(lines(&out).len(), 8);
    for t in [
        "region", "nation", "supplier", "customer", "part", "partsupp", "orders", "lineitem",
    ] {
        let file = format!("{t}.mfb");
        let (a, _) = read_mfb_all(direct.path().join(&file)).unwrap();
        let (b, _) = read_mfb_all(converted.path().join(&file)).unwrap();
        assert_eq!(to_plain(&a), to_plain(&b), "{t}");
        let dtypes = |f: &cardframe::Frame| f.metas().iter().map(|m| m.dtype).collect::<Vec<_>>();
        assert_eq!(dtypes(&a), dtypes(&b), "{t}");
    }
}

#[test]
fn missing_schema_exits_2() {
    let (csv, empty, out_dir) = (
        tempfile::tempdir().unwrap(),
        tempfile::tempdir().unwrap(),
        tempfile::tempdir().unwrap(),
    );
    std::fs::write(csv.path().join("t.tbl"), "1|a\n").unwrap();
    let out = cardframe(&[
        "convert",
        "--csv",
        csv.path().to_str().unwrap(),
        "--schema",
        empty.path().to_str().unwrap(),
        "--out",
        out_dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("t.schema"));
}

#[test]
fn unknown_query_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = cardframe(&[
        "query",
        "--data",
        dir.path().to_str().unwrap(),
        "--id",
        "q2",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("q2"));
}

#[test]
fn missing_table_or_column_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = cardframe(&[
        "query",
        "--data",
        dir.path().to_str().unwrap(),
        "--id",
        "q6",
    ]);
    assert_eq!(out.status.code(), Some(3));

    let frame = cardframe::FrameBuilder::new()
        .int64("l_orderkey", vec![1])
        .unwrap()
        .build()
        .unwrap();
    cardframe::io::write_mfb(&frame, dir.path().join("lineitem.mfb")).unwrap();
    let out = cardframe(&[
        "query",
        "--data",
        dir.path().to_str().unwrap(),
        "--id",
        "q6",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("l_shipdate"));
}

#[test]
fn query_reports_parse_and_table_format_prints_rows() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), None);
    let d = dir.path().to_str().unwrap();
    let out = cardframe(&[
        "query",
        "--data",
        d,
        "--id",
        "q6",
        "--threads",
        "2",
        "--join",
        "sortmerge",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let report: RunReport = serde_json::from_str(text.trim()).unwrap();
    assert_eq!(
        serde_json::from_str::<RunReport>(&serde_json::to_string(&report).unwrap()).unwrap(),
        report
    );
    assert_eq!((report.rows, report.threads, report.seed), (1, 2, Some(42)));
    assert_eq!(report.join, "sortmerge");
    assert_eq!(report.io.columns_read, 4);
    assert_eq!(report.io.tables.len(), 1);

    let out = cardframe(&["query", "--data", d, "--id", "q13", "--format", "table"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rows = text.lines();
    assert_eq!(rows.next(), Some("c_count | custdist"));
    assert!(
        text.lines().any(|l| l.starts_with("0 | ")),
        "customers without orders are counted"
    );
}

#[test]
fn bench_emits_runs_and_means_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), None);
    let out = cardframe(&[
        "bench",
        "--data",
        dir.path().to_str().unwrap(),
        "--ids",
        "q6,q13",
        "--threads",
        "1,2",
        "--repeats",
        "3",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = lines(&out);
    let cells = 2 * 2 * 2 * 2;
    assert_eq!(
        rows.iter().filter(|r| r["kind"] == "run").count(),
        cells * 3
    );
    assert_eq!(rows.iter().filter(|r| r["kind"] == "mean").count(), cells);
    for q in ["q6", "q13"] {
        let hashes: std::collections::BTreeSet<&str> = rows
            .iter()
            .filter(|r| r["query"] == q)
            .map(|r| r["content_hash"].as_str().unwrap())
            .collect();
        assert_eq!(hashes.len(), 1, "{q}");
    }
}

#[test]
fn bench_rejects_zero_repeats() {
    let dir = tempfile::tempdir().unwrap();
    let out = cardframe(&[
        "bench",
        "--data",
        dir.path().to_str().unwrap(),
        "--ids",
        "q6",
        "--repeats",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(2));
}
