use std::collections::BTreeSet;

use cardframe::expr::{self, col, lit_date, lit_f64, lit_i64};
use cardframe::io::{gen_tables, gen_tpch_mini, read_mfb, GenManifest};
use cardframe::oracle::{naive_compute, naive_filter, to_plain};
use cardframe::{Frame, Value};

fn tables(scale: f64, seed: u64) -> Vec<(&'static str, Frame)> {
    gen_tables(scale, seed).unwrap()
}

fn table<'a>(ts: &'a [(&str, Frame)], name: &str) -> &'a Frame {
    &ts.iter().find(|(n, _)| *n == name).unwrap().1
}

fn tuples(f: &Frame, cols: &[&str]) -> Vec<Vec<Value>> {
    to_plain(&f.select_columns(cols).unwrap()).rows
}

fn keys(f: &Frame, cols: &[&str]) -> BTreeSet<Vec<Value>> {
    tuples(f, cols).into_iter().collect()
}

fn hashes(m: &GenManifest) -> Vec<(String, String)> {
    m.tables
        .iter()
        .map(|t| (t.table.clone(), t.sha256.clone()))
        .collect()
}

#[test]
fn same_seed_same_files() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ma = gen_tpch_mini(0.002, 7, a.path()).unwrap();
    let mb = gen_tpch_mini(0.002, 7, b.path()).unwrap();
    assert_eq!(hashes(&ma), hashes(&mb));
    assert_eq!(ma.tables.len(), 8);
    let c = tempfile::tempdir().unwrap();
    let mc = gen_tpch_mini(0.002, 8, c.path()).unwrap();
    assert_ne!(hashes(&ma), hashes(&mc));
}

#[test]
fn written_tables_read_back() {
    let dir = tempfile::tempdir().unwrap();
    let m = gen_tpch_mini(0.001, 42, dir.path()).unwrap();
    let ts = tables(0.001, 42);
    for t in &m.tables {
        let f = table(&ts, &t.table);
        let (g, _) = read_mfb(&t.path, f.names()).unwrap();
        assert_eq!(to_plain(&g), to_plain(f), "{}", t.table);
        assert_eq!(t.n_rows, f.num_rows());
    }
}

#[test]
fn foreign_keys_resolve() {
    let ts = tables(0.01, 42);
    let refs: [(&str, &[&str], &str, &[&str]); 10] = [
        ("lineitem", &["l_orderkey"], "orders", &["o_orderkey"]),
        (
            "lineitem",
            &["l_partkey", "l_suppkey"],
            "partsupp",
            &["ps_partkey", "ps_suppkey"],
        ),
        ("lineitem", &["l_suppkey"], "supplier", &["s_suppkey"]),
        ("orders", &["o_custkey"], "customer", &["c_custkey"]),
        ("partsupp", &["ps_partkey"], "part", &["p_partkey"]),
        ("partsupp", &["ps_suppkey"], "supplier", &["s_suppkey"]),
        ("customer", &["c_nationkey"], "nation", &["n_nationkey"]),
        ("supplier", &["s_nationkey"], "nation", &["n_nationkey"]),
        ("nation", &["n_regionkey"], "region", &["r_regionkey"]),
        ("lineitem", &["l_partkey"], "part", &["p_partkey"]),
    ];
    for (child, fk, parent, pk) in refs {
        let parents = keys(table(&ts, parent), pk);
        assert_eq!(
            parents.len(),
            table(&ts, parent).num_rows(),
            "{parent} key is unique"
        );
        for row in tuples(table(&ts, child), fk) {
            assert!(
                parents.contains(&row),
                "{child}{fk:?} = {row:?} missing from {parent}"
            );
        }
    }
    let with_orders = keys(table(&ts, "orders"), &["o_custkey"]);
    let customers = table(&ts, "customer").num_rows();
    assert!(
        with_orders.len() < customers,
        "some customers have no orders"
    );
}

#[test]
fn value_domains() {
    let ts = tables(0.01, 7);
    let li = table(&ts, "lineitem");
    let domain = expr::and(vec![
        col("l_quantity").between(lit_f64(1.0), lit_f64(50.0)),
        col("l_discount").between(lit_f64(0.0), lit_f64(0.10)),
        col("l_tax").between(lit_f64(0.0), lit_f64(0.08)),
        col("l_shipdate").between(
            lit_date("1992-01-02").unwrap(),
            lit_date("1998-12-31").unwrap(),
        ),
        col("l_receiptdate").gt(col("l_shipdate")),
        col("l_returnflag").in_set(
            ["R", "A", "N"]
                .map(|s| expr::Literal::Str(s.into()))
                .to_vec(),
        ),
        col("l_linestatus").in_set(["O", "F"].map(|s| expr::Literal::Str(s.into())).to_vec()),
    ]);
    assert_eq!(expr::eval_mask(li, &domain).unwrap().len(), li.num_rows());
    let o = table(&ts, "orders");
    let dates = col("o_orderdate").between(
        lit_date("1992-01-01").unwrap(),
        lit_date("1998-08-02").unwrap(),
    );
    assert_eq!(expr::eval_mask(o, &dates).unwrap().len(), o.num_rows());
}

#[test]
fn comment_pattern_fraction_is_golden() {
    for (scale, matched, total) in [(0.001, 19, 1_500), (0.01, 143, 15_000)] {
        let ts = tables(scale, 42);
        let o = table(&ts, "orders");
        let e = col("o_comment").like("%special%requests%");
        let m = expr::eval_mask(o, &e).unwrap();
        assert_eq!((m.len(), o.num_rows()), (matched, total));
        assert_eq!(naive_filter(&to_plain(o), &e).unwrap().num_rows(), matched);
        let fraction = matched as f64 / total as f64;
        assert!(fraction > 0.0 && fraction < 0.2);
    }
}

#[test]
fn q6_predicate_matches_oracle() {
    for seed in [7, 42] {
        let ts = tables(0.01, seed);
        let li = table(&ts, "lineitem");
        let e = expr::and(vec![
            col("l_shipdate").ge(lit_date("1994-01-01").unwrap()),
            col("l_shipdate").lt(lit_date("1995-01-01").unwrap()),
            col("l_discount").between(lit_f64(0.05), lit_f64(0.07)),
            col("l_quantity").lt(lit_i64(24)),
        ]);
        let got = expr::apply_filter(li, &e).unwrap();
        assert!(got.num_rows() > 0);
        assert_eq!(to_plain(&got), naive_filter(&to_plain(li), &e).unwrap());
    }
}

#[test]
fn q1_derived_columns_match_oracle() {
    let ts = tables(0.01, 42);
    let li = table(&ts, "lineitem")
        .select_columns(&["l_extendedprice", "l_discount", "l_tax"])
        .unwrap();
    let disc = col("l_extendedprice").mul(lit_f64(1.0).sub(col("l_discount")));
    let charge = disc.clone().mul(lit_f64(1.0).add(col("l_tax")));
    let got = expr::eval_compute(&li, &disc, "disc_price").unwrap();
    let got = expr::eval_compute(&got, &charge, "charge").unwrap();
    let want = naive_compute(&to_plain(&li), &disc, "disc_price").unwrap();
    let want = naive_compute(&want, &charge, "charge").unwrap();
    assert_eq!(to_plain(&got), want);
}
