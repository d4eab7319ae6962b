//! The query catalog: q1, q3, q5, q6, q9 and q13 over the generated schema.
//!
//! q13's left outer join is expressed as an inner join with a per-customer
//! count, plus an anti-join that contributes customers without qualifying
//! orders at count zero.

use std::fmt;
use std::str::FromStr;

use cardframe::expr::{self, col, lit_date, lit_f64, lit_i64, lit_str, Expr};
use cardframe::groupby::{AggFunc, AggSpec};
use cardframe::oracle::PlainTable;
use cardframe::{SortKey, Value};

use crate::plan::{scan, Plan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QueryId {
    Q1,
    Q3,
    Q5,
    Q6,
    Q9,
    Q13,
}

impl QueryId {
    pub const ALL: [QueryId; 6] = [
        QueryId::Q1,
        QueryId::Q3,
        QueryId::Q5,
        QueryId::Q6,
        QueryId::Q9,
        QueryId::Q13,
    ];

    pub fn name(self) -> &'static str {
        match self {
            QueryId::Q1 => "q1",
            QueryId::Q3 => "q3",
            QueryId::Q5 => "q5",
            QueryId::Q6 => "q6",
            QueryId::Q9 => "q9",
            QueryId::Q13 => "q13",
        }
    }

    pub fn plan(self) -> Plan {
        match self {
            QueryId::Q1 => q1(),
            QueryId::Q3 => q3(),
            QueryId::Q5 => q5(),
            QueryId::Q6 => q6(),
            QueryId::Q9 => q9(),
            QueryId::Q13 => q13(),
        }
    }

    /// Output columns produced by a division, compared with a relative tolerance.
    pub fn derived_columns(self) -> &'static [&'static str] {
        match self {
            QueryId::Q1 => &["avg_qty", "avg_price", "avg_disc"],
            _ => &[],
        }
    }
}

impl fmt::Display for QueryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownQuery(pub String);

impl fmt::Display for UnknownQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let known: Vec<&str> = QueryId::ALL.iter().map(|q| q.name()).collect();
        write!(
            f,
            "unknown query id '{}' (expected one of {})",
            self.0,
            known.join(", ")
        )
    }
}

impl std::error::Error for UnknownQuery {}

impl FromStr for QueryId {
    type Err = UnknownQuery;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        QueryId::ALL
            .into_iter()
            .find(|q| q.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownQuery(s.to_owned()))
    }
}

fn date(s: &str) -> Expr {
    lit_date(s).expect("valid literal date")
}

fn revenue() -> Expr {
    col("l_extendedprice").mul(lit_f64(1.0).sub(col("l_discount")))
}

fn agg(input: &str, func: AggFunc, output: &str) -> AggSpec {
    AggSpec::new(input, func, output)
}

fn q1() -> Plan {
    let charge = revenue().mul(lit_f64(1.0).add(col("l_tax")));
    scan(
        "lineitem",
        &[
            "l_returnflag",
            "l_linestatus",
            "l_quantity",
            "l_extendedprice",
            "l_discount",
            "l_tax",
            "l_shipdate",
        ],
    )
    .filter(col("l_shipdate").le(date("1998-09-02")))
    .compute(revenue(), "disc_price")
    .compute(charge, "charge")
    .group_by(
        &["l_returnflag", "l_linestatus"],
        vec![
            agg("l_quantity", AggFunc::Sum, "sum_qty"),
            agg("l_extendedprice", AggFunc::Sum, "sum_base_price"),
            agg("disc_price", AggFunc::Sum, "sum_disc_price"),
            agg("charge", AggFunc::Sum, "sum_charge"),
            agg("l_quantity", AggFunc::Mean, "avg_qty"),
            agg("l_extendedprice", AggFunc::Mean, "avg_price"),
            agg("l_discount", AggFunc::Mean, "avg_disc"),
            agg("l_quantity", AggFunc::Count, "count_order"),
        ],
    )
    .sort(vec![
        SortKey::asc("l_returnflag"),
        SortKey::asc("l_linestatus"),
    ])
}

fn q3() -> Plan {
    let customers = scan("customer", &["c_custkey", "c_mktsegment"])
        .filter(col("c_mktsegment").equals(lit_str("BUILDING")))
        .select(&["c_custkey"]);
    let orders = scan(
        "orders",
        &["o_orderkey", "o_custkey", "o_orderdate", "o_shippriority"],
    )
    .filter(col("o_orderdate").lt(date("1995-03-15")))
    .join(customers, &[("o_custkey", "c_custkey")]);
    scan(
        "lineitem",
        &["l_orderkey", "l_extendedprice", "l_discount", "l_shipdate"],
    )
    .filter(col("l_shipdate").gt(date("1995-03-15")))
    .join(orders, &[("l_orderkey", "o_orderkey")])
    .compute(revenue(), "volume")
    .group_by(
        &["l_orderkey", "o_orderdate", "o_shippriority"],
        vec![agg("volume", AggFunc::Sum, "revenue")],
    )
    .sort(vec![
        SortKey::desc("revenue"),
        SortKey::asc("o_orderdate"),
        SortKey::asc("l_orderkey"),
    ])
    .limit(10)
}

fn q5() -> Plan {
    let orders = scan("orders", &["o_orderkey", "o_custkey", "o_orderdate"]).filter(
        col("o_orderdate")
            .ge(date("1994-01-01"))
            .and(col("o_orderdate").lt(date("1995-01-01"))),
    );
    let asia = scan("region", &["r_regionkey", "r_name"])
        .filter(col("r_name").equals(lit_str("ASIA")))
        .select(&["r_regionkey"]);
    scan(
        "lineitem",
        &["l_orderkey", "l_suppkey", "l_extendedprice", "l_discount"],
    )
    .join(orders, &[("l_orderkey", "o_orderkey")])
    .join(
        scan("customer", &["c_custkey", "c_nationkey"]),
        &[("o_custkey", "c_custkey")],
    )
    .join(
        scan("supplier", &["s_suppkey", "s_nationkey"]),
        &[("l_suppkey", "s_suppkey"), ("c_nationkey", "s_nationkey")],
    )
    .join(
        scan("nation", &["n_nationkey", "n_name", "n_regionkey"]),
        &[("c_nationkey", "n_nationkey")],
    )
    .join(asia, &[("n_regionkey", "r_regionkey")])
    .compute(revenue(), "volume")
    .group_by(&["n_name"], vec![agg("volume", AggFunc::Sum, "revenue")])
    .sort(vec![SortKey::desc("revenue"), SortKey::asc("n_name")])
}

fn q6() -> Plan {
    scan(
        "lineitem",
        &["l_shipdate", "l_discount", "l_quantity", "l_extendedprice"],
    )
    .filter(expr::and(vec![
        col("l_shipdate").ge(date("1994-01-01")),
        col("l_shipdate").lt(date("1995-01-01")),
        col("l_discount").between(lit_f64(0.05), lit_f64(0.07)),
        col("l_quantity").lt(lit_i64(24)),
    ]))
    .compute(col("l_extendedprice").mul(col("l_discount")), "gain")
    .group_by(&[], vec![agg("gain", AggFunc::Sum, "revenue")])
}

fn q9() -> Plan {
    let green = scan("part", &["p_partkey", "p_name"])
        .filter(col("p_name").like("%green%"))
        .select(&["p_partkey"]);
    let amount = revenue().sub(col("ps_supplycost").mul(col("l_quantity")));
    scan(
        "lineitem",
        &[
            "l_orderkey",
            "l_partkey",
            "l_suppkey",
            "l_quantity",
            "l_extendedprice",
            "l_discount",
        ],
    )
    .join(green, &[("l_partkey", "p_partkey")])
    .join(
        scan("partsupp", &["ps_partkey", "ps_suppkey", "ps_supplycost"]),
        &[("l_partkey", "ps_partkey"), ("l_suppkey", "ps_suppkey")],
    )
    .join(
        scan("supplier", &["s_suppkey", "s_nationkey"]),
        &[("l_suppkey", "s_suppkey")],
    )
    .join(
        scan("orders", &["o_orderkey", "o_orderdate"]),
        &[("l_orderkey", "o_orderkey")],
    )
    .join(
        scan("nation", &["n_nationkey", "n_name"]),
        &[("s_nationkey", "n_nationkey")],
    )
    .compute(amount, "amount")
    .compute(col("o_orderdate").year(), "o_year")
    .group_by(
        &["n_name", "o_year"],
        vec![agg("amount", AggFunc::Sum, "sum_profit")],
    )
    .sort(vec![SortKey::asc("n_name"), SortKey::desc("o_year")])
}

fn q13() -> Plan {
    let orders = || {
        scan("orders", &["o_orderkey", "o_custkey", "o_comment"])
            .filter(col("o_comment").like("%special%requests%").not())
            .select(&["o_orderkey", "o_custkey"])
    };
    let customers = || scan("customer", &["c_custkey"]);
    let counted = customers()
        .join(orders(), &[("c_custkey", "o_custkey")])
        .group_by(
            &["c_custkey"],
            vec![agg("o_orderkey", AggFunc::Count, "c_count")],
        );
    let idle = customers()
        .anti_join(orders(), &[("c_custkey", "o_custkey")])
        .compute(lit_i64(0), "c_count");
    Plan::Concat(vec![counted, idle])
        .group_by(
            &["c_count"],
            vec![agg("c_custkey", AggFunc::Count, "custdist")],
        )
        .sort(vec![SortKey::desc("custdist"), SortKey::desc("c_count")])
}

/// Equal schemas and rows; cells of `derived` columns may differ by 1e-9
/// relative, all others must match exactly.
pub fn compare_results(
    engine: &PlainTable,
    oracle: &PlainTable,
    derived: &[&str],
) -> Result<(), String> {
    if engine.names != oracle.names || engine.types != oracle.types {
        return Err(format!(
            "schema differs: {:?} vs {:?}",
            engine.names, oracle.names
        ));
    }
    if engine.num_rows() != oracle.num_rows() {
        return Err(format!(
            "row count differs: {} vs {}",
            engine.num_rows(),
            oracle.num_rows()
        ));
    }
    let tolerant: Vec<bool> = engine
        .names
        .iter()
        .map(|n| derived.contains(&n.as_str()))
        .collect();
    for (i, (a, b)) in engine.rows.iter().zip(&oracle.rows).enumerate() {
        for (j, (x, y)) in a.iter().zip(b).enumerate() {
            let close = match (x, y) {
                (Value::Float(p), Value::Float(q)) if tolerant[j] => {
                    p.to_bits() == q.to_bits() || (p - q).abs() <= 1e-9 * p.abs().max(q.abs())
                }
                _ => x == y,
            };
            if !close {
                return Err(format!("row {i}, column {}: {x} vs {y}", engine.names[j]));
            }
        }
    }
    Ok(())
}
