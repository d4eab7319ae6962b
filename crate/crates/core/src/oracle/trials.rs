//! Seeded random trials comparing each engine operator with the reference
//! engine. Each trial builds random frames (sometimes as filtered or sorted
//! views), runs one operator both ways and reports the first disagreement.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    naive_anti_join, naive_compute, naive_filter, naive_groupby, naive_join, naive_semi_join,
    naive_sort, to_plain, PlainTable,
};
use crate::error::{Error, Result};
use crate::exec::{BuildSide, ExecOptions, GroupStrategy, JoinMode, KeyHash};
use crate::expr::{self, col, Expr, Literal};
use crate::frame::{Frame, FrameBuilder, SortKey};
use crate::groupby::{group_by, AggFunc, AggSpec};
use crate::join;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operator {
    Filter,
    Compute,
    GroupByTransposed,
    GroupByIncremental,
    InnerJoin,
    SemiJoin,
    AntiJoin,
    Sort,
}

impl Operator {
    pub const ALL: [Operator; 8] = [
        Operator::Filter,
        Operator::Compute,
        Operator::GroupByTransposed,
        Operator::GroupByIncremental,
        Operator::InnerJoin,
        Operator::SemiJoin,
        Operator::AntiJoin,
        Operator::Sort,
    ];

    /// Whether the operator hashes composite keys.
    pub fn uses_key_hash(self) -> bool {
        matches!(
            self,
            Operator::GroupByTransposed
                | Operator::GroupByIncremental
                | Operator::InnerJoin
                | Operator::SemiJoin
                | Operator::AntiJoin
        )
    }
}

const LO_POOL: [&str; 5] = ["a", "b", "ab", "", "ba"];
const HI_ALPHABET: [&str; 8] = ["a", "b", "c", "_", "%", "é", "ab", " "];
const FLOATS: [f64; 7] = [0.0, -0.0, 0.5, 1.25, -3.0, 100.0, f64::NAN];
const CHUNKS: [usize; 4] = [1, 7, 64, 4096];

fn hi_string(r: &mut ChaCha8Rng) -> String {
    (0..r.gen_range(0..6))
        .map(|_| *HI_ALPHABET.choose(r).expect("non-empty"))
        .collect()
}

/// Random frame with columns i0 (few values), i1 (wide), f0, d0, s0 (few
/// values) and s1 (many). String placement follows a random threshold, so
/// the same data lands dictionary-coded in some trials and raw in others.
pub fn random_frame(r: &mut ChaCha8Rng, n: usize) -> Result<Frame> {
    let threshold = *[0.0, 0.5, 1.0].choose(r).expect("non-empty");
    let i0: Vec<i64> = (0..n).map(|_| r.gen_range(0..5)).collect();
    let i1: Vec<i64> = (0..n).map(|_| r.gen_range(-1_000_000..1_000_000)).collect();
    let f0: Vec<f64> = (0..n)
        .map(|_| {
            if r.gen_bool(0.8) {
                *FLOATS[..6].choose(r).expect("non-empty")
            } else if r.gen_bool(0.1) {
                f64::NAN
            } else {
                r.gen_range(-10.0..10.0)
            }
        })
        .collect();
    let d0: Vec<i64> = (0..n).map(|_| r.gen_range(8_000..11_000)).collect();
    let s0: Vec<&str> = (0..n)
        .map(|_| *LO_POOL.choose(r).expect("non-empty"))
        .collect();
    let s1: Vec<String> = (0..n).map(|_| hi_string(r)).collect();
    FrameBuilder::with_rows(n)
        .int64("i0", i0)?
        .int64("i1", i1)?
        .float64("f0", f0)?
        .date("d0", d0)?
        .strings("s0", s0.iter().copied(), threshold)?
        .strings("s1", s1.iter().map(String::as_str), threshold)?
        .build()
}

/// The frame itself, or a filtered and/or reordered view of it.
fn random_view(r: &mut ChaCha8Rng, f: Frame) -> Result<Frame> {
    let mut f = f;
    if r.gen_bool(0.3) {
        f = expr::apply_filter(&f, &col("i0").not_equals(expr::lit_i64(r.gen_range(0..5))))?;
    }
    if r.gen_bool(0.3) {
        let name = *["i1", "s1", "f0"].choose(r).expect("non-empty");
        f = f.sort_by(&[SortKey::desc(name)])?;
    }
    Ok(f)
}

fn random_opts(r: &mut ChaCha8Rng, key_hash: KeyHash) -> ExecOptions {
    ExecOptions {
        chunk_rows: *CHUNKS.choose(r).expect("non-empty"),
        key_hash,
        ..ExecOptions::default()
    }
}

fn size(r: &mut ChaCha8Rng, max: usize) -> usize {
    if r.gen_bool(0.1) {
        r.gen_range(0..4)
    } else {
        r.gen_range(0..=max)
    }
}

fn lit_str(s: String) -> Expr {
    Expr::Lit(Literal::Str(s))
}

fn pattern(r: &mut ChaCha8Rng) -> String {
    (0..r.gen_range(0..5))
        .map(|_| *["a", "b", "%", "_", "c"].choose(r).expect("non-empty"))
        .collect()
}

fn cmp_op(r: &mut ChaCha8Rng, a: Expr, b: Expr) -> Expr {
    match r.gen_range(0..6) {
        0 => a.equals(b),
        1 => a.not_equals(b),
        2 => a.lt(b),
        3 => a.le(b),
        4 => a.gt(b),
        _ => a.ge(b),
    }
}

fn string_col(r: &mut ChaCha8Rng) -> Expr {
    col(["s0", "s1"].choose(r).expect("non-empty"))
}

fn string_lit(r: &mut ChaCha8Rng) -> String {
    if r.gen_bool(0.5) {
        LO_POOL.choose(r).expect("non-empty").to_string()
    } else {
        hi_string(r)
    }
}

fn numeric_term(r: &mut ChaCha8Rng) -> Expr {
    match r.gen_range(0..6) {
        0 => col("i0"),
        1 => col("i1"),
        2 => col("f0"),
        3 => col("i0")
            .mul(expr::lit_i64(r.gen_range(-3..4)))
            .add(col("i1")),
        4 => col("f0").mul(expr::lit_f64(1.0).sub(col("f0"))),
        _ => col("i1").div(col("i0")),
    }
}

fn numeric_lit(r: &mut ChaCha8Rng) -> Expr {
    if r.gen_bool(0.5) {
        expr::lit_i64(r.gen_range(-5..6))
    } else {
        expr::lit_f64(*FLOATS.choose(r).expect("non-empty"))
    }
}

/// Random well-typed boolean expression over [`random_frame`]'s schema.
pub fn random_predicate(r: &mut ChaCha8Rng, depth: u32) -> Expr {
    let leaf_only = depth == 0;
    match r.gen_range(0..if leaf_only { 10 } else { 13 }) {
        0 => {
            let lhs = numeric_term(r);
            let rhs = numeric_lit(r);
            cmp_op(r, lhs, rhs)
        }
        1 => {
            let lhs = string_col(r);
            let rhs = lit_str(string_lit(r));
            cmp_op(r, lhs, rhs)
        }
        2 => {
            let (a, b) = (string_lit(r), string_lit(r));
            string_col(r).between(lit_str(a), lit_str(b))
        }
        3 => {
            let lo = r.gen_range(8_000..11_000);
            col("d0").between(
                Expr::Lit(Literal::Date(lo)),
                Expr::Lit(Literal::Date(lo + r.gen_range(0..1_000))),
            )
        }
        4 => {
            let values = (0..r.gen_range(0..4))
                .map(|_| Literal::Str(string_lit(r)))
                .collect();
            string_col(r).in_set(values)
        }
        5 => {
            let values = (0..r.gen_range(0..4))
                .map(|_| Literal::I64(r.gen_range(0..6)))
                .collect();
            col("i0").in_set(values)
        }
        6 => {
            let p = pattern(r);
            string_col(r).like(&p)
        }
        7 => {
            let p = pattern(r).replace('%', "");
            match r.gen_range(0..3) {
                0 => string_col(r).starts_with(&p),
                1 => string_col(r).ends_with(&p),
                _ => string_col(r).contains(&p),
            }
        }
        8 => col("d0")
            .year()
            .equals(expr::lit_i64(r.gen_range(1991..2001))),
        9 => string_col(r).equals(string_col(r)),
        10 => expr::and(
            (0..r.gen_range(0..4))
                .map(|_| random_predicate(r, depth - 1))
                .collect(),
        ),
        11 => expr::or(
            (0..r.gen_range(0..4))
                .map(|_| random_predicate(r, depth - 1))
                .collect(),
        ),
        _ => random_predicate(r, depth - 1).not(),
    }
}

fn random_compute(r: &mut ChaCha8Rng) -> Expr {
    match r.gen_range(0..5) {
        0 => numeric_term(r),
        1 => col("d0").add(expr::lit_i64(r.gen_range(-100..100))),
        2 => col("d0").sub(col("d0")),
        3 => col("i1").mul(col("i1")).mul(col("i1")),
        _ => col("d0").year().sub(col("i0")),
    }
}

/// What an agreeing trial produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Rows(usize),
    /// Both sides rejected the input with the same error kind.
    Rejected,
}

/// Both succeed with equal tables, or both fail with the same error kind.
fn agree(
    what: &str,
    engine: Result<PlainTable>,
    oracle: Result<PlainTable>,
) -> Result<Outcome, String> {
    match (engine, oracle) {
        (Ok(a), Ok(b)) if a == b => Ok(Outcome::Rows(a.num_rows())),
        (Ok(a), Ok(b)) => Err(format!(
            "{what}: results differ\nengine:\n{a}\noracle:\n{b}"
        )),
        (Err(a), Err(b)) if std::mem::discriminant(&a) == std::mem::discriminant(&b) => {
            Ok(Outcome::Rejected)
        }
        (a, b) => Err(format!(
            "{what}: outcome differs\nengine: {:?}\noracle: {:?}",
            a.map(|t| t.num_rows()),
            b.map(|t| t.num_rows())
        )),
    }
}

fn distinct_names(r: &mut ChaCha8Rng, from: &[&'static str], max: usize) -> Vec<&'static str> {
    let k = r.gen_range(1..=max.min(from.len()));
    from.choose_multiple(r, k).copied().collect()
}

fn random_specs(r: &mut ChaCha8Rng) -> Vec<AggSpec> {
    let all = [
        ("i1", AggFunc::Sum),
        ("f0", AggFunc::Sum),
        ("i1", AggFunc::Mean),
        ("f0", AggFunc::Mean),
        ("i0", AggFunc::Count),
        ("s1", AggFunc::Min),
        ("s0", AggFunc::Max),
        ("f0", AggFunc::Max),
        ("d0", AggFunc::Min),
        ("s1", AggFunc::CountDistinct),
        ("f0", AggFunc::CountDistinct),
        ("s0", AggFunc::CountDistinct),
    ];
    let k = r.gen_range(1..=4);
    all.choose_multiple(r, k)
        .enumerate()
        .map(|(i, (input, func))| AggSpec::new(input, *func, &format!("agg{i}")))
        .collect()
}

const JOIN_KEYS: [&[(&str, &str)]; 6] = [
    &[("i0", "i0")],
    &[("s0", "s0")],
    &[("s1", "s0")],
    &[("s0", "s1")],
    &[("i0", "i0"), ("s0", "s0")],
    &[("f0", "f0")],
];

/// Runs one trial; `Err` describes the disagreement.
pub fn run_trial(op: Operator, seed: u64, key_hash: KeyHash) -> Result<Outcome, String> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(op as u64);
    let err = |e: Error| format!("setup failed: {e}");
    let max_rows = match op {
        Operator::InnerJoin | Operator::SemiJoin | Operator::AntiJoin => 300,
        _ => 1_000,
    };
    let n = size(&mut r, max_rows);
    let base = random_frame(&mut r, n).map_err(err)?;
    let f = random_view(&mut r, base).map_err(err)?;
    let t = to_plain(&f);
    let mut opts = random_opts(&mut r, key_hash);

    match op {
        Operator::Filter => {
            let e = random_predicate(&mut r, 3);
            let got = expr::apply_filter_with(&f, &e, &opts).map(|g| to_plain(&g));
            agree(&format!("filter {e:?}"), got, naive_filter(&t, &e))
        }
        Operator::Compute => {
            let e = random_compute(&mut r);
            let got = expr::eval_compute_with(&f, &e, "out", &opts).map(|g| to_plain(&g));
            agree(&format!("compute {e:?}"), got, naive_compute(&t, &e, "out"))
        }
        Operator::GroupByTransposed | Operator::GroupByIncremental => {
            opts.group_strategy = if op == Operator::GroupByTransposed {
                GroupStrategy::Transposed
            } else {
                GroupStrategy::Incremental
            };
            let keys = if r.gen_bool(0.05) {
                Vec::new()
            } else {
                distinct_names(&mut r, &["i0", "s0", "f0", "d0", "s1"], 3)
            };
            let specs = random_specs(&mut r);
            let got = group_by(&f, &keys, &specs, &opts).map(|g| to_plain(&g));
            agree(
                &format!("group by {keys:?} {specs:?}"),
                got,
                naive_groupby(&t, &keys, &specs),
            )
        }
        Operator::InnerJoin | Operator::SemiJoin | Operator::AntiJoin => {
            let m = size(&mut r, max_rows);
            let rbase = random_frame(&mut r, m).map_err(err)?;
            let right = random_view(&mut r, rbase).map_err(err)?;
            let rt = to_plain(&right);
            let keys = *JOIN_KEYS.choose(&mut r).expect("non-empty");
            opts.join_mode = *[JoinMode::Hash, JoinMode::SortMerge]
                .choose(&mut r)
                .expect("non-empty");
            opts.build_side = *[BuildSide::Auto, BuildSide::Left, BuildSide::Right]
                .choose(&mut r)
                .expect("non-empty");
            let what = format!("{op:?} on {keys:?} with {opts:?}");
            match op {
                Operator::InnerJoin => agree(
                    &what,
                    join::inner_join_with(&f, &right, keys, &opts).map(|g| to_plain(&g)),
                    naive_join(&t, &rt, keys),
                ),
                Operator::SemiJoin => agree(
                    &what,
                    join::semi_join_with(&f, &right, keys, &opts).map(|g| to_plain(&g)),
                    naive_semi_join(&t, &rt, keys),
                ),
                _ => agree(
                    &what,
                    join::anti_join_with(&f, &right, keys, &opts).map(|g| to_plain(&g)),
                    naive_anti_join(&t, &rt, keys),
                ),
            }
        }
        Operator::Sort => {
            let names = distinct_names(&mut r, &["i0", "s0", "s1", "f0", "d0", "i1"], 3);
            let keys: Vec<SortKey> = names
                .iter()
                .map(|n| {
                    if r.gen_bool(0.5) {
                        SortKey::asc(n)
                    } else {
                        SortKey::desc(n)
                    }
                })
                .collect();
            agree(
                &format!("sort {keys:?}"),
                f.sort_by(&keys).map(|g| to_plain(&g)),
                naive_sort(&t, &keys),
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a_few_trials_each() {
        for op in Operator::ALL {
            for seed in 0..20 {
                run_trial(op, seed, KeyHash::default()).unwrap();
            }
        }
    }
}
