use cardframe::groupby::{
    group_by, group_keys, group_rows, group_rows_incremental, transpose_gather, AggFunc, AggSpec,
};
use cardframe::oracle::to_plain;
use cardframe::oracle::trials::random_frame;
use cardframe::{with_threads, ExecOptions, Frame, GroupStrategy, KeyHash, Value};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const KEYABLE: [&str; 5] = ["i0", "s0", "f0", "d0", "s1"];

fn setup(seed: u64, n: usize) -> (Frame, Vec<&'static str>) {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let f = random_frame(&mut r, n).unwrap();
    let k = 1 + (seed % 3) as usize;
    let keys = KEYABLE.choose_multiple(&mut r, k).copied().collect();
    (f, keys)
}

fn opts(chunk: usize, hash: KeyHash) -> ExecOptions {
    ExecOptions {
        chunk_rows: chunk,
        key_hash: hash,
        ..ExecOptions::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partition_matches_brute_force(seed in any::<u64>(), n in 0usize..250, constant in any::<bool>()) {
        let (f, keys) = setup(seed, n);
        let hash = if constant { KeyHash::Constant } else { KeyHash::default() };
        let gt = group_keys(&f, &keys, &opts(16, hash)).unwrap();
        let cols: Vec<usize> = keys.iter().map(|k| f.position(k).unwrap()).collect();
        let key_of = |i: usize| -> Vec<Value> { cols.iter().map(|&j| f.value(i, j)).collect() };
        let g = gt.row_to_group();
        for i in 0..n {
            for j in i..n {
                prop_assert_eq!(g[i] == g[j], key_of(i) == key_of(j));
            }
        }
        let mut firsts: Vec<usize> = Vec::new();
        for (i, &gid) in g.iter().enumerate() {
            prop_assert!(gid as usize <= firsts.len());
            if gid as usize == firsts.len() {
                firsts.push(i);
            }
        }
        prop_assert_eq!(gt.first_rows(), firsts.as_slice());
    }

    #[test]
    fn strategies_build_identical_tables(seed in any::<u64>(), n in 0usize..600) {
        let (f, keys) = setup(seed, n);
        for hash in [KeyHash::default(), KeyHash::Constant] {
            for chunk in [1, 7, 64, n.max(1)] {
                let o = opts(chunk, hash);
                let transposed = group_rows(&transpose_gather(&f, &keys, &o).unwrap(), &o);
                let incremental = group_rows_incremental(&f, &keys, &o).unwrap();
                prop_assert_eq!(&transposed, &incremental);
            }
        }
    }

    #[test]
    fn aggregates_are_conserved(seed in any::<u64>(), n in 0usize..600) {
        let (f, keys) = setup(seed, n);
        let specs = [
            AggSpec::new("i0", AggFunc::Count, "n"),
            AggSpec::new("i1", AggFunc::Sum, "si"),
            AggSpec::new("f0", AggFunc::Sum, "sf"),
        ];
        let out = to_plain(&group_by(&f, &keys, &specs, &ExecOptions::default()).unwrap());
        let nk = keys.len();
        let count: i64 = out.rows.iter().map(|r| match r[nk] { Value::Int(c) => c, _ => unreachable!() }).sum();
        prop_assert_eq!(count as usize, n);
        let total_i: i64 = out.rows.iter().map(|r| match r[nk + 1] { Value::Int(c) => c, _ => unreachable!() }).sum();
        let plain = to_plain(&f);
        let direct_i: i64 = plain.column("i1").unwrap().iter().map(|v| match v { Value::Int(x) => *x, _ => unreachable!() }).sum();
        prop_assert_eq!(total_i, direct_i);
        let finite = |v: &Value| match v { Value::Float(x) if x.is_finite() => *x, _ => 0.0 };
        if plain.column("f0").unwrap().iter().all(|v| v.as_f64().unwrap().is_finite()) {
            let total_f: f64 = out.rows.iter().map(|r| finite(&r[nk + 2])).sum();
            let direct_f: f64 = plain.column("f0").unwrap().iter().map(|v| finite(v)).sum();
            prop_assert!((total_f - direct_f).abs() <= 1e-9 * direct_f.abs().max(1.0));
        }
    }
}

#[test]
fn output_is_thread_and_strategy_invariant() {
    let (f, _) = setup(77, 20_000);
    let specs = [
        AggSpec::new("f0", AggFunc::Sum, "s"),
        AggSpec::new("i1", AggFunc::Mean, "m"),
        AggSpec::new("s1", AggFunc::CountDistinct, "d"),
        AggSpec::new("s1", AggFunc::Max, "x"),
    ];
    let keys = ["s0", "i0"];
    let base = to_plain(&group_by(&f, &keys, &specs, &ExecOptions::default()).unwrap());
    for strategy in [GroupStrategy::Transposed, GroupStrategy::Incremental] {
        for threads in [1, 2, 8] {
            let o = ExecOptions {
                chunk_rows: 1_000,
                group_strategy: strategy,
                ..ExecOptions::default()
            };
            let got = with_threads(threads, || group_by(&f, &keys, &specs, &o).unwrap()).unwrap();
            assert_eq!(to_plain(&got), base, "{strategy:?} at {threads} threads");
        }
    }
}

#[test]
fn mean_is_sum_over_count() {
    let (f, keys) = setup(3, 2_000);
    let specs = [
        AggSpec::new("f0", AggFunc::Sum, "s"),
        AggSpec::new("f0", AggFunc::Count, "n"),
        AggSpec::new("f0", AggFunc::Mean, "m"),
    ];
    let out = to_plain(&group_by(&f, &keys, &specs, &ExecOptions::default()).unwrap());
    let nk = keys.len();
    for row in &out.rows {
        match (&row[nk], &row[nk + 1], &row[nk + 2]) {
            (Value::Float(s), Value::Int(c), Value::Float(m)) => {
                assert_eq!((s / *c as f64).to_bits(), m.to_bits());
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
