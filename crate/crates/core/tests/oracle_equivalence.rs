use cardframe::expr::{self, like_match};
use cardframe::oracle::trials::{random_frame, random_predicate, run_trial, Operator};
use cardframe::oracle::{naive_filter, naive_like, to_plain};
use cardframe::KeyHash;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sweep(op: Operator, seeds: std::ops::Range<u64>, hash: KeyHash) {
    for seed in seeds {
        if let Err(msg) = run_trial(op, seed, hash) {
            panic!("{op:?} seed {seed}: {msg}");
        }
    }
}

#[test]
fn filter_matches_oracle() {
    sweep(Operator::Filter, 10_000..10_200, KeyHash::default());
}

#[test]
fn compute_matches_oracle() {
    sweep(Operator::Compute, 10_000..10_200, KeyHash::default());
}

#[test]
fn groupby_matches_oracle() {
    sweep(
        Operator::GroupByTransposed,
        10_000..10_200,
        KeyHash::default(),
    );
    sweep(
        Operator::GroupByIncremental,
        10_000..10_200,
        KeyHash::default(),
    );
}

#[test]
fn joins_match_oracle() {
    for op in [Operator::InnerJoin, Operator::SemiJoin, Operator::AntiJoin] {
        sweep(op, 10_000..10_150, KeyHash::default());
    }
}

#[test]
fn sort_matches_oracle() {
    sweep(Operator::Sort, 10_000..10_200, KeyHash::default());
}

#[test]
fn constant_hash_still_agrees() {
    for op in Operator::ALL.into_iter().filter(|op| op.uses_key_hash()) {
        sweep(op, 20_000..20_060, KeyHash::Constant);
    }
}

#[test]
fn other_hash_seeds_agree() {
    for op in Operator::ALL.into_iter().filter(|op| op.uses_key_hash()) {
        sweep(op, 30_000..30_040, KeyHash::Xxh3 { seed: 0xdead_beef });
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sequential_filters_equal_conjunction(seed in any::<u64>(), n in 0usize..400) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let f = random_frame(&mut r, n).unwrap();
        let (a, b) = (random_predicate(&mut r, 2), random_predicate(&mut r, 2));
        let twice = expr::apply_filter(&expr::apply_filter(&f, &a).unwrap(), &b).unwrap();
        let once = expr::apply_filter(&f, &a.clone().and(b.clone())).unwrap();
        prop_assert_eq!(twice.rows(), once.rows());
        prop_assert_eq!(to_plain(&once), naive_filter(&to_plain(&f), &a.and(b)).unwrap());
    }

    #[test]
    fn true_literal_is_identity_for_and(seed in any::<u64>(), n in 0usize..300) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let f = random_frame(&mut r, n).unwrap();
        let e = random_predicate(&mut r, 2);
        let with_true = expr::and(vec![expr::lit_bool(true), e.clone()]);
        prop_assert_eq!(expr::eval_mask(&f, &with_true).unwrap(), expr::eval_mask(&f, &e).unwrap());
    }

    #[test]
    fn like_agrees_with_reference(
        s in "[ab%_é]{0,8}",
        p in "[ab%_]{0,6}",
    ) {
        prop_assert_eq!(like_match(&s, &p), naive_like(&s, &p));
    }
}
