use cardframe::encoding::factorize_pair;
use cardframe::join::{anti_join, inner_join_with, join_index, semi_join, semi_join_with};
use cardframe::oracle::trials::random_frame;
use cardframe::oracle::{naive_join, to_plain};
use cardframe::{with_threads, BuildSide, ExecOptions, Frame, FrameBuilder, JoinMode, KeyHash};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pair(seed: u64, n: usize, m: usize) -> (Frame, Frame) {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    (
        random_frame(&mut r, n).unwrap(),
        random_frame(&mut r, m).unwrap(),
    )
}

const KEYS: [(&str, &str); 2] = [("i0", "i0"), ("s0", "s0")];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn build_side_and_mode_do_not_change_output(seed in any::<u64>(), n in 0usize..200, m in 0usize..200) {
        let (l, r) = pair(seed, n, m);
        let base = join_index(&l, &r, &KEYS, &ExecOptions::default()).unwrap();
        for mode in [JoinMode::Hash, JoinMode::SortMerge] {
            for side in [BuildSide::Left, BuildSide::Right, BuildSide::Auto] {
                for hash in [KeyHash::default(), KeyHash::Constant] {
                    let o = ExecOptions { join_mode: mode, build_side: side, key_hash: hash, chunk_rows: 13, ..ExecOptions::default() };
                    prop_assert_eq!(&join_index(&l, &r, &KEYS, &o).unwrap(), &base);
                }
            }
        }
    }

    #[test]
    fn raw_strings_join_like_their_codes(seed in any::<u64>(), n in 0usize..200, m in 0usize..200) {
        let (l, r) = pair(seed, n, m);
        let ls: Vec<String> = (0..n).map(|i| l.column("s1").unwrap().value_at(l.rows()[i]).to_string()).collect();
        let rs: Vec<String> = (0..m).map(|i| r.column("s1").unwrap().value_at(r.rows()[i]).to_string()).collect();
        let (lc, rc, _) = factorize_pair(ls.iter().map(String::as_str), rs.iter().map(String::as_str));
        let lf = FrameBuilder::new().int64("k", lc).unwrap().build().unwrap();
        let rf = FrameBuilder::new().int64("k", rc).unwrap().build().unwrap();
        let by_string = join_index(&l, &r, &[("s1", "s1")], &ExecOptions::default()).unwrap();
        let by_code = join_index(&lf, &rf, &[("k", "k")], &ExecOptions::default()).unwrap();
        prop_assert_eq!(by_string, by_code);
    }

    #[test]
    fn semi_and_anti_partition_left(seed in any::<u64>(), n in 0usize..300, m in 0usize..300) {
        let (l, r) = pair(seed, n, m);
        let semi = semi_join(&l, &r, &KEYS).unwrap();
        let anti = anti_join(&l, &r, &KEYS).unwrap();
        prop_assert_eq!(semi.num_rows() + anti.num_rows(), l.num_rows());
        let mut all: Vec<usize> = semi.rows().iter().chain(anti.rows()).copied().collect();
        all.sort_unstable();
        let mut left: Vec<usize> = l.rows().to_vec();
        left.sort_unstable();
        prop_assert_eq!(all, left);
        let again = semi_join(&semi, &r, &KEYS).unwrap();
        prop_assert_eq!(again.rows(), semi.rows());
    }

    #[test]
    fn inner_join_matches_nested_loop(seed in any::<u64>(), n in 0usize..150, m in 0usize..150) {
        let (l, r) = pair(seed, n, m);
        let got = to_plain(&inner_join_with(&l, &r, &KEYS, &ExecOptions::default()).unwrap());
        prop_assert_eq!(got, naive_join(&to_plain(&l), &to_plain(&r), &KEYS).unwrap());
    }
}

#[test]
fn joins_are_thread_invariant() {
    let (l, r) = pair(11, 8_000, 3_000);
    let keys = [("s0", "s0"), ("d0", "d0")];
    let o = ExecOptions {
        chunk_rows: 500,
        ..ExecOptions::default()
    };
    let base = to_plain(&inner_join_with(&l, &r, &keys, &o).unwrap());
    let base_semi = semi_join_with(&l, &r, &keys, &o).unwrap();
    assert!(base.num_rows() > 0);
    for threads in [1, 2, 8] {
        let (inner, semi) = with_threads(threads, || {
            (
                inner_join_with(&l, &r, &keys, &o).unwrap(),
                semi_join_with(&l, &r, &keys, &o).unwrap(),
            )
        })
        .unwrap();
        assert_eq!(to_plain(&inner), base);
        assert_eq!(semi.rows(), base_semi.rows());
    }
}
