use cardframe::io::{
    csv_to_mfb, read_csv, read_directory, read_mfb, read_mfb_all, write_csv, write_mfb, CsvSchema,
};
use cardframe::oracle::to_plain;
use cardframe::oracle::trials::random_frame;
use cardframe::{expr, Frame};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dtypes(f: &Frame) -> Vec<cardframe::LogicalDtype> {
    f.metas().iter().map(|m| m.dtype).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn write_then_read_is_identity(seed in any::<u64>(), n in 0usize..400) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let mut f = random_frame(&mut r, n).unwrap();
        if r.gen_bool(0.5) {
            f = expr::apply_filter(&f, &expr::col("i0").gt(expr::lit_i64(1))).unwrap();
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.mfb");
        let written = write_mfb(&f, &path).unwrap();
        let (g, stats) = read_mfb_all(&path).unwrap();
        prop_assert_eq!(to_plain(&g), to_plain(&f));
        prop_assert_eq!(dtypes(&g), dtypes(&f));
        prop_assert_eq!(stats.payload_bytes, written.total_payload_bytes());

        let mut names: Vec<String> = f.names().to_vec();
        names.shuffle(&mut r);
        names.truncate(r.gen_range(0..=names.len()));
        let (p, stats) = read_mfb(&path, &names).unwrap();
        let expected: u64 = names.iter().map(|c| written.column(c).unwrap().payload_bytes()).sum();
        prop_assert_eq!(stats.payload_bytes, expected);
        prop_assert_eq!(stats.columns_read, names.len());
        prop_assert_eq!(to_plain(&p), to_plain(&f.select_columns(&names).unwrap()));
    }
}

#[test]
fn directory_needs_only_its_own_bytes() {
    let mut r = ChaCha8Rng::seed_from_u64(1);
    let f = random_frame(&mut r, 500).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.mfb");
    let written = write_mfb(&f, &path).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    let head = dir.path().join("head.mfb");
    std::fs::write(&head, &bytes[..written.bytes as usize]).unwrap();
    assert_eq!(read_directory(&head).unwrap(), written);
    assert!(read_mfb_all(&head).is_err());
}

#[test]
fn csv_conversion_preserves_content() {
    let mut r = ChaCha8Rng::seed_from_u64(2);
    let f = random_frame(&mut r, 300).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    let mfb = dir.path().join("t.mfb");
    let schema = CsvSchema::for_frame(&f);
    write_csv(&f, &csv, schema.delimiter).unwrap();
    assert_eq!(to_plain(&read_csv(&csv, &schema).unwrap()), to_plain(&f));
    let report = csv_to_mfb(&csv, &schema, &mfb).unwrap();
    assert_eq!(report.n_rows, 300);
    let (g, _) = read_mfb_all(&mfb).unwrap();
    assert_eq!(to_plain(&g), to_plain(&f));
}
