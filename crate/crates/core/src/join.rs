//! Equi-joins over factorized composite keys.
//!
//! String key pairs are mapped into one shared integer space per pair, numeric
//! keys are used as stored, and each row's key becomes `k` contiguous words.
//! Inner joins emit left-major output with each left row's matches in
//! ascending right order, whichever side the hash table is built on.

use rayon::prelude::*;

use crate::encoding::FactorMap;
use crate::error::{Error, Result};
use crate::exec::{BuildSide, ExecOptions, JoinMode};
use crate::frame::{ColumnView, Frame};
use crate::groupby::{hash_key, KeyBuffer, KeyTable};

/// Matched physical row pairs, left-major.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct JoinIndex {
    pub left_rows: Vec<usize>,
    pub right_rows: Vec<usize>,
}

impl JoinIndex {
    pub fn len(&self) -> usize {
        self.left_rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.left_rows.is_empty()
    }
}

fn pairs<S: AsRef<str>>(keys: &[(S, S)]) -> Result<()> {
    if keys.is_empty() {
        return Err(Error::Join("at least one key pair is required".into()));
    }
    Ok(())
}

/// Logical-order strings of a string column.
fn strings<'a>(f: &'a Frame, view: &ColumnView<'a>) -> Vec<&'a str> {
    f.rows()
        .iter()
        .map(|&r| view.str_at(r).expect("string column"))
        .collect()
}

/// Key buffers for both sides, in logical row order.
fn key_buffers<S: AsRef<str>>(
    left: &Frame,
    right: &Frame,
    keys: &[(S, S)],
) -> Result<(KeyBuffer, KeyBuffer)> {
    pairs(keys)?;
    let k = keys.len();
    let (nl, nr) = (left.num_rows(), right.num_rows());
    let mut lw = vec![0u64; nl * k];
    let mut rw = vec![0u64; nr * k];
    for (j, (ln, rn)) in keys.iter().enumerate() {
        let (ln, rn) = (ln.as_ref(), rn.as_ref());
        let lv = left.column(ln)?;
        let rv = right.column(rn)?;
        let (lcol, rcol): (Vec<u64>, Vec<u64>) = if lv.dtype.is_string() && rv.dtype.is_string() {
            factorize_views(left, &lv, right, &rv)
        } else if lv.dtype == rv.dtype {
            let (lc, rc) = (lv.cells().expect("numeric"), rv.cells().expect("numeric"));
            (
                left.rows().iter().map(|&r| lc[r]).collect(),
                right.rows().iter().map(|&r| rc[r]).collect(),
            )
        } else {
            return Err(Error::Join(format!(
                "key {ln} ({:?}) is incompatible with {rn} ({:?})",
                lv.dtype, rv.dtype
            )));
        };
        for (i, w) in lcol.into_iter().enumerate() {
            lw[i * k + j] = w;
        }
        for (i, w) in rcol.into_iter().enumerate() {
            rw[i * k + j] = w;
        }
    }
    Ok((
        KeyBuffer {
            n: nl,
            k,
            words: lw,
        },
        KeyBuffer {
            n: nr,
            k,
            words: rw,
        },
    ))
}

/// Shared codes for two string columns. Dictionary columns translate each
/// distinct code once; the result equals factorizing the decoded values.
fn factorize_views(
    left: &Frame,
    lv: &ColumnView<'_>,
    right: &Frame,
    rv: &ColumnView<'_>,
) -> (Vec<u64>, Vec<u64>) {
    let mut map = FactorMap::new();
    let mut side = |f: &Frame, v: &ColumnView<'_>| -> Vec<u64> {
        match (v.dict, v.cells()) {
            (Some(dict), Some(codes)) => {
                let mut cache: Vec<Option<u64>> = vec![None; dict.len()];
                f.rows()
                    .iter()
                    .map(|&r| {
                        let c = codes[r] as usize;
                        *cache[c].get_or_insert_with(|| {
                            map.code(dict.value(c as u64).expect("valid code"))
                        })
                    })
                    .collect()
            }
            _ => strings(f, v).into_iter().map(|s| map.code(s)).collect(),
        }
    };
    let l = side(left, lv);
    let r = side(right, rv);
    (l, r)
}

/// Key id to ascending row list, in compressed form.
struct Buckets {
    table: KeyTable,
    starts: Vec<usize>,
    rows: Vec<usize>,
}

impl Buckets {
    fn build(keys: &KeyBuffer, opts: &ExecOptions) -> Self {
        let mut table = KeyTable::new(keys.k);
        let ids: Vec<u32> = (0..keys.n)
            .map(|i| {
                let key = keys.row(i);
                table.find_or_insert(key, hash_key(key, opts.key_hash)).0
            })
            .collect();
        let mut starts = vec![0usize; table.len() + 1];
        for &id in &ids {
            starts[id as usize + 1] += 1;
        }
        for g in 0..table.len() {
            starts[g + 1] += starts[g];
        }
        let mut fill = starts.clone();
        let mut rows = vec![0usize; keys.n];
        for (i, &id) in ids.iter().enumerate() {
            rows[fill[id as usize]] = i;
            fill[id as usize] += 1;
        }
        Buckets {
            table,
            starts,
            rows,
        }
    }

    fn matches(&self, key: &[u64], opts: &ExecOptions) -> &[usize] {
        match self.table.find(key, hash_key(key, opts.key_hash)) {
            Some(id) => &self.rows[self.starts[id as usize]..self.starts[id as usize + 1]],
            None => &[],
        }
    }
}

/// Probes `probe` against buckets built on `build`, as (probe, build)
/// logical pairs in probe order.
fn hash_pairs(build: &KeyBuffer, probe: &KeyBuffer, opts: &ExecOptions) -> Vec<(usize, usize)> {
    let buckets = Buckets::build(build, opts);
    let chunk = opts.chunk();
    let parts: Vec<Vec<(usize, usize)>> = (0..probe.n)
        .into_par_iter()
        .chunks(chunk)
        .map(|is| {
            let mut out = Vec::new();
            for i in is {
                for &b in buckets.matches(probe.row(i), opts) {
                    out.push((i, b));
                }
            }
            out
        })
        .collect();
    parts.concat()
}

fn sorted_order(keys: &KeyBuffer) -> Vec<usize> {
    let mut order: Vec<usize> = (0..keys.n).collect();
    order.par_sort_by(|&a, &b| keys.row(a).cmp(keys.row(b)).then(a.cmp(&b)));
    order
}

/// Sorts both sides by key words and merges equal runs.
fn merge_pairs(left: &KeyBuffer, right: &KeyBuffer) -> Vec<(usize, usize)> {
    let (lo, ro) = (sorted_order(left), sorted_order(right));
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < lo.len() && j < ro.len() {
        let (lk, rk) = (left.row(lo[i]), right.row(ro[j]));
        match lk.cmp(rk) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                let i_end = i + lo[i..].iter().take_while(|&&x| left.row(x) == lk).count();
                let j_end = j + ro[j..].iter().take_while(|&&x| right.row(x) == rk).count();
                for &l in &lo[i..i_end] {
                    for &r in &ro[j..j_end] {
                        out.push((l, r));
                    }
                }
                i = i_end;
                j = j_end;
            }
        }
    }
    out.par_sort_unstable();
    out
}

/// Left-major logical pairs for an inner join.
fn logical_pairs(l: &KeyBuffer, r: &KeyBuffer, opts: &ExecOptions) -> Vec<(usize, usize)> {
    match opts.join_mode {
        JoinMode::SortMerge => merge_pairs(l, r),
        JoinMode::Hash => {
            let build_left = match opts.build_side {
                BuildSide::Left => true,
                BuildSide::Right => false,
                BuildSide::Auto => l.n < r.n,
            };
            if build_left {
                let mut out: Vec<(usize, usize)> = hash_pairs(l, r, opts)
                    .into_iter()
                    .map(|(ri, li)| (li, ri))
                    .collect();
                out.par_sort_unstable();
                out
            } else {
                hash_pairs(r, l, opts)
            }
        }
    }
}

/// Physical row pairs matched by an inner join.
pub fn join_index<S: AsRef<str>>(
    left: &Frame,
    right: &Frame,
    keys: &[(S, S)],
    opts: &ExecOptions,
) -> Result<JoinIndex> {
    let (l, r) = key_buffers(left, right, keys)?;
    let (lrows, rrows) = (left.rows(), right.rows());
    let (left_rows, right_rows) = logical_pairs(&l, &r, opts)
        .into_iter()
        .map(|(li, ri)| (lrows[li], rrows[ri]))
        .unzip();
    Ok(JoinIndex {
        left_rows,
        right_rows,
    })
}

pub fn inner_join<S: AsRef<str>>(left: &Frame, right: &Frame, keys: &[(S, S)]) -> Result<Frame> {
    inner_join_with(left, right, keys, &ExecOptions::default())
}

/// All left columns, then right non-key columns (suffixed `_right` on a
/// name clash), one row per matched pair.
pub fn inner_join_with<S: AsRef<str>>(
    left: &Frame,
    right: &Frame,
    keys: &[(S, S)],
    opts: &ExecOptions,
) -> Result<Frame> {
    let index = join_index(left, right, keys, opts)?;
    let right_keys: Vec<&str> = keys.iter().map(|(_, r)| r.as_ref()).collect();
    let kept: Vec<&str> = right
        .names()
        .iter()
        .map(String::as_str)
        .filter(|n| !right_keys.contains(n))
        .collect();
    let renamed = kept
        .iter()
        .map(|&n| {
            if left.names().iter().any(|l| l == n) {
                format!("{n}_right")
            } else {
                n.to_owned()
            }
        })
        .collect();
    let lout = left.gather_rows_with(&index.left_rows, opts)?;
    let rout = right
        .select_columns(&kept)?
        .gather_rows_with(&index.right_rows, opts)?;
    lout.zip_columns(&rout, renamed)
}

fn match_mask<S: AsRef<str>>(
    left: &Frame,
    right: &Frame,
    keys: &[(S, S)],
    opts: &ExecOptions,
) -> Result<Vec<bool>> {
    let (l, r) = key_buffers(left, right, keys)?;
    let mut set = KeyTable::new(r.k);
    for i in 0..r.n {
        let key = r.row(i);
        set.find_or_insert(key, hash_key(key, opts.key_hash));
    }
    let parts: Vec<Vec<bool>> = (0..l.n)
        .into_par_iter()
        .chunks(opts.chunk())
        .map(|is| {
            is.into_iter()
                .map(|i| {
                    let key = l.row(i);
                    set.find(key, hash_key(key, opts.key_hash)).is_some()
                })
                .collect()
        })
        .collect();
    Ok(parts.concat())
}

fn filter_left(left: &Frame, mask: &[bool], keep: bool) -> Frame {
    let rows = left
        .rows()
        .iter()
        .zip(mask)
        .filter(|(_, &m)| m == keep)
        .map(|(&r, _)| r)
        .collect();
    left.with_rows(rows)
}

pub fn semi_join<S: AsRef<str>>(left: &Frame, right: &Frame, keys: &[(S, S)]) -> Result<Frame> {
    semi_join_with(left, right, keys, &ExecOptions::default())
}

/// Left rows with at least one match, as a view in left order.
pub fn semi_join_with<S: AsRef<str>>(
    left: &Frame,
    right: &Frame,
    keys: &[(S, S)],
    opts: &ExecOptions,
) -> Result<Frame> {
    Ok(filter_left(
        left,
        &match_mask(left, right, keys, opts)?,
        true,
    ))
}

pub fn anti_join<S: AsRef<str>>(left: &Frame, right: &Frame, keys: &[(S, S)]) -> Result<Frame> {
    anti_join_with(left, right, keys, &ExecOptions::default())
}

/// Left rows with no match, as a view in left order.
pub fn anti_join_with<S: AsRef<str>>(
    left: &Frame,
    right: &Frame,
    keys: &[(S, S)],
    opts: &ExecOptions,
) -> Result<Frame> {
    Ok(filter_left(
        left,
        &match_mask(left, right, keys, opts)?,
        false,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::KeyHash;
    use crate::frame::FrameBuilder;
    use crate::value::{LogicalDtype, Value};

    fn ints(name: &str, v: Vec<i64>) -> Frame {
        FrameBuilder::new().int64(name, v).unwrap().build().unwrap()
    }

    fn all_modes() -> Vec<ExecOptions> {
        let mut out = Vec::new();
        for join_mode in [JoinMode::Hash, JoinMode::SortMerge] {
            for build_side in [BuildSide::Auto, BuildSide::Left, BuildSide::Right] {
                for key_hash in [KeyHash::default(), KeyHash::Constant] {
                    for chunk_rows in [1, 3, 1024] {
                        out.push(ExecOptions {
                            chunk_rows,
                            join_mode,
                            build_side,
                            key_hash,
                            ..ExecOptions::default()
                        });
                    }
                }
            }
        }
        out
    }

    #[test]
    fn pairs_left_major() {
        let l = ints("k", vec![1, 2, 2]);
        let r = ints("k", vec![2, 3]);
        for opts in all_modes() {
            let idx = join_index(&l, &r, &[("k", "k")], &opts).unwrap();
            assert_eq!(idx.left_rows, vec![1, 2]);
            assert_eq!(idx.right_rows, vec![0, 0]);
        }
        let l = ints("k", vec![5, 1, 5]);
        let r = ints("k", vec![5, 5, 1]);
        for opts in all_modes() {
            let idx = join_index(&l, &r, &[("k", "k")], &opts).unwrap();
            assert_eq!(idx.left_rows, vec![0, 0, 1, 2, 2]);
            assert_eq!(idx.right_rows, vec![0, 1, 2, 0, 1]);
        }
    }

    #[test]
    fn output_schema() {
        let l = FrameBuilder::new()
            .int64("k", vec![1, 2])
            .unwrap()
            .int64("v", vec![10, 20])
            .unwrap()
            .build()
            .unwrap();
        let r = FrameBuilder::new()
            .int64("id", vec![2, 1])
            .unwrap()
            .strings("v", ["b", "a"], 0.5)
            .unwrap()
            .build()
            .unwrap();
        let j = inner_join(&l, &r, &[("k", "id")]).unwrap();
        assert_eq!(j.names(), &["k", "v", "v_right"]);
        assert_eq!(
            j.row_values(0),
            vec![Value::Int(1), Value::Int(10), Value::Str("a".into())]
        );
        assert_eq!(
            j.row_values(1),
            vec![Value::Int(2), Value::Int(20), Value::Str("b".into())]
        );

        let empty = r.with_rows(vec![]);
        let j = inner_join(&l, &empty, &[("k", "id")]).unwrap();
        assert_eq!((j.num_rows(), j.names().len()), (0, 3));
    }

    #[test]
    fn lookup_join_keeps_left() {
        let l = ints("k", vec![3, 1, 2, 3]);
        let r = FrameBuilder::new()
            .int64("pk", vec![1, 2, 3])
            .unwrap()
            .float64("w", vec![0.1, 0.2, 0.3])
            .unwrap()
            .build()
            .unwrap();
        let j = inner_join(&l, &r, &[("k", "pk")]).unwrap();
        assert_eq!(j.num_rows(), 4);
        let ks: Vec<Value> = (0..4).map(|i| j.value(i, 0)).collect();
        assert_eq!(ks, [3, 1, 2, 3].map(Value::Int));
    }

    #[test]
    fn string_keys_across_encodings() {
        let l = FrameBuilder::new()
            .strings("s", ["x", "x", "y", "x"], 0.5)
            .unwrap()
            .build()
            .unwrap();
        assert_eq!(l.dtype("s").unwrap(), LogicalDtype::DictCode);
        let r = FrameBuilder::new()
            .raw("t", ["y", "z", "x"].into_iter().collect())
            .unwrap()
            .build()
            .unwrap();
        for opts in all_modes() {
            let idx = join_index(&l, &r, &[("s", "t")], &opts).unwrap();
            assert_eq!(idx.left_rows, vec![0, 1, 2, 3]);
            assert_eq!(idx.right_rows, vec![2, 2, 0, 2]);
        }
    }

    #[test]
    fn composite_keys_and_views() {
        let l = FrameBuilder::new()
            .int64("a", vec![1, 1, 2, 2])
            .unwrap()
            .int64("b", vec![1, 2, 1, 2])
            .unwrap()
            .build()
            .unwrap()
            .with_rows(vec![3, 1, 0]);
        let r = FrameBuilder::new()
            .int64("a", vec![2, 1])
            .unwrap()
            .int64("b", vec![2, 2])
            .unwrap()
            .build()
            .unwrap();
        let idx = join_index(&l, &r, &[("a", "a"), ("b", "b")], &ExecOptions::default()).unwrap();
        assert_eq!(idx.left_rows, vec![3, 1]);
        assert_eq!(idx.right_rows, vec![0, 1]);
    }

    #[test]
    fn semi_anti_partition() {
        let l = ints("k", vec![1, 2, 3]);
        let r = ints("k", vec![2]);
        let semi = semi_join(&l, &r, &[("k", "k")]).unwrap();
        let anti = anti_join(&l, &r, &[("k", "k")]).unwrap();
        assert_eq!(semi.rows(), &[1]);
        assert_eq!(anti.rows(), &[0, 2]);
        let again = semi_join(&semi, &r, &[("k", "k")]).unwrap();
        assert_eq!(again.rows(), semi.rows());

        let none = r.with_rows(vec![]);
        assert_eq!(semi_join(&l, &none, &[("k", "k")]).unwrap().num_rows(), 0);
        assert_eq!(
            anti_join(&l, &none, &[("k", "k")]).unwrap().rows(),
            l.rows()
        );
    }

    #[test]
    fn errors() {
        let l = ints("k", vec![1]);
        let f = FrameBuilder::new()
            .float64("k", vec![1.0])
            .unwrap()
            .build()
            .unwrap();
        assert!(matches!(
            inner_join(&l, &f, &[("k", "k")]),
            Err(Error::Join(_))
        ));
        assert!(matches!(
            inner_join(&l, &l, &[("k", "nope")]),
            Err(Error::Name(_))
        ));
        let none: [(&str, &str); 0] = [];
        assert!(matches!(inner_join(&l, &l, &none), Err(Error::Join(_))));
    }
}
