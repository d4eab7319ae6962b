use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use super::{PlainTable, PlainType};
use crate::error::{Error, Result};
use crate::frame::SortKey;
use crate::groupby::{AggFunc, AggSpec};
use crate::value::Value;

fn positions<S: AsRef<str>>(t: &PlainTable, names: &[S]) -> Result<Vec<usize>> {
    names.iter().map(|n| t.position(n.as_ref())).collect()
}

enum Acc {
    Count(i64),
    IntSum(i64),
    FloatSum(f64),
    Best(Option<Value>),
    Distinct(BTreeSet<Value>),
}

/// Groups by `keys` in first-occurrence order, then aggregates.
pub fn naive_groupby<S: AsRef<str>>(
    t: &PlainTable,
    keys: &[S],
    specs: &[AggSpec],
) -> Result<PlainTable> {
    let inputs = specs
        .iter()
        .map(|s| {
            let j = t.position(&s.input)?;
            let ty = t.types[j];
            if matches!(s.func, AggFunc::Sum | AggFunc::Mean)
                && !matches!(ty, PlainType::Int | PlainType::Float)
            {
                return Err(Error::Agg(format!(
                    "{:?} of {ty:?} column {}",
                    s.func, s.input
                )));
            }
            Ok((j, ty))
        })
        .collect::<Result<Vec<_>>>()?;
    let key_cols = positions(t, keys)?;

    let mut index: BTreeMap<Vec<Value>, usize> = BTreeMap::new();
    let mut groups: Vec<(Vec<Value>, Vec<usize>)> = Vec::new();
    if key_cols.is_empty() {
        groups.push((Vec::new(), Vec::new()));
    }
    for (i, row) in t.rows.iter().enumerate() {
        let key: Vec<Value> = key_cols.iter().map(|&j| row[j].clone()).collect();
        let g = match index.get(&key) {
            Some(&g) => g,
            None if key_cols.is_empty() => 0,
            None => {
                index.insert(key.clone(), groups.len());
                groups.push((key, Vec::new()));
                groups.len() - 1
            }
        };
        groups[g].1.push(i);
    }

    let mut names: Vec<String> = key_cols.iter().map(|&j| t.names[j].clone()).collect();
    let mut types: Vec<PlainType> = key_cols.iter().map(|&j| t.types[j]).collect();
    for (s, &(_, ty)) in specs.iter().zip(&inputs) {
        names.push(s.output.clone());
        types.push(match s.func {
            AggFunc::Count | AggFunc::CountDistinct => PlainType::Int,
            AggFunc::Mean => PlainType::Float,
            AggFunc::Sum | AggFunc::Min | AggFunc::Max => ty,
        });
    }
    for (i, n) in names.iter().enumerate() {
        if names[..i].contains(n) {
            return Err(Error::DuplicateName(n.clone()));
        }
    }

    let mut out = PlainTable::new(names, types);
    for (key, members) in &groups {
        let mut row = key.clone();
        for (s, &(j, ty)) in specs.iter().zip(&inputs) {
            let mut acc = match (s.func, ty) {
                (AggFunc::Count, _) => Acc::Count(0),
                (AggFunc::Sum | AggFunc::Mean, PlainType::Int) => Acc::IntSum(0),
                (AggFunc::Sum | AggFunc::Mean, _) => Acc::FloatSum(0.0),
                (AggFunc::Min | AggFunc::Max, _) => Acc::Best(None),
                (AggFunc::CountDistinct, _) => Acc::Distinct(BTreeSet::new()),
            };
            for &i in members {
                let v = &t.rows[i][j];
                match (&mut acc, v) {
                    (Acc::Count(c), _) => *c += 1,
                    (Acc::IntSum(a), Value::Int(x)) => {
                        *a = a.checked_add(*x).ok_or_else(|| {
                            Error::Overflow(format!("sum of {} overflows i64", s.input))
                        })?;
                    }
                    (Acc::FloatSum(a), Value::Float(x)) => *a += x,
                    (Acc::Best(b), v) => {
                        let better = match b {
                            None => true,
                            Some(cur) if s.func == AggFunc::Min => v < cur,
                            Some(cur) => v > cur,
                        };
                        if better {
                            *b = Some(v.clone());
                        }
                    }
                    (Acc::Distinct(set), v) => {
                        set.insert(v.clone());
                    }
                    (_, v) => panic!("unexpected value {v:?}"),
                }
            }
            let n = members.len() as f64;
            row.push(match acc {
                Acc::Count(c) => Value::Int(c),
                Acc::IntSum(a) if s.func == AggFunc::Mean => Value::Float(a as f64 / n),
                Acc::IntSum(a) => Value::Int(a),
                Acc::FloatSum(a) if s.func == AggFunc::Mean => Value::Float(a / n),
                Acc::FloatSum(a) => Value::Float(a),
                Acc::Best(Some(v)) => v,
                Acc::Best(None) => {
                    return Err(Error::Agg(format!(
                        "{:?} of an empty group ({})",
                        s.func, s.input
                    )));
                }
                Acc::Distinct(set) => Value::Int(set.len() as i64),
            });
        }
        out.rows.push(row);
    }
    Ok(out)
}

fn key_columns<S: AsRef<str>>(
    l: &PlainTable,
    r: &PlainTable,
    keys: &[(S, S)],
) -> Result<Vec<(usize, usize)>> {
    if keys.is_empty() {
        return Err(Error::Join("at least one key pair is required".into()));
    }
    keys.iter()
        .map(|(a, b)| {
            let (i, j) = (l.position(a.as_ref())?, r.position(b.as_ref())?);
            if l.types[i] != r.types[j] {
                return Err(Error::Join(format!(
                    "key {} ({:?}) is incompatible with {} ({:?})",
                    a.as_ref(),
                    l.types[i],
                    b.as_ref(),
                    r.types[j]
                )));
            }
            Ok((i, j))
        })
        .collect()
}

fn matches(lrow: &[Value], rrow: &[Value], cols: &[(usize, usize)]) -> bool {
    cols.iter().all(|&(i, j)| lrow[i] == rrow[j])
}

/// Nested-loop inner join: for each left row, matching right rows in order.
pub fn naive_join<S: AsRef<str>>(
    l: &PlainTable,
    r: &PlainTable,
    keys: &[(S, S)],
) -> Result<PlainTable> {
    let cols = key_columns(l, r, keys)?;
    let kept: Vec<usize> = (0..r.names.len())
        .filter(|j| !cols.iter().any(|&(_, k)| k == *j))
        .collect();
    let mut names = l.names.clone();
    let mut types = l.types.clone();
    for &j in &kept {
        let n = &r.names[j];
        names.push(if l.names.contains(n) {
            format!("{n}_right")
        } else {
            n.clone()
        });
        types.push(r.types[j]);
    }
    for (i, n) in names.iter().enumerate() {
        if names[..i].contains(n) {
            return Err(Error::DuplicateName(n.clone()));
        }
    }
    let mut out = PlainTable::new(names, types);
    for lrow in &l.rows {
        for rrow in &r.rows {
            if matches(lrow, rrow, &cols) {
                let mut row = lrow.clone();
                row.extend(kept.iter().map(|&j| rrow[j].clone()));
                out.rows.push(row);
            }
        }
    }
    Ok(out)
}

fn keep_left<S: AsRef<str>>(
    l: &PlainTable,
    r: &PlainTable,
    keys: &[(S, S)],
    want_match: bool,
) -> Result<PlainTable> {
    let cols = key_columns(l, r, keys)?;
    let mut out = PlainTable::new(l.names.clone(), l.types.clone());
    for lrow in &l.rows {
        if r.rows.iter().any(|rrow| matches(lrow, rrow, &cols)) == want_match {
            out.rows.push(lrow.clone());
        }
    }
    Ok(out)
}

pub fn naive_semi_join<S: AsRef<str>>(
    l: &PlainTable,
    r: &PlainTable,
    keys: &[(S, S)],
) -> Result<PlainTable> {
    keep_left(l, r, keys, true)
}

pub fn naive_anti_join<S: AsRef<str>>(
    l: &PlainTable,
    r: &PlainTable,
    keys: &[(S, S)],
) -> Result<PlainTable> {
    keep_left(l, r, keys, false)
}

/// Stable sort on decoded values.
pub fn naive_sort(t: &PlainTable, keys: &[SortKey]) -> Result<PlainTable> {
    let cols: Vec<(usize, bool)> = keys
        .iter()
        .map(|k| Ok((t.position(&k.name)?, k.ascending)))
        .collect::<Result<_>>()?;
    let mut out = t.clone();
    out.rows.sort_by(|a, b| {
        for &(j, asc) in &cols {
            let ord = a[j].cmp(&b[j]);
            if ord != Ordering::Equal {
                return if asc { ord } else { ord.reverse() };
            }
        }
        Ordering::Equal
    });
    Ok(out)
}

pub fn naive_limit(t: &PlainTable, k: usize) -> PlainTable {
    let mut out = t.clone();
    out.rows.truncate(k);
    out
}

pub fn naive_select<S: AsRef<str>>(t: &PlainTable, names: &[S]) -> Result<PlainTable> {
    let cols = positions(t, names)?;
    for (i, j) in cols.iter().enumerate() {
        if cols[..i].contains(j) {
            return Err(Error::DuplicateName(t.names[*j].clone()));
        }
    }
    Ok(PlainTable {
        names: cols.iter().map(|&j| t.names[j].clone()).collect(),
        types: cols.iter().map(|&j| t.types[j]).collect(),
        rows: t
            .rows
            .iter()
            .map(|r| cols.iter().map(|&j| r[j].clone()).collect())
            .collect(),
    })
}

/// Rows of each table in turn; names and types must agree.
pub fn naive_concat(tables: &[PlainTable]) -> Result<PlainTable> {
    let Some(first) = tables.first() else {
        return Ok(PlainTable::new(Vec::new(), Vec::new()));
    };
    let mut out = PlainTable::new(first.names.clone(), first.types.clone());
    for t in tables {
        if t.names != first.names || t.types != first.types {
            return Err(Error::Schema("concat schema mismatch".into()));
        }
        out.rows.extend(t.rows.iter().cloned());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(name: &str, v: &[i64]) -> PlainTable {
        let mut t = PlainTable::new(vec![name.into()], vec![PlainType::Int]);
        t.rows = v.iter().map(|&x| vec![Value::Int(x)]).collect();
        t
    }

    #[test]
    fn join_examples() {
        let mut l = ints("k", &[1, 2, 2]);
        l.names.push("pos".into());
        l.types.push(PlainType::Int);
        for (i, r) in l.rows.iter_mut().enumerate() {
            r.push(Value::Int(i as i64));
        }
        let r = ints("k", &[2, 3]);
        let j = naive_join(&l, &r, &[("k", "k")]).unwrap();
        let pos: Vec<&Value> = j.column("pos").unwrap();
        assert_eq!(pos, [&Value::Int(1), &Value::Int(2)]);

        let l = ints("k", &[1, 2, 3]);
        let r = ints("k", &[2]);
        assert_eq!(
            naive_semi_join(&l, &r, &[("k", "k")]).unwrap().rows,
            vec![vec![Value::Int(2)]]
        );
        assert_eq!(
            naive_anti_join(&l, &r, &[("k", "k")]).unwrap().num_rows(),
            2
        );
    }

    #[test]
    fn groupby_examples() {
        let mut t = PlainTable::new(
            vec!["a".into(), "b".into(), "v".into()],
            vec![PlainType::Int, PlainType::Str, PlainType::Int],
        );
        for (a, b, v) in [(1, "A", 10), (2, "B", 20), (1, "A", 30)] {
            t.rows
                .push(vec![Value::Int(a), Value::Str(b.into()), Value::Int(v)]);
        }
        let g = naive_groupby(&t, &["a", "b"], &[AggSpec::new("v", AggFunc::Sum, "s")]).unwrap();
        assert_eq!(
            g.rows[0],
            vec![Value::Int(1), Value::Str("A".into()), Value::Int(40)]
        );
        assert_eq!(g.rows[1][2], Value::Int(20));

        let none: [&str; 0] = [];
        let g = naive_groupby(&t, &none, &[AggSpec::new("v", AggFunc::Sum, "s")]).unwrap();
        assert_eq!(g.rows, vec![vec![Value::Int(60)]]);
        let empty = naive_limit(&t, 0);
        let g = naive_groupby(&empty, &none, &[AggSpec::new("v", AggFunc::Count, "c")]).unwrap();
        assert_eq!(g.rows, vec![vec![Value::Int(0)]]);
        assert!(matches!(
            naive_groupby(&t, &["a"], &[AggSpec::new("b", AggFunc::Sum, "s")]),
            Err(Error::Agg(_))
        ));
    }

    #[test]
    fn sort_is_stable() {
        let mut t = PlainTable::new(
            vec!["k".into(), "p".into()],
            vec![PlainType::Str, PlainType::Int],
        );
        for (i, k) in ["R", "N", "A", "N"].iter().enumerate() {
            t.rows
                .push(vec![Value::Str((*k).into()), Value::Int(i as i64)]);
        }
        let s = naive_sort(&t, &[SortKey::asc("k")]).unwrap();
        let order: Vec<&Value> = s.column("p").unwrap();
        assert_eq!(
            order,
            [
                &Value::Int(2),
                &Value::Int(1),
                &Value::Int(3),
                &Value::Int(0)
            ]
        );
    }
}
