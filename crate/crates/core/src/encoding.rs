//! Cardinality analysis, dictionary encoding and pairwise factorization.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};

/// Columns whose distinct ratio is strictly above this are offloaded.
pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cardinality {
    Low,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CardinalityReport {
    pub n_rows: usize,
    pub n_distinct: usize,
    pub ratio: f64,
    pub verdict: Cardinality,
}

/// Exact distinct count of `col`; `High` iff `n_distinct / n_rows > threshold`.
pub fn analyze_cardinality<'a, I>(col: I, threshold: f64) -> CardinalityReport
where
    I: IntoIterator<Item = &'a str>,
{
    let mut seen = HashSet::new();
    let mut n_rows = 0;
    for s in col {
        seen.insert(s);
        n_rows += 1;
    }
    let n_distinct = seen.len();
    let ratio = if n_rows == 0 {
        0.0
    } else {
        n_distinct as f64 / n_rows as f64
    };
    CardinalityReport {
        n_rows,
        n_distinct,
        ratio,
        verdict: if ratio > threshold {
            Cardinality::High
        } else {
            Cardinality::Low
        },
    }
}

/// Distinct strings with dense codes in first-occurrence order.
#[derive(Debug, Clone, Default)]
pub struct Dictionary {
    values: Vec<String>,
    index: HashMap<String, u64>,
}

impl PartialEq for Dictionary {
    fn eq(&self, other: &Self) -> bool {
        self.values == other.values
    }
}

impl Dictionary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a dictionary from already-distinct values; duplicates are rejected.
    pub fn from_values(values: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(values.len());
        for (code, v) in values.iter().enumerate() {
            if index.insert(v.clone(), code as u64).is_some() {
                return Err(Error::Format(format!("duplicate dictionary value {v:?}")));
            }
        }
        Ok(Self { values, index })
    }

    /// Code of `s`, inserting it at the end if absent.
    pub fn intern(&mut self, s: &str) -> u64 {
        if let Some(&code) = self.index.get(s) {
            return code;
        }
        let code = self.values.len() as u64;
        self.values.push(s.to_owned());
        self.index.insert(s.to_owned(), code);
        code
    }

    pub fn code_of(&self, s: &str) -> Option<u64> {
        self.index.get(s).copied()
    }

    pub fn value(&self, code: u64) -> Result<&str> {
        self.values
            .get(code as usize)
            .map(String::as_str)
            .ok_or(Error::Code {
                code,
                len: self.values.len(),
            })
    }

    pub fn values(&self) -> &[String] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value_bytes(&self) -> u64 {
        self.values.iter().map(|v| v.len() as u64).sum()
    }

    /// Estimated bytes of the string → code lookup: one owned key copy plus
    /// the `String` header and the code per entry.
    pub fn index_overhead_bytes(&self) -> u64 {
        let per_entry = (std::mem::size_of::<String>() + std::mem::size_of::<u64>()) as u64;
        self.index.len() as u64 * per_entry + self.value_bytes()
    }

    /// Rank of each code under bytewise ordering of the decoded values.
    pub fn sort_ranks(&self) -> Vec<u64> {
        let mut order: Vec<usize> = (0..self.values.len()).collect();
        order.sort_by(|&a, &b| self.values[a].as_bytes().cmp(self.values[b].as_bytes()));
        let mut ranks = vec![0u64; order.len()];
        for (rank, code) in order.into_iter().enumerate() {
            ranks[code] = rank as u64;
        }
        ranks
    }
}

pub fn dict_encode<'a, I>(col: I) -> (Vec<i64>, Dictionary)
where
    I: IntoIterator<Item = &'a str>,
{
    let mut dict = Dictionary::new();
    let codes = col.into_iter().map(|s| dict.intern(s) as i64).collect();
    (codes, dict)
}

pub fn dict_decode(codes: &[i64], dict: &Dictionary) -> Result<Vec<String>> {
    codes
        .iter()
        .map(|&c| {
            if c < 0 {
                return Err(Error::Code {
                    code: c as u64,
                    len: dict.len(),
                });
            }
            dict.value(c as u64).map(str::to_owned)
        })
        .collect()
}

/// Bijection between a string set and `[0, n_distinct)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FactorMap {
    dict: Dictionary,
}

impl FactorMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn code(&mut self, s: &str) -> u64 {
        self.dict.intern(s)
    }

    pub fn forward(&self, s: &str) -> Option<u64> {
        self.dict.code_of(s)
    }

    pub fn reverse(&self, code: u64) -> Option<&str> {
        self.dict.value(code).ok()
    }

    pub fn len(&self) -> usize {
        self.dict.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dict.is_empty()
    }
}

/// Maps the union of both columns into one dense code space, scanning the
/// left column fully before the right.
pub fn factorize_pair<'a, L, R>(left: L, right: R) -> (Vec<i64>, Vec<i64>, FactorMap)
where
    L: IntoIterator<Item = &'a str>,
    R: IntoIterator<Item = &'a str>,
{
    let mut map = FactorMap::new();
    let l = left.into_iter().map(|s| map.code(s) as i64).collect();
    let r = right.into_iter().map(|s| map.code(s) as i64).collect();
    (l, r, map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cardinality_verdicts() {
        let r = analyze_cardinality(["R", "N", "N", "A"], 0.5);
        assert_eq!(
            (r.n_distinct, r.ratio, r.verdict),
            (3, 0.75, Cardinality::High)
        );

        let r = analyze_cardinality(["x"; 10], 0.5);
        assert_eq!((r.ratio, r.verdict), (0.1, Cardinality::Low));

        let r = analyze_cardinality(["a", "b"], 0.5);
        assert_eq!((r.ratio, r.verdict), (1.0, Cardinality::High));

        let r = analyze_cardinality(std::iter::empty(), 0.5);
        assert_eq!(
            (r.n_distinct, r.ratio, r.verdict),
            (0, 0.0, Cardinality::Low)
        );

        // Strictly greater: exactly half stays low.
        let r = analyze_cardinality(["a", "b", "a", "b"], 0.5);
        assert_eq!(r.verdict, Cardinality::Low);
    }

    #[test]
    fn encode_first_occurrence() {
        let (codes, dict) = dict_encode(["R", "N", "N", "A"]);
        assert_eq!(codes, vec![0, 1, 1, 2]);
        assert_eq!(dict.values(), &["R", "N", "A"]);

        let (codes, dict) = dict_encode(std::iter::empty());
        assert!(codes.is_empty() && dict.is_empty());

        let (codes, dict) = dict_encode(["x", "x", "x"]);
        assert_eq!(codes, vec![0, 0, 0]);
        assert_eq!(dict.values(), &["x"]);
    }

    #[test]
    fn decode_inverse_and_bounds() {
        let dict = Dictionary::from_values(vec!["R".into(), "N".into(), "A".into()]).unwrap();
        assert_eq!(
            dict_decode(&[0, 1, 1, 2], &dict).unwrap(),
            vec!["R", "N", "N", "A"]
        );
        assert!(dict_decode(&[], &dict).unwrap().is_empty());
        assert!(matches!(
            dict_decode(&[3], &dict),
            Err(Error::Code { code: 3, len: 3 })
        ));
        assert!(dict_decode(&[-1], &dict).is_err());
    }

    #[test]
    fn factorize_examples() {
        let (l, r, map) = factorize_pair(["a", "b", "a"], ["b", "c"]);
        assert_eq!(l, vec![0, 1, 0]);
        assert_eq!(r, vec![1, 2]);
        assert_eq!(map.forward("c"), Some(2));
        assert_eq!(map.reverse(0), Some("a"));

        let (l, r, _) = factorize_pair(["q", "p", "q"], std::iter::empty());
        assert_eq!(l, dict_encode(["q", "p", "q"]).0);
        assert!(r.is_empty());

        let (l, r, _) = factorize_pair(["a", "b"], ["c", "d"]);
        assert!(l.iter().all(|c| !r.contains(c)));
    }

    #[test]
    fn sort_ranks_order_by_value() {
        let dict = Dictionary::from_values(vec!["R".into(), "N".into(), "A".into()]).unwrap();
        assert_eq!(dict.sort_ranks(), vec![2, 1, 0]);
    }

    fn small_strings() -> impl Strategy<Value = Vec<String>> {
        prop::collection::vec("[a-d]{0,3}", 0..40)
    }

    proptest! {
        #[test]
        fn round_trip(col in small_strings()) {
            let (codes, dict) = dict_encode(col.iter().map(String::as_str));
            prop_assert_eq!(dict_decode(&codes, &dict).unwrap(), col.clone());
            let max = codes.iter().max().map_or(0, |m| m + 1) as usize;
            prop_assert_eq!(max, dict.len());
        }

        #[test]
        fn factorize_consistency(l in small_strings(), r in small_strings()) {
            let (lc, rc, map) = factorize_pair(l.iter().map(String::as_str), r.iter().map(String::as_str));
            for (i, a) in l.iter().enumerate() {
                for (j, b) in r.iter().enumerate() {
                    prop_assert_eq!(a == b, lc[i] == rc[j]);
                }
            }
            let max = lc.iter().chain(&rc).max().map_or(0, |m| m + 1) as usize;
            prop_assert_eq!(max, map.len());
        }

        #[test]
        fn threshold_monotone(col in small_strings(), t in 0.01f64..1.0, dt in 0.0f64..0.5) {
            let lo = analyze_cardinality(col.iter().map(String::as_str), t);
            let hi = analyze_cardinality(col.iter().map(String::as_str), (t + dt).min(1.0));
            prop_assert!(!(lo.verdict == Cardinality::Low && hi.verdict == Cardinality::High));
        }
    }
}
