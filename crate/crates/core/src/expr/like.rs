//! SQL LIKE over bytes: `%` matches any run (including empty), `_` exactly
//! one byte. No escapes.

/// Pattern split at `%` into literal segments (which may contain `_`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LikePattern {
    segments: Vec<Vec<u8>>,
    has_percent: bool,
}

impl LikePattern {
    pub fn new(pattern: &str) -> Self {
        let bytes = pattern.as_bytes();
        Self {
            segments: bytes.split(|&b| b == b'%').map(<[u8]>::to_vec).collect(),
            has_percent: bytes.contains(&b'%'),
        }
    }

    pub fn matches(&self, s: &str) -> bool {
        let s = s.as_bytes();
        if !self.has_percent {
            return s.len() == self.segments[0].len() && seg_eq(&self.segments[0], s);
        }
        let (first, rest) = self.segments.split_first().expect("split yields a segment");
        let (last, middle) = rest.split_last().expect("pattern has a '%'");
        if s.len() < first.len() + last.len() || !seg_eq(first, &s[..first.len()]) {
            return false;
        }
        let tail_start = s.len() - last.len();
        if !seg_eq(last, &s[tail_start..]) {
            return false;
        }
        // Leftmost placement of each middle segment is optimal.
        let mut pos = first.len();
        for seg in middle {
            match find(&s[pos..tail_start], seg) {
                Some(at) => pos += at + seg.len(),
                None => return false,
            }
        }
        true
    }
}

#[inline]
fn seg_eq(seg: &[u8], s: &[u8]) -> bool {
    seg.iter().zip(s).all(|(&p, &c)| p == b'_' || p == c)
}

fn find(hay: &[u8], seg: &[u8]) -> Option<usize> {
    if seg.is_empty() {
        return Some(0);
    }
    if seg.len() > hay.len() {
        return None;
    }
    (0..=hay.len() - seg.len()).find(|&i| seg_eq(seg, &hay[i..i + seg.len()]))
}

pub fn like_match(s: &str, pattern: &str) -> bool {
    LikePattern::new(pattern).matches(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Independent O(|s|·|p|) reference.
    fn dp_match(s: &[u8], p: &[u8]) -> bool {
        let mut dp = vec![vec![false; p.len() + 1]; s.len() + 1];
        dp[0][0] = true;
        for j in 1..=p.len() {
            dp[0][j] = dp[0][j - 1] && p[j - 1] == b'%';
        }
        for i in 1..=s.len() {
            for j in 1..=p.len() {
                dp[i][j] = match p[j - 1] {
                    b'%' => dp[i][j - 1] || dp[i - 1][j],
                    b'_' => dp[i - 1][j - 1],
                    c => dp[i - 1][j - 1] && s[i - 1] == c,
                };
            }
        }
        dp[s.len()][p.len()]
    }

    #[test]
    fn examples() {
        assert!(like_match("xabz", "%ab%"));
        assert!(like_match("", "%"));
        assert!(!like_match("", "_"));
        assert!(like_match(
            "alongside special packages requests",
            "%special%requests%"
        ));
        assert!(!like_match("requests special", "%special%requests%"));
        assert!(like_match("abc", "abc"));
        assert!(!like_match("abcd", "abc"));
        assert!(like_match("abc", "a_c"));
        assert!(like_match("aXbXc", "a%c"));
        assert!(!like_match("ab", "a%b%b"));
        assert!(like_match("PROMO BRUSHED", "PROMO%"));
    }

    proptest! {
        #[test]
        fn agrees_with_dp(s in "[ab_]{0,10}", p in "[ab%_]{0,6}") {
            prop_assert_eq!(like_match(&s, &p), dp_match(s.as_bytes(), p.as_bytes()));
        }
    }
}
