//! Offloaded string storage: one offsets array plus one concatenated byte buffer.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// `n + 1` monotone offsets into a single UTF-8 byte buffer.
///
/// String `i` is `bytes[offsets[i]..offsets[i + 1]]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StringPool {
    offsets: Vec<u64>,
    bytes: Vec<u8>,
}

impl Default for StringPool {
    fn default() -> Self {
        Self {
            offsets: vec![0],
            bytes: Vec::new(),
        }
    }
}

impl StringPool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(rows: usize, bytes: usize) -> Self {
        let mut offsets = Vec::with_capacity(rows + 1);
        offsets.push(0);
        Self {
            offsets,
            bytes: Vec::with_capacity(bytes),
        }
    }

    /// Validates the raw parts: offsets start at 0, never decrease, end at
    /// `bytes.len()`, and every string is valid UTF-8.
    pub fn from_parts(offsets: Vec<u64>, bytes: Vec<u8>) -> Result<Self> {
        if offsets.first() != Some(&0) {
            return Err(Error::Format("string pool offsets must start at 0".into()));
        }
        if *offsets.last().unwrap() != bytes.len() as u64 {
            return Err(Error::Format(format!(
                "string pool offsets end at {} but payload has {} bytes",
                offsets.last().unwrap(),
                bytes.len()
            )));
        }
        if offsets.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Format("string pool offsets are not monotone".into()));
        }
        let pool = Self { offsets, bytes };
        if (0..pool.len()).any(|i| std::str::from_utf8(pool.bytes_at(i)).is_err()) {
            return Err(Error::Format("string pool holds invalid UTF-8".into()));
        }
        Ok(pool)
    }

    pub fn push(&mut self, s: &str) {
        self.bytes.extend_from_slice(s.as_bytes());
        self.offsets.push(self.bytes.len() as u64);
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn offsets(&self) -> &[u64] {
        &self.offsets
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    fn bytes_at(&self, i: usize) -> &[u8] {
        &self.bytes[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }

    pub fn get(&self, i: usize) -> &str {
        // Validated on construction: pushes take &str, from_parts checks UTF-8.
        unsafe { std::str::from_utf8_unchecked(self.bytes_at(i)) }
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &str> + '_ {
        (0..self.len()).map(move |i| self.get(i))
    }

    /// Bytes held in memory: 8 per offset plus the payload.
    pub fn footprint_bytes(&self) -> u64 {
        8 * self.offsets.len() as u64 + self.bytes.len() as u64
    }

    /// New pool holding `rows[0], rows[1], ...` of `self`, copied in parallel
    /// over disjoint chunks of the output buffer.
    pub fn gather(&self, rows: &[usize], chunk_rows: usize) -> StringPool {
        let mut offsets = Vec::with_capacity(rows.len() + 1);
        offsets.push(0u64);
        let mut total = 0u64;
        for &r in rows {
            total += self.offsets[r + 1] - self.offsets[r];
            offsets.push(total);
        }
        let mut bytes = vec![0u8; total as usize];

        let chunk_rows = chunk_rows.max(1);
        let mut slices = Vec::with_capacity(rows.len().div_ceil(chunk_rows));
        let mut rest: &mut [u8] = &mut bytes;
        for (c, chunk) in rows.chunks(chunk_rows).enumerate() {
            let start = offsets[c * chunk_rows];
            let end = offsets[c * chunk_rows + chunk.len()];
            let (head, tail) = rest.split_at_mut((end - start) as usize);
            slices.push((chunk, head));
            rest = tail;
        }
        slices.into_par_iter().for_each(|(chunk, out)| {
            let mut pos = 0;
            for &r in chunk {
                let src = self.bytes_at(r);
                out[pos..pos + src.len()].copy_from_slice(src);
                pos += src.len();
            }
        });
        StringPool { offsets, bytes }
    }
}

impl<'a> FromIterator<&'a str> for StringPool {
    fn from_iter<I: IntoIterator<Item = &'a str>>(iter: I) -> Self {
        let mut pool = StringPool::new();
        for s in iter {
            pool.push(s);
        }
        pool
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_of_small_pool() {
        let pool: StringPool = ["x", "yy", "z"].into_iter().collect();
        assert_eq!(pool.offsets(), &[0, 1, 3, 4]);
        assert_eq!(pool.bytes(), b"xyyz");
        assert_eq!(pool.get(1), "yy");
    }

    #[test]
    fn gather_rebuilds_offsets() {
        let pool: StringPool = ["x", "yy", "z"].into_iter().collect();
        for chunk in [1, 2, 64] {
            let g = pool.gather(&[2, 0], chunk);
            assert_eq!(g.offsets(), &[0, 1, 2]);
            assert_eq!(g.bytes(), b"zx");
        }
        assert!(pool.gather(&[], 4).is_empty());
    }

    #[test]
    fn footprint_counts_offsets_and_payload() {
        let pool: StringPool = ["ab", "c"].into_iter().collect();
        assert_eq!(pool.footprint_bytes(), 27);
    }

    #[test]
    fn from_parts_rejects_bad_offsets() {
        assert!(StringPool::from_parts(vec![1, 2], b"ab".to_vec()).is_err());
        assert!(StringPool::from_parts(vec![0, 2, 1, 2], b"ab".to_vec()).is_err());
        assert!(StringPool::from_parts(vec![0, 3], b"ab".to_vec()).is_err());
        assert!(StringPool::from_parts(vec![0, 1], vec![0xff]).is_err());
        assert_eq!(
            StringPool::from_parts(vec![0, 1, 2], b"ab".to_vec())
                .unwrap()
                .get(1),
            "b"
        );
    }
}
