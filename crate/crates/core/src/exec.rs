//! Execution knobs shared by the operators.
//!
//! None of these change results; they only select strategies and chunking.
//! Thread count comes from the enclosing rayon pool (see [`with_threads`]).

use crate::error::{Error, Result};

pub const DEFAULT_CHUNK_ROWS: usize = 8192;
pub const DEFAULT_HASH_SEED: u64 = 0x5eed_cafe_f00d_d00d;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GroupStrategy {
    /// Row-major key buffer, one hash per row over all key words.
    #[default]
    Transposed,
    /// Column-at-a-time dense codes with incrementally mixed hashes.
    Incremental,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum JoinMode {
    #[default]
    Hash,
    SortMerge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BuildSide {
    /// Smaller logical side; ties build the right.
    #[default]
    Auto,
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeyHash {
    Xxh3 {
        seed: u64,
    },
    /// Every key hashes to the same value. Exists to exercise collision paths.
    Constant,
}

impl Default for KeyHash {
    fn default() -> Self {
        KeyHash::Xxh3 {
            seed: DEFAULT_HASH_SEED,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecOptions {
    pub chunk_rows: usize,
    pub group_strategy: GroupStrategy,
    pub join_mode: JoinMode,
    pub build_side: BuildSide,
    pub key_hash: KeyHash,
}

impl Default for ExecOptions {
    fn default() -> Self {
        Self {
            chunk_rows: DEFAULT_CHUNK_ROWS,
            group_strategy: GroupStrategy::default(),
            join_mode: JoinMode::default(),
            build_side: BuildSide::default(),
            key_hash: KeyHash::default(),
        }
    }
}

impl ExecOptions {
    pub fn chunk(&self) -> usize {
        self.chunk_rows.max(1)
    }
}

/// Runs `f` inside a dedicated pool of `threads` workers.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Schema(format!("cannot build thread pool: {e}")))?;
    Ok(pool.install(f))
}
