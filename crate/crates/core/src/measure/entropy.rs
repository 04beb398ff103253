use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::linear_fit;
use crate::map::MapSpec;

/// Largest total number of block-table entries.
pub const MAX_BLOCK_TABLE: usize = 1 << 24;

/// Minimum windows per distinct longest block.
pub const MIN_VISITS: f64 = 100.0;

/// Counts of symbol blocks of every length `1..=max_len` seen along orbits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockCounts {
    alphabet: usize,
    max_len: usize,
    /// `tables[L - 1][code]`, code = base-`alphabet` value, oldest symbol first.
    tables: Vec<Vec<u64>>,
    windows: Vec<u64>,
}

/// Rolling state for one orbit.
pub(crate) struct BlockTracker {
    code: usize,
    filled: usize,
}

impl BlockCounts {
    pub fn new(alphabet: usize, max_len: usize) -> Result<Self> {
        if max_len == 0 {
            return Err(Error::Parameter("block length must be at least 1".into()));
        }
        let mut sizes = Vec::with_capacity(max_len);
        let mut size = 1usize;
        let mut total = 0usize;
        for _ in 0..max_len {
            size = size
                .checked_mul(alphabet)
                .filter(|&s| s <= MAX_BLOCK_TABLE)
                .ok_or(Error::BlockTableTooLarge {
                    alphabet,
                    len: max_len,
                })?;
            total += size;
            sizes.push(size);
        }
        if total > MAX_BLOCK_TABLE {
            return Err(Error::BlockTableTooLarge {
                alphabet,
                len: max_len,
            });
        }
        Ok(BlockCounts {
            alphabet,
            max_len,
            tables: sizes.into_iter().map(|s| vec![0; s]).collect(),
            windows: vec![0; max_len],
        })
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    /// Number of length-`len` windows counted.
    pub fn windows(&self, len: usize) -> u64 {
        self.windows[len - 1]
    }

    /// Counts of all length-`len` blocks, indexed by code.
    pub fn table(&self, len: usize) -> &[u64] {
        &self.tables[len - 1]
    }

    pub(crate) fn tracker(&self) -> BlockTracker {
        BlockTracker { code: 0, filled: 0 }
    }

    pub(crate) fn merge(&mut self, o: &BlockCounts) {
        for (a, b) in self.tables.iter_mut().zip(&o.tables) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        for (a, b) in self.windows.iter_mut().zip(&o.windows) {
            *a += b;
        }
    }

    /// Counts the blocks of a single symbol sequence (0-based symbols).
    pub fn record_sequence(&mut self, symbols: impl IntoIterator<Item = usize>) {
        let mut t = self.tracker();
        for s in symbols {
            t.push(self, s);
        }
    }
}

impl BlockTracker {
    /// Appends a 0-based symbol and counts every block ending at it.
    #[inline]
    pub(crate) fn push(&mut self, b: &mut BlockCounts, symbol: usize) {
        let top = b.tables[b.max_len - 1].len();
        self.code = (self.code * b.alphabet + symbol) % top;
        self.filled = (self.filled + 1).min(b.max_len);
        let mut modulus = 1;
        for len in 1..=self.filled {
            modulus *= b.alphabet;
            b.tables[len - 1][self.code % modulus] += 1;
            b.windows[len - 1] += 1;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyRow {
    pub len: usize,
    /// Plug-in entropy of the length-`len` block frequencies, in nats.
    pub block_entropy: f64,
    pub distinct: usize,
    pub windows: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    /// Entropy rate in nats per step.
    pub rate: f64,
    pub table: Vec<EntropyRow>,
}

/// Entropy rate from block frequencies: the least-squares slope of the
/// block entropy `H_L` against `L` for `L = 1..=max_len`, or `H_1` when
/// `max_len = 1`.
pub fn entropy_estimate(
    m: &MapSpec,
    blocks: &BlockCounts,
    max_len: usize,
) -> Result<EntropyEstimate> {
    if blocks.alphabet != m.alphabet_size() {
        return Err(Error::Parameter(format!(
            "blocks over {} symbols for a {}-piece map",
            blocks.alphabet,
            m.alphabet_size()
        )));
    }
    if max_len == 0 || max_len > blocks.max_len {
        return Err(Error::Parameter(format!(
            "max_len = {max_len} not in 1..={}",
            blocks.max_len
        )));
    }
    let table: Vec<EntropyRow> = (1..=max_len)
        .map(|len| {
            let n = blocks.windows(len);
            let mut h = 0.0;
            let mut distinct = 0;
            for &c in blocks.table(len) {
                if c > 0 {
                    distinct += 1;
                    let p = c as f64 / n as f64;
                    h -= p * p.ln();
                }
            }
            EntropyRow {
                len,
                block_entropy: h,
                distinct,
                windows: n,
            }
        })
        .collect();
    let last = &table[max_len - 1];
    if last.distinct == 0 || (last.windows as f64) < MIN_VISITS * last.distinct as f64 {
        return Err(Error::Undersampled(format!(
            "{} windows for {} distinct blocks of length {max_len}; need {MIN_VISITS} per block",
            last.windows, last.distinct
        )));
    }
    let rate = if max_len == 1 {
        table[0].block_entropy
    } else {
        let xs: Vec<f64> = table.iter().map(|r| r.len as f64).collect();
        let ys: Vec<f64> = table.iter().map(|r| r.block_entropy).collect();
        linear_fit(&xs, &ys).slope
    };
    Ok(EntropyEstimate { rate, table })
}
