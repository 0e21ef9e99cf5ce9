//! Word-packed indicator vector of a finite integer set.

/// Indicator of a set of integers over the window `[offset, offset + len)`.
///
/// Bit `i` is set iff `offset + i` belongs to the set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Indicator {
    offset: i64,
    len: usize,
    words: Vec<u64>,
}

impl Indicator {
    /// Builds the indicator of a strictly increasing, non-empty slice.
    pub fn from_sorted(elements: &[i64]) -> Self {
        let offset = elements[0];
        let len = (elements[elements.len() - 1] - offset + 1) as usize;
        let mut words = vec![0u64; len.div_ceil(64)];
        for &v in elements {
            let i = (v - offset) as usize;
            words[i / 64] |= 1u64 << (i % 64);
        }
        Indicator { offset, len, words }
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    /// Number of bit positions covered.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, value: i64) -> bool {
        if value < self.offset {
            return false;
        }
        let i = (value - self.offset) as usize;
        i < self.len && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// `popcount(bits & (bits >> shift))`: the number of set positions `i`
    /// such that `i + shift` is also set.
    pub fn shifted_and_count(&self, shift: usize) -> u64 {
        if shift >= self.len {
            return 0;
        }
        let q = shift / 64;
        let r = shift % 64;
        let n = self.words.len();
        let mut total = 0u64;
        for j in 0..n - q {
            let hi = self.words[j + q];
            let shifted = if r == 0 {
                hi
            } else {
                let carry = if j + q + 1 < n {
                    self.words[j + q + 1] << (64 - r)
                } else {
                    0
                };
                (hi >> r) | carry
            };
            total += (self.words[j] & shifted).count_ones() as u64;
        }
        total
    }
}
