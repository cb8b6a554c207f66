//! Packed difference rows.
//!
//! Column `j` (1-based) of a row lives at bit `(j - 1) mod W` of word `(j - 1) / W`, where a
//! word holds `K = ⌊64 / B⌋` blocks of `B` bits and `W = K·B`. Within a block, bit position
//! `(j - 1) mod B` holds column `j`, least-significant first. Bits past the last column
//! are always zero.

/// Shape of one packed row.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RowLayout {
    pub columns: usize,
    pub block_bits: u32,
    pub blocks_per_word: u32,
    pub word_bits: u32,
    pub words: usize,
    pub blocks: usize,
}

impl RowLayout {
    pub fn new(columns: usize, block_bits: u32) -> Self {
        assert!((1..=64).contains(&block_bits), "block size {block_bits} out of range");
        let blocks_per_word = 64 / block_bits;
        let word_bits = blocks_per_word * block_bits;
        RowLayout {
            columns,
            block_bits,
            blocks_per_word,
            word_bits,
            words: columns.div_ceil(word_bits as usize),
            blocks: columns.div_ceil(block_bits as usize),
        }
    }

    pub fn zero_row(&self) -> Vec<u64> {
        vec![0; self.words]
    }

    pub fn block_mask(&self) -> u64 {
        low_mask(self.block_bits)
    }

    #[inline]
    fn locate(&self, j: usize) -> (usize, u32) {
        debug_assert!(j >= 1 && j <= self.columns, "column {j} out of range");
        let p = j - 1;
        (p / self.word_bits as usize, (p % self.word_bits as usize) as u32)
    }

    #[inline]
    pub fn bit(&self, row: &[u64], j: usize) -> bool {
        let (w, o) = self.locate(j);
        row[w] >> o & 1 == 1
    }

    #[inline]
    pub fn set_bit(&self, row: &mut [u64], j: usize, on: bool) {
        let (w, o) = self.locate(j);
        if on {
            row[w] |= 1 << o;
        } else {
            row[w] &= !(1 << o);
        }
    }

    /// Block `k` (0-based) as a `B`-bit mask.
    pub fn block(&self, row: &[u64], k: usize) -> u64 {
        let bpw = self.blocks_per_word as usize;
        row[k / bpw] >> ((k % bpw) as u32 * self.block_bits) & self.block_mask()
    }

    pub fn set_block(&self, row: &mut [u64], k: usize, value: u64) {
        let bpw = self.blocks_per_word as usize;
        let shift = (k % bpw) as u32 * self.block_bits;
        let word = &mut row[k / bpw];
        *word = (*word & !(self.block_mask() << shift)) | ((value & self.block_mask()) << shift);
    }

    /// `Σ_{j' ≤ j} row[j']` by scanning; `O(j / W)`.
    pub fn prefix_sum(&self, row: &[u64], j: usize) -> u32 {
        if j == 0 {
            return 0;
        }
        let (w, o) = self.locate(j);
        row[..w].iter().map(|x| x.count_ones()).sum::<u32>() + (row[w] & low_mask(o + 1)).count_ones()
    }

    pub fn total(&self, row: &[u64]) -> u32 {
        row.iter().map(|x| x.count_ones()).sum()
    }

    /// Unpacks into one `0/1` byte per column.
    pub fn unpack(&self, row: &[u64]) -> Vec<u8> {
        (1..=self.columns).map(|j| self.bit(row, j) as u8).collect()
    }

    pub fn pack(&self, bits: &[u8]) -> Vec<u64> {
        assert_eq!(bits.len(), self.columns);
        let mut row = self.zero_row();
        for (p, &b) in bits.iter().enumerate() {
            if b != 0 {
                self.set_bit(&mut row, p + 1, true);
            }
        }
        row
    }

    /// Packs the columns listed in `positions` (1-based) as ones.
    pub fn mask_of(&self, positions: &[u32]) -> Vec<u64> {
        let mut row = self.zero_row();
        for &j in positions {
            self.set_bit(&mut row, j as usize, true);
        }
        row
    }
}

/// The `k` lowest bits set, for `k ≤ 64`.
#[inline]
pub fn low_mask(k: u32) -> u64 {
    if k >= 64 {
        u64::MAX
    } else {
        (1u64 << k) - 1
    }
}

/// Number of columns `j` where `upper(j) - lower(j) ∉ {0, 1}`, comparing the prefix sums
/// (dp values) encoded by two rows of the same layout.
pub fn unit_step_violations(layout: &RowLayout, lower: &[u64], upper: &[u64]) -> u64 {
    let (mut lo, mut hi) = (0i64, 0i64);
    let mut bad = 0;
    for j in 1..=layout.columns {
        lo += layout.bit(lower, j) as i64;
        hi += layout.bit(upper, j) as i64;
        if !(0..=1).contains(&(hi - lo)) {
            bad += 1;
        }
    }
    bad
}
