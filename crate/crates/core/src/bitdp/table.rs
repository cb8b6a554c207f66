use super::layout::{low_mask, RowLayout};

/// The dp table of one generation as packed difference rows.
///
/// Row `i` (`0 ≤ i ≤ nA`) encodes `dp[i][j] - dp[i][j-1]` for `j = 1..=nB`; row 0 is all
/// zero. Next to the bits, each row caches the dp value at the start of every machine word,
/// so any entry is recovered with one cached value and one masked popcount.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffTable {
    layout: RowLayout,
    n_rows: usize,
    bits: Vec<u64>,
    boundary: Vec<u32>,
}

impl DiffTable {
    /// The all-zero table (`dp_0`) for `nA` rows and `nB` columns.
    pub fn new(n_a: usize, n_b: usize, block_bits: u32) -> Self {
        let layout = RowLayout::new(n_b, block_bits);
        let cells = (n_a + 1) * layout.words;
        DiffTable {
            layout,
            n_rows: n_a,
            bits: vec![0; cells],
            boundary: vec![0; cells],
        }
    }

    pub fn layout(&self) -> &RowLayout {
        &self.layout
    }

    pub fn block_bits(&self) -> u32 {
        self.layout.block_bits
    }

    /// Number of rows besides row 0, i.e. `nA`.
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.layout.columns
    }

    pub fn row(&self, i: usize) -> &[u64] {
        assert!(i <= self.n_rows, "row {i} out of range 0..={}", self.n_rows);
        let w = self.layout.words;
        &self.bits[i * w..(i + 1) * w]
    }

    /// Row `i - 1` and a mutable row `i`. Call [`DiffTable::refresh_boundary`] after writing.
    pub fn rows_pair_mut(&mut self, i: usize) -> (&[u64], &mut [u64]) {
        assert!(i >= 1 && i <= self.n_rows, "row {i} out of range 1..={}", self.n_rows);
        let w = self.layout.words;
        let (head, tail) = self.bits.split_at_mut(i * w);
        (&head[(i - 1) * w..], &mut tail[..w])
    }

    /// Overwrites row `i` and refreshes its cached values.
    pub fn set_row(&mut self, i: usize, row: &[u64]) {
        assert!(i >= 1 && i <= self.n_rows, "row {i} out of range 1..={}", self.n_rows);
        let w = self.layout.words;
        self.bits[i * w..(i + 1) * w].copy_from_slice(row);
        self.refresh_boundary(i);
    }

    pub fn refresh_boundary(&mut self, i: usize) {
        let w = self.layout.words;
        let mut acc = 0u32;
        for k in 0..w {
            self.boundary[i * w + k] = acc;
            acc += self.bits[i * w + k].count_ones();
        }
    }

    /// `dp[i][j]` in `O(1)`; `j = 0` yields 0.
    pub fn dp_value_at(&self, i: usize, j: usize) -> u32 {
        assert!(i <= self.n_rows, "row {i} out of range 0..={}", self.n_rows);
        debug_assert!(j <= self.layout.columns, "column {j} out of range");
        if j == 0 {
            return 0;
        }
        let p = j - 1;
        let wb = self.layout.word_bits as usize;
        let idx = i * self.layout.words + p / wb;
        self.boundary[idx] + (self.bits[idx] & low_mask((p % wb) as u32 + 1)).count_ones()
    }

    /// `dp[nA][nB]`.
    pub fn final_value(&self) -> u32 {
        self.dp_value_at(self.n_rows, self.layout.columns)
    }

    /// Row `i` as plain dp values `dp[i][1..=nB]`.
    pub fn values(&self, i: usize) -> Vec<u32> {
        let mut acc = 0;
        (1..=self.layout.columns)
            .map(|j| {
                acc += self.layout.bit(self.row(i), j) as u32;
                acc
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_table_reads_zero() {
        let t = DiffTable::new(3, 10, 2);
        for i in 0..=3 {
            for j in 0..=10 {
                assert_eq!(t.dp_value_at(i, j), 0);
            }
        }
    }

    #[test]
    fn single_one() {
        let mut t = DiffTable::new(1, 6, 4);
        let row = t.layout().pack(&[0, 0, 1, 0, 0, 0]);
        t.set_row(1, &row);
        let got: Vec<u32> = (1..=6).map(|j| t.dp_value_at(1, j)).collect();
        assert_eq!(got, vec![0, 0, 1, 1, 1, 1]);
    }

    #[test]
    fn random_rows_match_direct_summation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for b in [1, 3, 5, 7] {
            let n = 257;
            let mut t = DiffTable::new(8, n, b);
            let rows: Vec<Vec<u8>> = (0..8).map(|_| (0..n).map(|_| rng.random_range(0..2)).collect()).collect();
            for (i, r) in rows.iter().enumerate() {
                let packed = t.layout().pack(r);
                t.set_row(i + 1, &packed);
            }
            for _ in 0..10_000 {
                let i = rng.random_range(1..=8);
                let j = rng.random_range(0..=n);
                let direct: u32 = rows[i - 1][..j].iter().map(|&x| x as u32).sum();
                assert_eq!(t.dp_value_at(i, j), direct);
            }
        }
    }

    #[test]
    #[should_panic(expected = "out of range")]
    fn row_out_of_range() {
        DiffTable::new(2, 2, 1).dp_value_at(3, 1);
    }
}
