//! Alphabet compression and occurrence bookkeeping.
//!
//! Both input sequences are remapped onto ranks `1..=t` of their merged, sorted set of
//! distinct values. Positions are 1-based throughout; `0` is the "no position" sentinel.

/// 1-based rank of a value in the merged sorted alphabet.
pub type Rank = u32;
/// 1-based position inside a sequence.
pub type Pos = u32;

/// Both sequences expressed over the compressed alphabet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankedInput {
    a: Vec<Rank>,
    b: Vec<Rank>,
    sigma: Vec<i64>,
    cnt: Vec<u32>,
    occ_a: Vec<Vec<Pos>>,
    occ_b: Vec<Vec<Pos>>,
}

/// Sort-based compression of two integer sequences.
pub fn compress(raw_a: &[i64], raw_b: &[i64]) -> RankedInput {
    let mut sigma: Vec<i64> = raw_a.iter().chain(raw_b).copied().collect();
    sigma.sort_unstable();
    sigma.dedup();

    let rank_of = |value: &i64| -> Rank {
        // every value is present, so the search always hits
        sigma.binary_search(value).expect("value in alphabet") as Rank + 1
    };
    let a: Vec<Rank> = raw_a.iter().map(rank_of).collect();
    let b: Vec<Rank> = raw_b.iter().map(rank_of).collect();

    let t = sigma.len();
    let mut occ_a = vec![Vec::new(); t];
    let mut occ_b = vec![Vec::new(); t];
    for (x, &v) in a.iter().enumerate() {
        occ_a[v as usize - 1].push(x as Pos + 1);
    }
    for (y, &v) in b.iter().enumerate() {
        occ_b[v as usize - 1].push(y as Pos + 1);
    }
    let cnt = occ_a
        .iter()
        .zip(&occ_b)
        .map(|(oa, ob)| (oa.len() + ob.len()) as u32)
        .collect();

    RankedInput {
        a,
        b,
        sigma,
        cnt,
        occ_a,
        occ_b,
    }
}

impl RankedInput {
    /// Ranks of `A`; `a()[x - 1]` is the rank at position `x`.
    pub fn a(&self) -> &[Rank] {
        &self.a
    }

    pub fn b(&self) -> &[Rank] {
        &self.b
    }

    pub fn n_a(&self) -> usize {
        self.a.len()
    }

    pub fn n_b(&self) -> usize {
        self.b.len()
    }

    /// The size parameter used by all complexity-driven choices: `max(nA, nB)`.
    pub fn n(&self) -> usize {
        self.a.len().max(self.b.len())
    }

    /// Number of distinct values.
    pub fn t(&self) -> usize {
        self.sigma.len()
    }

    /// Rank → original value, `sigma()[v - 1]`.
    pub fn sigma(&self) -> &[i64] {
        &self.sigma
    }

    /// Combined occurrence counts, `counts()[v - 1] = cnt(v)`.
    pub fn counts(&self) -> &[u32] {
        &self.cnt
    }

    pub fn cnt(&self, v: Rank) -> u32 {
        self.cnt[self.index(v)]
    }

    /// Sorted positions of rank `v` in `A`.
    pub fn occ_a(&self, v: Rank) -> &[Pos] {
        &self.occ_a[self.index(v)]
    }

    /// Sorted positions of rank `v` in `B`.
    pub fn occ_b(&self, v: Rank) -> &[Pos] {
        &self.occ_b[self.index(v)]
    }

    /// Number of `σ[v]`-pairs, `|occ_a(v)|·|occ_b(v)|`.
    pub fn pair_count(&self, v: Rank) -> u64 {
        self.occ_a(v).len() as u64 * self.occ_b(v).len() as u64
    }

    /// Total number of matching pairs over all values.
    pub fn total_pairs(&self) -> u64 {
        (1..=self.t() as Rank).map(|v| self.pair_count(v)).sum()
    }

    /// All `σ[v]`-pairs ordered by `x`, then `y`.
    pub fn matching_pairs(&self, v: Rank) -> Vec<(Pos, Pos)> {
        let ys = self.occ_b(v);
        self.occ_a(v)
            .iter()
            .flat_map(|&x| ys.iter().map(move |&y| (x, y)))
            .collect()
    }

    fn index(&self, v: Rank) -> usize {
        assert!(
            v >= 1 && v as usize <= self.sigma.len(),
            "rank {v} out of range 1..={}",
            self.sigma.len()
        );
        v as usize - 1
    }
}

/// Previous occurrence of the same value, per position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrevArrays {
    prev_a: Vec<Pos>,
    prev_b: Vec<Pos>,
}

impl PrevArrays {
    /// `prev_a()[x - 1]`: greatest `x' < x` with `A[x'] = A[x]`, or 0.
    pub fn prev_a(&self) -> &[Pos] {
        &self.prev_a
    }

    pub fn prev_b(&self) -> &[Pos] {
        &self.prev_b
    }
}

pub fn build_prev_arrays(input: &RankedInput) -> PrevArrays {
    fn link(len: usize, occ: &[Vec<Pos>]) -> Vec<Pos> {
        let mut prev = vec![0; len];
        for list in occ {
            for w in list.windows(2) {
                prev[w[1] as usize - 1] = w[0];
            }
        }
        prev
    }
    PrevArrays {
        prev_a: link(input.n_a(), &input.occ_a),
        prev_b: link(input.n_b(), &input.occ_b),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn compress_examples() {
        let r = compress(&[3, 9, 3], &[9, 3]);
        assert_eq!(r.sigma(), &[3, 9]);
        assert_eq!(r.a(), &[1, 2, 1]);
        assert_eq!(r.b(), &[2, 1]);
        assert_eq!(r.counts(), &[3, 2]);

        let r = compress(&[], &[5]);
        assert_eq!(r.t(), 1);
        assert!(r.a().is_empty());
        assert_eq!(r.b(), &[1]);
        assert_eq!(r.counts(), &[1]);

        let r = compress(&[-7, 0, -7], &[0]);
        assert_eq!(r.sigma(), &[-7, 0]);
        assert_eq!(r.a(), &[1, 2, 1]);
        assert_eq!(r.b(), &[2]);
    }

    #[test]
    fn empty_inputs() {
        let r = compress(&[], &[]);
        assert_eq!(r.t(), 0);
        assert_eq!(r.total_pairs(), 0);
    }

    #[test]
    fn matching_pairs_examples() {
        let r = compress(&[1, 1], &[1]);
        assert_eq!(r.matching_pairs(1), vec![(1, 1), (2, 1)]);

        let r = compress(&[1], &[2]);
        assert_eq!(r.matching_pairs(1), vec![]);

        let r = compress(&[1, 2, 1], &[1, 1]);
        assert_eq!(r.matching_pairs(1), vec![(1, 1), (1, 2), (3, 1), (3, 2)]);
        assert_eq!(r.pair_count(1), 4);
    }

    #[test]
    #[should_panic(expected = "out of range")]
    fn matching_pairs_rank_out_of_range() {
        compress(&[1], &[1]).matching_pairs(2);
    }

    #[test]
    fn prev_arrays_examples() {
        let p = build_prev_arrays(&compress(&[1, 2, 1, 1], &[]));
        assert_eq!(p.prev_a(), &[0, 0, 1, 3]);
        let p = build_prev_arrays(&compress(&[1, 2, 3], &[]));
        assert_eq!(p.prev_a(), &[0, 0, 0]);
        let p = build_prev_arrays(&compress(&[], &[2, 2, 2]));
        assert_eq!(p.prev_b(), &[0, 1, 2]);
    }

    proptest! {
        #[test]
        fn ranked_input_invariants(
            raw_a in proptest::collection::vec(-20i64..20, 0..40),
            raw_b in proptest::collection::vec(-20i64..20, 0..40),
        ) {
            let r = compress(&raw_a, &raw_b);
            prop_assert!(r.sigma().windows(2).all(|w| w[0] < w[1]));
            for i in 0..raw_a.len() {
                for j in 0..raw_a.len() {
                    prop_assert_eq!(raw_a[i] < raw_a[j], r.a()[i] < r.a()[j]);
                }
                for j in 0..raw_b.len() {
                    prop_assert_eq!(raw_a[i] < raw_b[j], r.a()[i] < r.b()[j]);
                    prop_assert_eq!(raw_a[i] == raw_b[j], r.a()[i] == r.b()[j]);
                }
            }
            let total: u64 = r.counts().iter().map(|&c| c as u64).sum();
            prop_assert_eq!(total as usize, raw_a.len() + raw_b.len());

            let prev = build_prev_arrays(&r);
            for v in 1..=r.t() as Rank {
                prop_assert!(r.cnt(v) >= 1);
                prop_assert!(r.occ_a(v).windows(2).all(|w| w[0] < w[1]));
                for (x, y) in r.matching_pairs(v) {
                    prop_assert_eq!(r.a()[x as usize - 1], v);
                    prop_assert_eq!(r.b()[y as usize - 1], v);
                }
            }
            for (x, &p) in prev.prev_a().iter().enumerate() {
                let x = x + 1;
                prop_assert!((p as usize) < x);
                let expect = (1..x).rev().find(|&q| raw_a[q - 1] == raw_a[x - 1]).unwrap_or(0);
                prop_assert_eq!(p as usize, expect);
            }
        }
    }
}
