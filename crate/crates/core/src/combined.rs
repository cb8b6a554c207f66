//! The hybrid solver: values occurring often are handled by the tabulated dp, runs of rare
//! values by the pair solver.
//!
//! The alphabet is cut into fragments, each a single frequent value or a maximal run of rare
//! ones. The dp table is brought up to date once per fragment. Inside a rare fragment every
//! pair's result is computed against the table as it stood before the fragment; afterwards
//! the table is rebuilt row by row by a block-wise maximum with the row above followed by
//! the suffix maxima of that row's results.

use std::time::Instant;

use crate::alphabet::{Pos, RankedInput, Rank};
use crate::bitdp::{
    apply_phase, auto_block_bits, table_budget, unit_step_violations, BlockTables, DiffTable, DpStats, PhaseScratch,
    RowEngine, RowLayout, MAX_BLOCK_BITS,
};
use crate::bitdp::layout::low_mask;
use crate::pairsolver::{lcwis_equal_phase, solve_value_phase, ChainBase, PairOptions, PairStats, ResultLevels};
use crate::{Error, Result, Variant};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FragmentKind {
    Frequent,
    Rare,
}

/// A contiguous rank interval `[lo, hi]`; frequent fragments are single ranks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Fragment {
    pub kind: FragmentKind,
    pub lo: Rank,
    pub hi: Rank,
}

/// Default threshold `c = max(1, round(√(log₂ n) · log₂ log₂ n))`.
pub fn default_threshold(n: usize) -> usize {
    if n < 4 {
        return 1;
    }
    let l = (n as f64).log2();
    ((l.sqrt() * l.log2()).round() as usize).max(1)
}

/// Cuts ranks `1..=counts.len()` into fragments: a value is frequent when `cnt(v) > n / c`.
pub fn partition_fragments(counts: &[u32], n: usize, c: usize) -> Vec<Fragment> {
    assert!(c >= 1, "threshold must be positive");
    let mut out: Vec<Fragment> = Vec::new();
    for (k, &cnt) in counts.iter().enumerate() {
        let v = k as Rank + 1;
        if cnt as u64 * c as u64 > n as u64 {
            out.push(Fragment {
                kind: FragmentKind::Frequent,
                lo: v,
                hi: v,
            });
        } else {
            match out.last_mut() {
                Some(f) if f.kind == FragmentKind::Rare => f.hi = v,
                _ => out.push(Fragment {
                    kind: FragmentKind::Rare,
                    lo: v,
                    hi: v,
                }),
            }
        }
    }
    out
}

/// Block tables for the row maximum `max(P, Q)` of two difference rows, keyed by a block of
/// each and the difference `P - Q` just before the block, clamped to `[-1, B]`.
#[derive(Clone, Debug)]
pub struct MergeTables {
    block_bits: u32,
    row_max: Vec<u8>,
}

impl MergeTables {
    pub fn build(block_bits: u32) -> Result<Self> {
        if block_bits == 0 || block_bits > MAX_BLOCK_BITS {
            return Err(Error::BlockBits(block_bits));
        }
        let b = block_bits;
        let mut row_max = vec![0u8; (b as usize + 2) << (2 * b)];
        for delta in -1..=b as i64 {
            for q in 0..1u64 << b {
                for p in 0..1u64 << b {
                    row_max[Self::index(b, p, q, delta)] = scalar_row_max(p, q, delta, b) as u8;
                }
            }
        }
        Ok(MergeTables { block_bits, row_max })
    }

    fn index(b: u32, p: u64, q: u64, delta: i64) -> usize {
        (((delta.clamp(-1, b as i64) + 1) as usize) << (2 * b)) | (q as usize) << b | p as usize
    }

    pub fn block_bits(&self) -> u32 {
        self.block_bits
    }

    pub fn len(&self) -> usize {
        self.row_max.len()
    }

    pub fn is_empty(&self) -> bool {
        self.row_max.is_empty()
    }

    /// Merged block for blocks `p`, `q` and the exact difference `delta ≥ -1`.
    #[inline]
    pub fn lookup(&self, p: u64, q: u64, delta: i64) -> u64 {
        self.row_max[Self::index(self.block_bits, p, q, delta)] as u64
    }
}

/// Column-by-column `max(P, Q)` of one block, with `P - Q = delta` before it.
pub fn scalar_row_max(p: u64, q: u64, delta: i64, block_bits: u32) -> u64 {
    let (mut pv, mut qv) = (delta, 0i64);
    let mut m = pv.max(qv);
    let mut out = 0;
    for k in 0..block_bits {
        pv += (p >> k & 1) as i64;
        qv += (q >> k & 1) as i64;
        let next = pv.max(qv);
        if next > m {
            out |= 1 << k;
        }
        m = next;
    }
    out
}

/// Compares every key, and every difference up to `B + 3` through the clamp, against
/// [`scalar_row_max`]; returns `(keys, mismatches)`.
pub fn check_merge_tables(tables: &MergeTables) -> (u64, u64) {
    let b = tables.block_bits;
    let (mut keys, mut bad) = (0, 0);
    for delta in -1..=b as i64 + 3 {
        for q in 0..1u64 << b {
            for p in 0..1u64 << b {
                keys += 1;
                bad += (tables.lookup(p, q, delta) != scalar_row_max(p, q, delta, b)) as u64;
            }
        }
    }
    (keys, bad)
}

/// Writes into `out` the row encoding `max(above[j], snapshot[j])` for every column.
pub fn merge_max_row(tables: &MergeTables, layout: &RowLayout, above: &[u64], snapshot: &[u64], out: &mut [u64]) {
    let b = layout.block_bits;
    debug_assert_eq!(tables.block_bits, b);
    let mask = low_mask(b);
    let mut delta = 0i64;
    let mut blocks_left = layout.blocks;
    for w in 0..layout.words {
        let (pw, qw) = (above[w], snapshot[w]);
        let slots = blocks_left.min(layout.blocks_per_word as usize);
        blocks_left -= slots;
        let step = pw.count_ones() as i64 - qw.count_ones() as i64;
        if pw == qw || delta >= layout.word_bits as i64 {
            out[w] = pw;
        } else {
            let mut word = 0;
            for k in 0..slots as u32 {
                let (p, q) = (pw >> (k * b) & mask, qw >> (k * b) & mask);
                word |= tables.lookup(p, q, delta) << (k * b);
                delta += p.count_ones() as i64 - q.count_ones() as i64;
            }
            out[w] = word;
            continue;
        }
        delta += step;
    }
}

/// Raises `dp[j'] ≥ r` for every `j' ≥ j` of each result `(j, r)`, given in increasing `j`.
/// Each result either is already met or sets a 1 at `j` and clears the nearest 1 after it.
/// Returns how many results changed the row.
pub fn apply_results_row(layout: &RowLayout, row: &mut [u64], results: &[(Pos, u32)]) -> u64 {
    assert!(results.windows(2).all(|w| w[0].0 <= w[1].0), "results not sorted by column");
    let wb = layout.word_bits as usize;
    let mut applied = 0;
    let mut pending = 0u32;
    let mut before = 0u32;
    let mut k = 0;
    for w in 0..layout.words {
        let mut word = row[w];
        while pending > 0 && word != 0 {
            word &= word - 1;
            pending -= 1;
        }
        while k < results.len() && (results[k].0 as usize - 1) / wb == w {
            let (j, r) = results[k];
            k += 1;
            let o = ((j as usize - 1) % wb) as u32;
            let value = before + (word & low_mask(o + 1)).count_ones();
            if value >= r {
                continue;
            }
            debug_assert_eq!(value + 1, r, "result exceeds the row by more than one");
            debug_assert_eq!(word >> o & 1, 0);
            word |= 1 << o;
            applied += 1;
            let after = word & !low_mask(o + 1);
            if after != 0 {
                word &= !(after & after.wrapping_neg());
            } else {
                pending += 1;
            }
        }
        row[w] = word;
        before += word.count_ones();
    }
    applied
}

/// `dp_{v-1}` as a predicate: a chain of length `≥ r` ends strictly before `(x, y)` iff
/// `dp_{v-1}[x-1][y-1] ≥ r`.
pub struct ChainPredicate<'a> {
    table: &'a DiffTable,
}

impl<'a> ChainPredicate<'a> {
    pub fn new(table: &'a DiffTable) -> Self {
        ChainPredicate { table }
    }
}

impl ChainBase for ChainPredicate<'_> {
    #[inline]
    fn reaches(&self, x: Pos, y: Pos, r: u32) -> bool {
        self.table.dp_value_at(x as usize - 1, y as usize - 1) >= r
    }

    fn bound(&self, x: Pos) -> u32 {
        self.table.dp_value_at(x as usize - 1, self.table.n_cols())
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct CombinedOptions {
    /// Frequency threshold `c`; `None` uses [`default_threshold`].
    pub threshold_c: Option<usize>,
    /// Block size; `None` picks [`auto_block_bits`].
    pub block_bits: Option<u32>,
    pub check_invariants: bool,
    pub pair: PairOptions,
}

/// Work and time spent on one fragment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FragmentRecord {
    pub fragment: Fragment,
    pub pairs: u64,
    pub queries: u64,
    pub wall_ns: u64,
}

#[derive(Clone, Debug, Default)]
pub struct CombinedStats {
    pub threshold_c: usize,
    pub block_bits: u32,
    pub fragments: Vec<FragmentRecord>,
    pub dp: DpStats,
    pub pairs: PairStats,
    /// Rows rebuilt after rare fragments and results that changed them.
    pub merged_rows: u64,
    pub applied_results: u64,
}

#[derive(Clone, Debug)]
pub struct CombinedOutcome {
    pub length: usize,
    pub stats: CombinedStats,
}

/// LCIS (or LCWIS) length by the hybrid solver.
pub fn solve_combined(input: &RankedInput, c: Option<usize>, block_bits: Option<u32>, variant: Variant) -> Result<usize> {
    let opts = CombinedOptions {
        threshold_c: c,
        block_bits,
        check_invariants: cfg!(debug_assertions),
        pair: PairOptions::default(),
    };
    Ok(solve_combined_with(input, variant, &opts, |_, _| {})?.length)
}

/// [`solve_combined`] with options; `observe` sees the table after every fragment.
pub fn solve_combined_with(
    input: &RankedInput,
    variant: Variant,
    opts: &CombinedOptions,
    mut observe: impl FnMut(&Fragment, &DiffTable),
) -> Result<CombinedOutcome> {
    let n = input.n();
    let c = opts.threshold_c.unwrap_or_else(|| default_threshold(n));
    if c == 0 {
        return Err(Error::Invalid("threshold c must be at least 1".into()));
    }
    let b = match opts.block_bits {
        Some(b) => b,
        None => auto_block_bits(n, variant, table_budget())?,
    };
    let tables = BlockTables::shared(b, variant)?;
    let merge = MergeTables::build(b)?;
    let mut stats = CombinedStats {
        threshold_c: c,
        block_bits: b,
        ..CombinedStats::default()
    };
    if input.n_a() == 0 || input.n_b() == 0 {
        return Ok(CombinedOutcome { length: 0, stats });
    }

    let engine = RowEngine::Blocked(&tables);
    let mut table = DiffTable::new(input.n_a(), input.n_b(), b);
    let layout = *table.layout();
    let prev = crate::alphabet::build_prev_arrays(input);
    let mut scratch = PhaseScratch::default();
    let mut out = layout.zero_row();

    for frag in partition_fragments(input.counts(), n, c) {
        let start = Instant::now();
        let mut record = FragmentRecord {
            fragment: frag,
            pairs: 0,
            queries: 0,
            wall_ns: 0,
        };
        match frag.kind {
            FragmentKind::Frequent => {
                record.pairs = input.pair_count(frag.lo);
                apply_phase(&mut table, input, frag.lo, variant, &engine, opts.check_invariants, &mut stats.dp, &mut scratch);
            }
            FragmentKind::Rare => {
                let mut levels = ResultLevels::new(input.n_a().min(input.n_b()));
                let mut results: Vec<(Pos, Pos, u32)> = Vec::new();
                {
                    let base = ChainPredicate::new(&table);
                    for v in frag.lo..=frag.hi {
                        if input.pair_count(v) == 0 {
                            continue;
                        }
                        let (mut phase, s) = solve_value_phase(input, v, &levels, &base, &opts.pair);
                        record.pairs += s.pairs;
                        record.queries += s.node_queries;
                        stats.pairs.add(&s);
                        if variant == Variant::Weak {
                            lcwis_equal_phase(&mut phase, &prev);
                        }
                        levels.insert_results(phase.triples().map(|(x, y, r)| (r, x, y)).collect());
                        results.extend(phase.triples());
                    }
                }
                if !results.is_empty() {
                    let (starts, by_row) = group_by_row(&results, input.n_a(), input.n_b());
                    drop(results);
                    for i in 1..=input.n_a() {
                        merge_max_row(&merge, &layout, table.row(i - 1), table.row(i), &mut out);
                        stats.applied_results += apply_results_row(&layout, &mut out, &by_row[starts[i]..starts[i + 1]]);
                        if opts.check_invariants {
                            stats.dp.checked_rows += 1;
                            stats.dp.row_step_violations += unit_step_violations(&layout, table.row(i - 1), &out);
                        }
                        table.set_row(i, &out);
                        stats.merged_rows += 1;
                    }
                }
            }
        }
        record.wall_ns = start.elapsed().as_nanos() as u64;
        stats.fragments.push(record);
        observe(&frag, &table);
    }
    Ok(CombinedOutcome {
        length: table.final_value() as usize,
        stats,
    })
}

/// Counting sort of `(x, y, r)` by `x`, then `y`: row `i` is `entries[starts[i]..starts[i + 1]]`.
fn group_by_row(results: &[(Pos, Pos, u32)], n_a: usize, n_b: usize) -> (Vec<usize>, Vec<(Pos, u32)>) {
    fn starts_of(keys: impl Iterator<Item = usize>, len: usize) -> Vec<usize> {
        let mut starts = vec![0usize; len + 1];
        for k in keys {
            starts[k + 1] += 1;
        }
        for k in 1..=len {
            starts[k] += starts[k - 1];
        }
        starts
    }
    let mut fill = starts_of(results.iter().map(|t| t.1 as usize), n_b + 1);
    let mut by_col = vec![(0, 0, 0); results.len()];
    for &t in results {
        by_col[fill[t.1 as usize]] = t;
        fill[t.1 as usize] += 1;
    }
    let starts = starts_of(by_col.iter().map(|t| t.0 as usize), n_a + 1);
    let mut fill = starts.clone();
    let mut out = vec![(0, 0); results.len()];
    for &(x, y, r) in &by_col {
        out[fill[x as usize]] = (y, r);
        fill[x as usize] += 1;
    }
    (starts, out)
}
