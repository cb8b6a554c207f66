//! The layered dp over values, kept as packed difference rows.
//!
//! `dp_v[i][j]` is the best common increasing subsequence of `A[1..i]` and `B[1..j]` using
//! only the `v` smallest values. Going from `v` to `v + 1` touches every row once; each row
//! update is the column sweep of [`row::calculate_row_scalar`] or its table-driven form
//! [`row::calculate_row_blocked`].

pub mod layout;
pub mod row;
pub mod table;
pub mod tables;

use std::ops::RangeInclusive;

use crate::alphabet::{Rank, RankedInput};
use crate::{floor_log2, Error, Result, Variant};

pub use layout::{unit_step_violations, RowLayout};
pub use row::{calculate_row_blocked, calculate_row_scalar};
pub use table::DiffTable;
pub use tables::{key_bits, simulate_block, table_budget, BlockOutcome, BlockTables, MAX_BLOCK_BITS};

/// How rows are updated.
#[derive(Clone, Copy, Debug)]
pub enum RowEngine<'a> {
    Scalar,
    Blocked(&'a BlockTables),
}

impl RowEngine<'_> {
    #[inline]
    fn update(
        &self,
        layout: &RowLayout,
        variant: Variant,
        old_prev: &[u64],
        new_prev: &[u64],
        row: &mut [u64],
        matches: &[u64],
    ) -> (u64, u64) {
        match self {
            RowEngine::Scalar => (calculate_row_scalar(layout, variant, old_prev, new_prev, row, matches), layout.blocks as u64),
            RowEngine::Blocked(t) => calculate_row_blocked(t, layout, old_prev, new_prev, row, matches),
        }
    }
}

/// Loop order of the solver.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Schedule {
    /// Whichever of the two below needs less memory.
    Auto,
    /// Values outermost: one full table, rewritten once per value.
    PhaseMajor,
    /// Rows outermost: for the current and previous row, one version per value.
    RowMajor,
}

#[derive(Clone, Debug)]
pub struct DpOptions {
    /// Block size; `None` picks [`auto_block_bits`].
    pub block_bits: Option<u32>,
    /// Use the column-at-a-time update instead of the tables.
    pub scalar: bool,
    pub schedule: Schedule,
    /// Count unit-step violations between neighbouring rows and generations.
    pub check_invariants: bool,
}

impl Default for DpOptions {
    fn default() -> Self {
        DpOptions {
            block_bits: None,
            scalar: false,
            schedule: Schedule::Auto,
            check_invariants: cfg!(debug_assertions),
        }
    }
}

/// Work counters of one solve.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DpStats {
    /// Row updates actually computed.
    pub rows: u64,
    /// Row updates skipped because neither a match nor a change in the row above could alter them.
    pub rows_skipped: u64,
    /// Blocks pushed through the update; the table engine skips words that cannot change.
    pub blocks: u64,
    /// Cancellations (scalar) or cancellations leaving their block (tables).
    pub cancellations: u64,
    /// Row pairs compared by the invariant checks.
    pub checked_rows: u64,
    /// Columns where `dp[i][j] - dp[i-1][j] ∉ {0, 1}`.
    pub row_step_violations: u64,
    /// Columns where `dp_{v+1}[i][j] - dp_v[i][j] ∉ {0, 1}`. Strict only: a weak phase may
    /// chain many equal values and raise an entry by more than one.
    pub phase_step_violations: u64,
}

impl DpStats {
    pub fn add(&mut self, o: &DpStats) {
        self.rows += o.rows;
        self.rows_skipped += o.rows_skipped;
        self.blocks += o.blocks;
        self.cancellations += o.cancellations;
        self.checked_rows += o.checked_rows;
        self.row_step_violations += o.row_step_violations;
        self.phase_step_violations += o.phase_step_violations;
    }
}

#[derive(Clone, Debug)]
pub struct DpOutcome {
    pub length: usize,
    pub block_bits: u32,
    pub schedule: Schedule,
    pub stats: DpStats,
}

/// Default block size for inputs of length `n`: the largest `B` whose table fits `budget`,
/// capped by `⌊log₂ n / 5⌋` (strict) or `⌊log₂ n / 4⌋` (weak), at least 1.
pub fn auto_block_bits(n: usize, variant: Variant, budget: u64) -> Result<u32> {
    let fits = |b: u32| (1u128 << key_bits(b, variant)) <= budget as u128;
    if !fits(1) {
        return Err(Error::TableBudget {
            block_bits: 1,
            entries: 1u128 << key_bits(1, variant),
            budget,
        });
    }
    let largest = (1..=MAX_BLOCK_BITS).take_while(|&b| fits(b)).last().unwrap_or(1);
    let divisor = match variant {
        Variant::Strict => 5,
        Variant::Weak => 4,
    };
    Ok(largest.min((floor_log2(n) / divisor).max(1)))
}

/// Length of the longest common (weakly) increasing subsequence by the tabulated dp.
pub fn solve_dp_tabulated(input: &RankedInput, block_bits: Option<u32>, variant: Variant) -> Result<usize> {
    let opts = DpOptions {
        block_bits,
        ..DpOptions::default()
    };
    Ok(solve_dp(input, variant, &opts)?.length)
}

pub fn solve_dp(input: &RankedInput, variant: Variant, opts: &DpOptions) -> Result<DpOutcome> {
    let b = match opts.block_bits {
        Some(b) => b,
        None => auto_block_bits(input.n(), variant, table_budget())?,
    };
    let tables = if opts.scalar {
        if b == 0 || b > 64 {
            return Err(Error::BlockBits(b));
        }
        None
    } else {
        Some(BlockTables::shared(b, variant)?)
    };
    let engine = match &tables {
        Some(t) => RowEngine::Blocked(t),
        None => RowEngine::Scalar,
    };

    let schedule = match opts.schedule {
        Schedule::Auto => {
            // phase-major keeps (nA + 1) rows plus boundaries; row-major 3 (t + 1) rows
            if 3 * (input.t() + 1) < 2 * (input.n_a() + 1) {
                Schedule::RowMajor
            } else {
                Schedule::PhaseMajor
            }
        }
        s => s,
    };

    let mut stats = DpStats::default();
    let length = if input.n_a() == 0 || input.n_b() == 0 || input.t() == 0 {
        0
    } else {
        match schedule {
            Schedule::RowMajor => solve_row_major(input, variant, b, &engine, opts.check_invariants, &mut stats),
            _ => {
                let mut table = DiffTable::new(input.n_a(), input.n_b(), b);
                run_phases(&mut table, input, 1..=input.t() as Rank, variant, &engine, opts.check_invariants, &mut stats);
                table.final_value() as usize
            }
        }
    };
    Ok(DpOutcome {
        length,
        block_bits: b,
        schedule,
        stats,
    })
}

/// Reusable row buffers for [`apply_phase`].
#[derive(Clone, Debug, Default)]
pub struct PhaseScratch {
    zero: Vec<u64>,
    mask: Vec<u64>,
    old_prev: Vec<u64>,
    old_cur: Vec<u64>,
}

impl PhaseScratch {
    fn fit(&mut self, words: usize) {
        for v in [&mut self.zero, &mut self.mask, &mut self.old_prev, &mut self.old_cur] {
            v.clear();
            v.resize(words, 0);
        }
    }
}

/// Applies the phases of `ranks` in order to `table`.
pub fn run_phases(
    table: &mut DiffTable,
    input: &RankedInput,
    ranks: RangeInclusive<Rank>,
    variant: Variant,
    engine: &RowEngine,
    check: bool,
    stats: &mut DpStats,
) {
    let mut scratch = PhaseScratch::default();
    for v in ranks {
        apply_phase(table, input, v, variant, engine, check, stats, &mut scratch);
    }
}

/// Rewrites `table` from `dp_{v-1}` to `dp_v`, in place, row by row.
#[allow(clippy::too_many_arguments)]
pub fn apply_phase(
    table: &mut DiffTable,
    input: &RankedInput,
    v: Rank,
    variant: Variant,
    engine: &RowEngine,
    check: bool,
    stats: &mut DpStats,
    scratch: &mut PhaseScratch,
) {
    assert_eq!(table.n_rows(), input.n_a());
    assert_eq!(table.n_cols(), input.n_b());
    let layout = *table.layout();
    scratch.fit(layout.words);
    for &y in input.occ_b(v) {
        layout.set_bit(&mut scratch.mask, y as usize, true);
    }
    let a = input.a();
    // old_prev holds dp_{v-1}[i-1], already overwritten in the table
    for i in 1..=table.n_rows() {
        let is_match = a[i - 1] == v;
        scratch.old_cur.copy_from_slice(table.row(i));
        let (new_prev, row) = table.rows_pair_mut(i);
        if !is_match && new_prev == &scratch.old_prev[..] {
            stats.rows_skipped += 1;
            std::mem::swap(&mut scratch.old_prev, &mut scratch.old_cur);
            continue;
        }
        let matches = if is_match { &scratch.mask } else { &scratch.zero };
        let (cancellations, blocks) = engine.update(&layout, variant, &scratch.old_prev, new_prev, row, matches);
        stats.cancellations += cancellations;
        stats.rows += 1;
        stats.blocks += blocks;
        if check {
            stats.checked_rows += 1;
            stats.row_step_violations += unit_step_violations(&layout, new_prev, row);
            if variant == Variant::Strict {
                stats.phase_step_violations += unit_step_violations(&layout, &scratch.old_cur, row);
            }
        }
        table.refresh_boundary(i);
        std::mem::swap(&mut scratch.old_prev, &mut scratch.old_cur);
    }
}

/// Rows outermost: keeps rows `i - 1` and `i` for every generation `0..=t`, so memory is
/// `O(t · nB / W)` words instead of `O(nA · nB / W)`. Row `i` of generation `v` depends only on
/// generation `v` of row `i - 1` and generations `v - 1` of rows `i - 1` and `i`, hence the
/// same row update applies.
fn solve_row_major(
    input: &RankedInput,
    variant: Variant,
    block_bits: u32,
    engine: &RowEngine,
    check: bool,
    stats: &mut DpStats,
) -> usize {
    let layout = RowLayout::new(input.n_b(), block_bits);
    let (words, t) = (layout.words, input.t());
    let gen = |v: usize| v * words..(v + 1) * words;
    let mut prev = vec![0u64; (t + 1) * words];
    let mut cur = vec![0u64; (t + 1) * words];
    let zero = layout.zero_row();
    let masks: Vec<Vec<u64>> = (1..=t as Rank).map(|v| layout.mask_of(input.occ_b(v))).collect();

    for &av in input.a() {
        for v in 1..=t {
            let (done, rest) = cur.split_at_mut(v * words);
            let row = &mut rest[..words];
            row.copy_from_slice(&done[gen(v - 1)]);
            let old_prev = &prev[gen(v - 1)];
            let new_prev = &prev[gen(v)];
            let is_match = av as usize == v;
            if !is_match && old_prev == new_prev {
                stats.rows_skipped += 1;
                continue;
            }
            let matches = if is_match { &masks[v - 1] } else { &zero };
            let (cancellations, blocks) = engine.update(&layout, variant, old_prev, new_prev, row, matches);
            stats.cancellations += cancellations;
            stats.rows += 1;
            stats.blocks += blocks;
            if check {
                stats.checked_rows += 1;
                stats.row_step_violations += unit_step_violations(&layout, new_prev, row);
                if variant == Variant::Strict {
                    stats.phase_step_violations += unit_step_violations(&layout, &done[gen(v - 1)], row);
                }
            }
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    layout.total(&prev[t * words..]) as usize
}

/// Outcome of comparing a transition table against the full-row scalar update.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TableCheck {
    pub keys: u64,
    pub mismatches: u64,
    /// Keys whose outgoing carries fall outside `{0, 1}`; no valid row produces them and the
    /// table stores them clamped.
    pub unreachable_carries: u64,
}

/// Compares every entry of `tables` with [`calculate_row_scalar`] run on a full row that
/// embeds the decoded key: two leading columns realize the carries, the block follows and
/// `2B` trailing ones absorb cancellations.
pub fn check_row_transitions(tables: &BlockTables) -> TableCheck {
    let b = tables.block_bits() as usize;
    let variant = tables.variant();
    let n = 2 + b + 2 * b;
    let layout = RowLayout::new(n, 1);
    let mask = (1u64 << b) - 1;
    let mut out = TableCheck::default();

    for key in 0..tables.transition_len() as u64 {
        let field = |k: usize| key >> (k * b) & mask;
        let (op, np, cur, mm, d1, d2) = match variant {
            Variant::Strict => (field(0), field(1), field(2), field(3), key >> (4 * b) & 1, key >> (4 * b + 1) & 1),
            Variant::Weak => (0, field(0), field(1), field(2), 0, key >> (3 * b) & 1),
        };
        let mut rows = [vec![0u8; n], vec![0u8; n], vec![0u8; n], vec![0u8; n]];
        // prefix: dp_v[i-1] = 0, dp_{v+1}[i-1] = d1, dp_{v+1}[i] = d1 + d2 at column 2
        rows[1][0] = d1 as u8;
        for c in 0..(d1 + d2) as usize {
            rows[2][c] = 1;
        }
        for p in 0..b {
            rows[0][2 + p] = (op >> p & 1) as u8;
            rows[1][2 + p] = (np >> p & 1) as u8;
            rows[2][2 + p] = (cur >> p & 1) as u8;
            rows[3][2 + p] = (mm >> p & 1) as u8;
        }
        for c in 2 + b..n {
            rows[2][c] = 1;
        }
        let packed: Vec<Vec<u64>> = rows.iter().map(|r| layout.pack(r)).collect();
        let mut row = packed[2].clone();
        calculate_row_scalar(&layout, variant, &packed[0], &packed[1], &mut row, &packed[3]);
        let bits = layout.unpack(&row);

        let block = (0..b).fold(0u64, |m, p| m | (bits[2 + p] as u64) << p);
        let cancels = 2 * b as u32 - bits[2 + b..].iter().map(|&x| x as u32).sum::<u32>();
        let sum = |r: &[u8], upto: usize| r[..upto].iter().map(|&x| x as i64).sum::<i64>();
        let end = 2 + b;
        let cur_end = sum(&bits, end);
        let value_end = sum(&rows[1], end);
        let phase_end = sum(&rows[0], end);
        let (e1, e2) = match variant {
            Variant::Strict => (value_end - phase_end, cur_end - value_end),
            Variant::Weak => (0, cur_end - value_end),
        };

        let got = tables.row_transition(key as usize);
        out.keys += 1;
        if !(0..=1).contains(&e1) || !(0..=1).contains(&e2) {
            out.unreachable_carries += 1;
        }
        if got.block != block || got.cancels != cancels || got.d1 != e1.clamp(0, 1) || got.d2 != e2.clamp(0, 1) {
            out.mismatches += 1;
        }
    }
    out
}
