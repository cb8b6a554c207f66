//! Precomputed block transitions.
//!
//! A row update only needs, per block, the bits of up to four rows plus one or two carry
//! bits describing how the dp values at the column before the block relate. Every such
//! combination is enumerated once and the outcome of the row update over the block is
//! stored in a dense array indexed by the packed key.
//!
//! Strict key layout (`4B + 2` bits), low to high:
//! `old_prev | new_prev | cur | matches | d1 | d2` where
//! `d1 = dp_{v+1}[i-1][j-1] - dp_v[i-1][j-1]` and `d2 = dp_{v+1}[i][j-1] - dp_{v+1}[i-1][j-1]`.
//!
//! Weak key layout (`3B + 1` bits): `new_prev | cur | matches | d2`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::{Error, Result, Variant};

/// Environment variable holding the maximum number of row-transition entries.
pub const BUDGET_ENV: &str = "LCIS_TABLE_BUDGET";
/// Default maximum number of row-transition entries (`2^22`).
pub const DEFAULT_BUDGET: u64 = 1 << 22;
/// Largest block size the packed table entries can represent.
pub const MAX_BLOCK_BITS: u32 = 7;

// 16-bit entries: out block in bits 0..8, cancellations (at most 2B) in 8..12, carries d1
// and d2 in bits 12 and 13
pub(crate) const OUT_MASK: u16 = 0xFF;
pub(crate) const CANCEL_SHIFT: u32 = 8;
pub(crate) const CARRY_SHIFT: u32 = 12;

/// Table memory budget: `LCIS_TABLE_BUDGET` if set and parseable, else [`DEFAULT_BUDGET`].
pub fn table_budget() -> u64 {
    std::env::var(BUDGET_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_BUDGET)
}

/// Bits in a row-transition key.
pub fn key_bits(block_bits: u32, variant: Variant) -> u32 {
    match variant {
        Variant::Strict => 4 * block_bits + 2,
        Variant::Weak => 3 * block_bits + 1,
    }
}

/// Key bits other than the carries.
fn data_bits(block_bits: u32, variant: Variant) -> u32 {
    match variant {
        Variant::Strict => 4 * block_bits,
        Variant::Weak => 3 * block_bits,
    }
}

/// Result of running the row update over one block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockOutcome {
    /// Final difference bits of the block.
    pub block: u64,
    /// 1s to clear to the right of the block.
    pub cancels: u32,
    /// Carry `d1` for the next block (strict only, else 0).
    pub d1: i64,
    /// Carry `d2` for the next block.
    pub d2: i64,
}

/// The row update restricted to one block: the scalar procedure with its cursor confined
/// to the block, counting cancellations that would land further right.
#[allow(clippy::too_many_arguments)]
pub fn simulate_block(
    variant: Variant,
    block_bits: u32,
    old_prev: u64,
    new_prev: u64,
    cur: u64,
    matches: u64,
    d1: i64,
    d2: i64,
) -> BlockOutcome {
    let mut row = cur;
    let mut cancels = 0;
    // strict: values relative to dp_v[i-1][j-1]; weak: relative to dp_{v+1}[i-1][j-1]
    let (mut phase, mut value) = match variant {
        Variant::Strict => (0i64, d1),
        Variant::Weak => (0i64, 0i64),
    };
    let mut cur_value = value + d2;

    let mut cancel_after = |row: &mut u64, p: u32| {
        let above = *row & !low_bits(p + 1);
        if above == 0 {
            cancels += 1;
        } else {
            *row &= !(above & above.wrapping_neg());
        }
    };

    for p in 0..block_bits {
        cur_value += (row >> p & 1) as i64;
        let threshold = match variant {
            Variant::Strict => phase,
            Variant::Weak => value,
        };
        if matches >> p & 1 == 1 && cur_value == threshold {
            row |= 1 << p;
            cur_value += 1;
            cancel_after(&mut row, p);
        }
        phase += (old_prev >> p & 1) as i64;
        value += (new_prev >> p & 1) as i64;
        if cur_value < value {
            cur_value = value;
            row |= 1 << p;
            cancel_after(&mut row, p);
        }
    }

    // carries are read off the output bits, so keys no valid row produces still agree with
    // a recount over a full row
    let pop = |m: u64| m.count_ones() as i64;
    let value_end = d1 + pop(new_prev);
    let cur_end = d1 + d2 + pop(row);
    BlockOutcome {
        block: row,
        cancels,
        d1: match variant {
            Variant::Strict => value_end - pop(old_prev),
            Variant::Weak => 0,
        },
        d2: cur_end - value_end,
    }
}

#[inline]
fn low_bits(k: u32) -> u64 {
    super::layout::low_mask(k)
}

/// Immutable lookup tables for one `(B, variant)`.
#[derive(Debug)]
pub struct BlockTables {
    variant: Variant,
    block_bits: u32,
    transition: Vec<u64>,
    strip: Vec<u16>,
    prefix_pop: Vec<u8>,
}

impl BlockTables {
    /// Builds the tables, failing if the transition table exceeds [`table_budget`].
    pub fn build(block_bits: u32, variant: Variant) -> Result<Self> {
        Self::build_with_budget(block_bits, variant, table_budget())
    }

    pub fn build_with_budget(block_bits: u32, variant: Variant, budget: u64) -> Result<Self> {
        if block_bits == 0 {
            return Err(Error::BlockBits(block_bits));
        }
        let entries = 1u128 << key_bits(block_bits.min(30), variant);
        if entries > budget as u128 {
            return Err(Error::TableBudget {
                block_bits,
                entries,
                budget,
            });
        }
        if block_bits > MAX_BLOCK_BITS {
            return Err(Error::BlockBits(block_bits));
        }

        let b = block_bits;
        let mask = low_bits(b);
        let carry_bits = key_bits(b, variant) - data_bits(b, variant);
        // stored grouped by everything but the carries: one u64 holds the entries for all
        // carry values, so the kernel can fetch it before the previous block settles them
        let transition = (0..1u64 << data_bits(b, variant))
            .map(|data| {
                let field = |k: u32| data >> (k * b) & mask;
                (0..1u64 << carry_bits).fold(0u64, |group, carry| {
                    let out = match variant {
                        Variant::Strict => simulate_block(
                            variant,
                            b,
                            field(0),
                            field(1),
                            field(2),
                            field(3),
                            (carry & 1) as i64,
                            (carry >> 1) as i64,
                        ),
                        Variant::Weak => simulate_block(variant, b, 0, field(0), field(1), field(2), 0, carry as i64),
                    };
                    group | (pack_entry(&out) as u64) << (16 * carry)
                })
            })
            .collect();

        let stride = b as usize + 1;
        let mut strip = vec![0u16; (1usize << b) * stride];
        let mut prefix_pop = vec![0u8; (1usize << b) * stride];
        for m in 0..1u64 << b {
            for s in 0..=b {
                let mut left = m;
                let mut cleared = 0;
                while cleared < s && left != 0 {
                    left &= left - 1;
                    cleared += 1;
                }
                strip[m as usize * stride + s as usize] = left as u16 | (cleared as u16) << CANCEL_SHIFT;
                prefix_pop[m as usize * stride + s as usize] = (m & low_bits(s)).count_ones() as u8;
            }
        }

        Ok(BlockTables {
            variant,
            block_bits,
            transition,
            strip,
            prefix_pop,
        })
    }

    /// Process-wide cache keyed by `(B, variant)`; tables are built once and shared.
    pub fn shared(block_bits: u32, variant: Variant) -> Result<Arc<BlockTables>> {
        static CACHE: OnceLock<Mutex<HashMap<(u32, Variant), Arc<BlockTables>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(t) = cache.lock().unwrap().get(&(block_bits, variant)) {
            return Ok(Arc::clone(t));
        }
        let built = Arc::new(Self::build(block_bits, variant)?);
        cache
            .lock()
            .unwrap()
            .entry((block_bits, variant))
            .or_insert_with(|| Arc::clone(&built));
        Ok(built)
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn block_bits(&self) -> u32 {
        self.block_bits
    }

    /// Number of keys, `2^(4B+2)` or `2^(3B+1)`.
    pub fn transition_len(&self) -> usize {
        1 << key_bits(self.block_bits, self.variant)
    }

    /// Decoded row transition for a packed key.
    pub fn row_transition(&self, key: usize) -> BlockOutcome {
        let data_bits = data_bits(self.block_bits, self.variant);
        let group = self.transition[key & ((1 << data_bits) - 1)];
        unpack_entry((group >> (16 * (key >> data_bits))) as u16)
    }

    /// Entries grouped by the key without its carry bits; entry `c` of a group sits at bits
    /// `16c..16c+16`.
    #[inline]
    pub(crate) fn raw_transition(&self) -> &[u64] {
        &self.transition
    }

    /// Clears the `min(s, popcount)` lowest (leftmost in column order) ones of `mask`;
    /// returns the new mask and how many were cleared. `s` is capped at `B`.
    #[inline]
    pub fn strip_ones(&self, mask: u64, s: u32) -> (u64, u32) {
        let e = self.strip[mask as usize * (self.block_bits as usize + 1) + s.min(self.block_bits) as usize];
        ((e & OUT_MASK) as u64, (e >> CANCEL_SHIFT) as u32)
    }

    /// Number of ones among the `pos` lowest bits of `mask`, `0 ≤ pos ≤ B`.
    #[inline]
    pub fn prefix_pop(&self, mask: u64, pos: u32) -> u32 {
        self.prefix_pop[mask as usize * (self.block_bits as usize + 1) + pos as usize] as u32
    }

    /// Packs a strict key from its fields.
    pub fn strict_key(&self, old_prev: u64, new_prev: u64, cur: u64, matches: u64, d1: u32, d2: u32) -> usize {
        let b = self.block_bits;
        (old_prev | new_prev << b | cur << (2 * b) | matches << (3 * b) | (d1 as u64) << (4 * b) | (d2 as u64) << (4 * b + 1))
            as usize
    }

    pub fn weak_key(&self, new_prev: u64, cur: u64, matches: u64, d2: u32) -> usize {
        let b = self.block_bits;
        (new_prev | cur << b | matches << (2 * b) | (d2 as u64) << (3 * b)) as usize
    }
}

fn pack_entry(o: &BlockOutcome) -> u16 {
    // carries outside {0, 1} only arise from keys no valid row can produce
    let d1 = o.d1.clamp(0, 1) as u16;
    let d2 = o.d2.clamp(0, 1) as u16;
    debug_assert!(o.cancels < 16);
    o.block as u16 | (o.cancels as u16) << CANCEL_SHIFT | d1 << CARRY_SHIFT | d2 << (CARRY_SHIFT + 1)
}

fn unpack_entry(e: u16) -> BlockOutcome {
    BlockOutcome {
        block: (e & OUT_MASK) as u64,
        cancels: (e >> CANCEL_SHIFT & 0xF) as u32,
        d1: (e >> CARRY_SHIFT & 1) as i64,
        d2: (e >> (CARRY_SHIFT + 1) & 1) as i64,
    }
}
