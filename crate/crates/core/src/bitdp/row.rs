//! The per-row update computing row `i` of `dp'_{v+1}`.
//!
//! Both versions take row `i - 1` of the previous generation (`old_prev`, strict only),
//! row `i - 1` of the new generation (`new_prev`), the match mask of row `i` and the row
//! itself, initialized to row `i` of the previous generation, which is updated in place.

use super::layout::RowLayout;
use super::layout::low_mask;
use super::tables::{BlockTables, CANCEL_SHIFT, CARRY_SHIFT, OUT_MASK};
use crate::Variant;

/// Column-at-a-time update. Returns the number of cancellations performed.
pub fn calculate_row_scalar(
    layout: &RowLayout,
    variant: Variant,
    old_prev: &[u64],
    new_prev: &[u64],
    row: &mut [u64],
    matches: &[u64],
) -> u64 {
    let n = layout.columns;
    let mut ptr = 1usize;
    let mut cur_value = 0i64;
    let mut prv_value = 0i64;
    let mut prv_phase = 0i64;
    let mut cancellations = 0;

    // ptr: least column > j that may hold a 1, n + 1 when none is left
    let mut cancel = |row: &mut [u64], ptr: &mut usize| {
        while *ptr <= n && !layout.bit(row, *ptr) {
            *ptr += 1;
        }
        if *ptr <= n {
            layout.set_bit(row, *ptr, false);
            cancellations += 1;
        }
    };

    for j in 1..=n {
        if ptr <= j {
            ptr = j + 1;
        }
        cur_value += layout.bit(row, j) as i64;
        let threshold = match variant {
            Variant::Strict => prv_phase,
            Variant::Weak => prv_value,
        };
        if layout.bit(matches, j) && cur_value == threshold {
            layout.set_bit(row, j, true);
            cur_value += 1;
            cancel(row, &mut ptr);
        }
        if variant == Variant::Strict {
            prv_phase += layout.bit(old_prev, j) as i64;
        }
        prv_value += layout.bit(new_prev, j) as i64;
        if cur_value < prv_value {
            cur_value = prv_value;
            layout.set_bit(row, j, true);
            cancel(row, &mut ptr);
        }
    }
    cancellations
}

/// Block-at-a-time update through the transition tables.
///
/// Cancellations leaving a block clear the nearest remaining 1s of the not yet processed
/// columns right away, with one lowest-set-bit clear each; a count still owed at the end of
/// a word is settled at the start of the next one.
///
/// `old_prev` must be row `i - 1` of the previous generation for both variants. A word is
/// left untouched when it holds no match, nothing is pending, row `i - 1` agrees with its
/// previous generation there and at the column before: the row then cannot change.
/// Returns the number of cancellations that crossed a block boundary and the number of
/// blocks looked up.
pub fn calculate_row_blocked(
    tables: &BlockTables,
    layout: &RowLayout,
    old_prev: &[u64],
    new_prev: &[u64],
    row: &mut [u64],
    matches: &[u64],
) -> (u64, u64) {
    debug_assert_eq!(tables.block_bits(), layout.block_bits);
    match tables.variant() {
        Variant::Strict => blocked::<true>(tables, layout, old_prev, new_prev, row, matches),
        Variant::Weak => blocked::<false>(tables, layout, old_prev, new_prev, row, matches),
    }
}

fn blocked<const STRICT: bool>(
    tables: &BlockTables,
    layout: &RowLayout,
    old_prev: &[u64],
    new_prev: &[u64],
    row: &mut [u64],
    matches: &[u64],
) -> (u64, u64) {
    // literal block sizes let the compiler unroll the per-word loop
    match layout.block_bits {
        1 => blocked_words::<STRICT, 1>(tables, layout, old_prev, new_prev, row, matches),
        2 => blocked_words::<STRICT, 2>(tables, layout, old_prev, new_prev, row, matches),
        3 => blocked_words::<STRICT, 3>(tables, layout, old_prev, new_prev, row, matches),
        4 => blocked_words::<STRICT, 4>(tables, layout, old_prev, new_prev, row, matches),
        5 => blocked_words::<STRICT, 5>(tables, layout, old_prev, new_prev, row, matches),
        6 => blocked_words::<STRICT, 6>(tables, layout, old_prev, new_prev, row, matches),
        7 => blocked_words::<STRICT, 7>(tables, layout, old_prev, new_prev, row, matches),
        b => unreachable!("block size {b} exceeds the table limit"),
    }
}

#[inline(always)]
fn blocked_words<const STRICT: bool, const B: u32>(
    tables: &BlockTables,
    layout: &RowLayout,
    old_prev: &[u64],
    new_prev: &[u64],
    row: &mut [u64],
    matches: &[u64],
) -> (u64, u64) {
    let b = B;
    let bpw = (64 / b) as usize;
    let trans = tables.raw_transition();
    let words = layout.words;
    let (old_prev, new_prev, row, matches) = (&old_prev[..words], &new_prev[..words], &mut row[..words], &matches[..words]);

    let mut pending = 0u32;
    let mut crossed = 0u64;
    let mut looked_up = 0u64;
    // key carry bits: strict d1 | d2 << 1, weak d2
    let mut carry = 0u64;
    // dp_{v+1}[i-1] - dp_v[i-1] at the last word boundary
    let mut d1 = 0i64;
    let mut blocks_left = layout.blocks;

    for w in 0..words {
        let (op, np, cw, mm) = (old_prev[w], new_prev[w], row[w], matches[w]);
        let slots = blocks_left.min(bpw);
        blocks_left -= slots;
        let d1_next = d1 + np.count_ones() as i64 - op.count_ones() as i64;
        if pending == 0 && d1 == 0 && mm == 0 && op == np {
            let d2 = (carry >> (STRICT as u32)) as i64 + cw.count_ones() as i64 - np.count_ones() as i64;
            carry = (d2.clamp(0, 1) as u64) << (STRICT as u32);
            d1 = d1_next;
            continue;
        }
        d1 = d1_next;
        looked_up += slots as u64;
        let mut st = WordState {
            op,
            np,
            cw: clear_lowest(cw, &mut pending),
            mm,
            out: 0,
            pending,
            crossed,
            carry,
        };
        // a constant trip count on full words lets the loop unroll
        match (slots == bpw, mm != 0) {
            (true, true) => (0..64 / B).for_each(|_| block_step::<STRICT, B, true>(trans, &mut st)),
            (true, false) => (0..64 / B).for_each(|_| block_step::<STRICT, B, false>(trans, &mut st)),
            (false, _) => (0..slots).for_each(|_| block_step::<STRICT, B, true>(trans, &mut st)),
        }
        (pending, crossed, carry) = (st.pending, st.crossed, st.carry);
        row[w] = st.out >> (64 - slots as u32 * b);
    }
    (crossed, looked_up)
}

struct WordState {
    op: u64,
    np: u64,
    cw: u64,
    mm: u64,
    out: u64,
    pending: u32,
    crossed: u64,
    carry: u64,
}

/// One block: consumes `B` bits of every input word (`MATCHES = false` when the match word
/// is zero) with constant shifts and pushes the
/// output block in from the top of `out`.
#[inline(always)]
fn block_step<const STRICT: bool, const B: u32, const MATCHES: bool>(trans: &[u64], st: &mut WordState) {
    let mask = low_mask(B);
    let mut data = if STRICT {
        (st.op & mask) | (st.np & mask) << B | (st.cw & mask) << (2 * B)
    } else {
        (st.np & mask) | (st.cw & mask) << B
    };
    if MATCHES {
        data |= (st.mm & mask) << if STRICT { 3 * B } else { 2 * B };
        st.mm >>= B;
    }
    st.op >>= B;
    st.np >>= B;
    st.cw >>= B;
    // the table length is a power of two; masking proves the index in bounds
    let e = (trans[data as usize & (trans.len() - 1)] >> (st.carry << 4)) as u16;
    st.out = st.out >> B | ((e & OUT_MASK) as u64) << (64 - B);
    let c = (e >> CANCEL_SHIFT & 0xF) as u32;
    if c > 0 {
        st.pending += c;
        st.crossed += c as u64;
        st.cw = clear_lowest(st.cw, &mut st.pending);
    }
    st.carry = if STRICT {
        (e >> CARRY_SHIFT & 3) as u64
    } else {
        (e >> (CARRY_SHIFT + 1) & 1) as u64
    };
}

/// Clears up to `pending` lowest set bits of `x`, the nearest remaining 1s to the right.
#[inline]
fn clear_lowest(mut x: u64, pending: &mut u32) -> u64 {
    while *pending > 0 && x != 0 {
        x &= x - 1;
        *pending -= 1;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(variant: Variant, op: &[u8], np: &[u8], cur: &[u8], mm: &[u8]) -> Vec<u8> {
        let l = RowLayout::new(cur.len(), 1);
        let mut row = l.pack(cur);
        calculate_row_scalar(&l, variant, &l.pack(op), &l.pack(np), &mut row, &l.pack(mm));
        l.unpack(&row)
    }

    #[test]
    fn single_match_row() {
        // A=[1], B=[1], first value: row 1 becomes dp=[1]
        assert_eq!(scalar(Variant::Strict, &[0], &[0], &[0], &[1]), vec![1]);
        assert_eq!(scalar(Variant::Weak, &[0], &[0], &[0], &[1]), vec![1]);
    }

    #[test]
    fn propagation_cancels_next_one() {
        // row above reaches 1 at column 1, row i had its 1 at column 3: max-propagation moves it
        assert_eq!(scalar(Variant::Strict, &[0, 0, 0], &[1, 0, 0], &[0, 0, 1], &[0, 0, 0]), vec![1, 0, 0]);
    }

    #[test]
    fn blocked_matches_scalar_on_crafted_rows() {
        // a cancellation that must skip three empty blocks before finding its 1
        let n = 14;
        let mut cur = vec![0u8; n];
        cur[13] = 1;
        let mut np = vec![0u8; n];
        np[0] = 1;
        let zeros = vec![0u8; n];
        for b in 1..=3 {
            let l = RowLayout::new(n, b);
            let t = BlockTables::build(b, Variant::Strict).unwrap();
            let mut blocked = l.pack(&cur);
            let (crossed, _) = calculate_row_blocked(&t, &l, &l.pack(&zeros), &l.pack(&np), &mut blocked, &l.pack(&zeros));
            assert!(crossed >= 1);
            assert_eq!(l.unpack(&blocked), scalar(Variant::Strict, &zeros, &np, &cur, &zeros), "B={b}");
        }
    }
}
