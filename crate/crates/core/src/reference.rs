//! Trusted oracles: the classical quadratic dp with witness recovery, an exhaustive
//! enumerator for tiny inputs and a naive point-set model of the staircase.
//!
//! These share no code with the fast solvers on purpose. The quadratic solver works
//! directly on raw values with the "best chain so far for smaller values" formulation
//! rather than on the layered per-value tables.

use crate::{Error, Result, Variant};

/// Default cap on `nA·nB` for [`solve_quadratic`].
pub const DEFAULT_CELL_LIMIT: u64 = 100_000_000;

/// Largest shorter-side length accepted by [`solve_exhaustive`].
pub const EXHAUSTIVE_MAX: usize = 14;

/// Index pairs `(x, y)` (1-based) of an optimal common subsequence.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Witness(pub Vec<(u32, u32)>);

impl Witness {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn extends(prev: i64, next: i64, variant: Variant) -> bool {
    match variant {
        Variant::Strict => prev < next,
        Variant::Weak => prev <= next,
    }
}

/// Length plus witness, limited to [`DEFAULT_CELL_LIMIT`] cells.
pub fn solve_quadratic(raw_a: &[i64], raw_b: &[i64], variant: Variant) -> Result<(usize, Witness)> {
    solve_quadratic_with_limit(raw_a, raw_b, variant, DEFAULT_CELL_LIMIT)
}

pub fn solve_quadratic_with_limit(
    raw_a: &[i64],
    raw_b: &[i64],
    variant: Variant,
    cell_limit: u64,
) -> Result<(usize, Witness)> {
    let cells = raw_a.len() as u64 * raw_b.len() as u64;
    if cells > cell_limit {
        return Err(Error::SizeLimit {
            what: "the quadratic solver",
            size: cells,
            limit: cell_limit,
        });
    }

    const NONE: u32 = u32::MAX;
    // chain nodes: (x, y, parent); a node is never modified once pushed
    let mut nodes: Vec<(u32, u32, u32)> = Vec::new();
    let mut best_at = vec![0usize; raw_b.len()];
    let mut node_at = vec![NONE; raw_b.len()];

    for (x, &va) in raw_a.iter().enumerate() {
        let mut best = 0usize;
        let mut best_node = NONE;
        for (y, &vb) in raw_b.iter().enumerate() {
            let old = best_at[y];
            let old_node = node_at[y];
            if vb == va && best + 1 > old {
                best_at[y] = best + 1;
                node_at[y] = nodes.len() as u32;
                nodes.push((x as u32 + 1, y as u32 + 1, best_node));
            }
            if extends(vb, va, variant) && old > best {
                best = old;
                best_node = old_node;
            }
        }
    }

    let (mut length, mut tail) = (0usize, NONE);
    for (y, &len) in best_at.iter().enumerate() {
        if len > length {
            length = len;
            tail = node_at[y];
        }
    }
    let mut chain = Vec::with_capacity(length);
    while tail != NONE {
        let (x, y, parent) = nodes[tail as usize];
        chain.push((x, y));
        tail = parent;
    }
    chain.reverse();
    Ok((length, Witness(chain)))
}

/// Length only, `O(nB)` memory and no size limit.
pub fn quadratic_length(raw_a: &[i64], raw_b: &[i64], variant: Variant) -> usize {
    let mut best_at = vec![0u32; raw_b.len()];
    for &va in raw_a {
        let mut best = 0u32;
        for (slot, &vb) in best_at.iter_mut().zip(raw_b) {
            let old = *slot;
            if vb == va && best + 1 > old {
                *slot = best + 1;
            }
            let usable = match variant {
                Variant::Strict => vb < va,
                Variant::Weak => vb <= va,
            };
            if usable && old > best {
                best = old;
            }
        }
    }
    best_at.into_iter().max().unwrap_or(0) as usize
}

/// Checks that `w` is a common (weakly) increasing subsequence of the given length.
pub fn check_witness(raw_a: &[i64], raw_b: &[i64], variant: Variant, w: &Witness, length: usize) -> bool {
    if w.len() != length {
        return false;
    }
    let mut last: Option<(u32, u32, i64)> = None;
    for &(x, y) in &w.0 {
        if x == 0 || y == 0 || x as usize > raw_a.len() || y as usize > raw_b.len() {
            return false;
        }
        let value = raw_a[x as usize - 1];
        if raw_b[y as usize - 1] != value {
            return false;
        }
        if let Some((px, py, pv)) = last {
            if px >= x || py >= y || !extends(pv, value, variant) {
                return false;
            }
        }
        last = Some((x, y, value));
    }
    true
}

/// Ground truth by enumerating every subsequence of the shorter input.
pub fn solve_exhaustive(raw_a: &[i64], raw_b: &[i64], variant: Variant) -> Result<usize> {
    let (short, long) = if raw_a.len() <= raw_b.len() {
        (raw_a, raw_b)
    } else {
        (raw_b, raw_a)
    };
    if short.len() > EXHAUSTIVE_MAX {
        return Err(Error::SizeLimit {
            what: "the exhaustive solver",
            size: short.len() as u64,
            limit: EXHAUSTIVE_MAX as u64,
        });
    }

    let mut best = 0usize;
    let mut picked = Vec::with_capacity(short.len());
    for mask in 0u32..(1u32 << short.len()) {
        let size = mask.count_ones() as usize;
        if size <= best {
            continue;
        }
        picked.clear();
        picked.extend((0..short.len()).filter(|i| mask >> i & 1 == 1).map(|i| short[i]));
        if !picked.windows(2).all(|w| extends(w[0], w[1], variant)) {
            continue;
        }
        let mut it = long.iter();
        if picked.iter().all(|p| it.any(|q| q == p)) {
            best = size;
        }
    }
    Ok(best)
}

/// Plain list of every inserted point; answers by full scan.
#[derive(Clone, Debug, Default)]
pub struct NaiveStaircase {
    points: Vec<(u32, u32)>,
}

impl NaiveStaircase {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, x: u32, y: u32) {
        self.points.push((x, y));
    }

    /// Smallest `y'` over stored points with `x' < x`.
    pub fn query_min_y(&self, x: u32) -> Option<u32> {
        self.points.iter().filter(|p| p.0 < x).map(|p| p.1).min()
    }

    /// The non-dominated subset in increasing `x` order.
    pub fn pareto(&self) -> Vec<(u32, u32)> {
        let mut pts = self.points.clone();
        pts.sort_unstable();
        let mut out: Vec<(u32, u32)> = Vec::new();
        for p in pts {
            if out.last().map_or(true, |q| p.1 < q.1) {
                out.push(p);
            }
        }
        out
    }
}

/// One step of a staircase trace.
#[derive(Clone, Debug)]
pub enum StairOp {
    Insert(Vec<(u32, u32)>),
    Query(Vec<u32>),
}

/// Replays a trace against [`NaiveStaircase`], returning every query answer in order.
pub fn naive_staircase(ops: &[StairOp]) -> Vec<Option<u32>> {
    let mut s = NaiveStaircase::new();
    let mut answers = Vec::new();
    for op in ops {
        match op {
            StairOp::Insert(points) => points.iter().for_each(|&(x, y)| s.insert(x, y)),
            StairOp::Query(xs) => answers.extend(xs.iter().map(|&x| s.query_min_y(x))),
        }
    }
    answers
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn quadratic_examples() {
        let (len, w) = solve_quadratic(&[1, 2, 3], &[1, 2, 3], Variant::Strict).unwrap();
        assert_eq!(len, 3);
        assert_eq!(w.0, vec![(1, 1), (2, 2), (3, 3)]);

        assert_eq!(solve_quadratic(&[1, 1], &[1, 1], Variant::Strict).unwrap().0, 1);
        assert_eq!(solve_quadratic(&[1, 1], &[1, 1], Variant::Weak).unwrap().0, 2);
    }

    #[test]
    fn quadratic_limit() {
        let a = vec![1; 11];
        assert!(matches!(
            solve_quadratic_with_limit(&a, &a, Variant::Strict, 100),
            Err(Error::SizeLimit { size: 121, .. })
        ));
    }

    #[test]
    fn exhaustive_examples() {
        assert_eq!(solve_exhaustive(&[2], &[3], Variant::Strict).unwrap(), 0);
        assert_eq!(solve_exhaustive(&[1, 3, 2], &[1, 2, 3], Variant::Strict).unwrap(), 2);
        assert_eq!(solve_exhaustive(&[], &[1, 2], Variant::Weak).unwrap(), 0);
        assert!(solve_exhaustive(&[0; 15], &[0; 15], Variant::Strict).is_err());
    }

    #[test]
    fn quadratic_matches_exhaustive() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let na = rng.random_range(0..=10);
            let nb = rng.random_range(0..=10);
            let k = rng.random_range(1..=5);
            let a: Vec<i64> = (0..na).map(|_| rng.random_range(0..k)).collect();
            let b: Vec<i64> = (0..nb).map(|_| rng.random_range(0..k)).collect();
            for variant in Variant::ALL {
                let (len, w) = solve_quadratic(&a, &b, variant).unwrap();
                assert_eq!(len, solve_exhaustive(&a, &b, variant).unwrap(), "{a:?} {b:?} {variant}");
                assert_eq!(len, quadratic_length(&a, &b, variant));
                assert!(check_witness(&a, &b, variant, &w, len));
                assert_eq!(len, quadratic_length(&b, &a, variant));
            }
            assert!(quadratic_length(&a, &b, Variant::Strict) <= quadratic_length(&a, &b, Variant::Weak));
        }
    }

    #[test]
    fn witness_checker_rejects_bad_chains() {
        let a = [1, 2, 3];
        let b = [1, 2, 3];
        assert!(!check_witness(&a, &b, Variant::Strict, &Witness(vec![(2, 2), (1, 1)]), 2));
        assert!(!check_witness(&a, &b, Variant::Strict, &Witness(vec![(1, 2)]), 1));
        assert!(!check_witness(&[1, 1], &[1, 1], Variant::Strict, &Witness(vec![(1, 1), (2, 2)]), 2));
        assert!(check_witness(&[1, 1], &[1, 1], Variant::Weak, &Witness(vec![(1, 1), (2, 2)]), 2));
    }

    #[test]
    fn naive_staircase_examples() {
        let answers = naive_staircase(&[StairOp::Query(vec![4]), StairOp::Insert(vec![(2, 5)]), StairOp::Query(vec![3])]);
        assert_eq!(answers, vec![None, Some(5)]);
        let mut s = NaiveStaircase::new();
        s.insert(2, 5);
        s.insert(3, 6);
        s.insert(4, 3);
        assert_eq!(s.pareto(), vec![(2, 5), (4, 3)]);
    }
}
