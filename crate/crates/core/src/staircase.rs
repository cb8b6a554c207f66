//! A set of mutually non-dominated points in the plane.
//!
//! Points are kept in a treap ordered by `x`; since no point dominates another, `y` strictly
//! decreases along that order. Every operation is built from split and join, and every node
//! touched is counted so callers can account for the work done.

use std::cell::Cell;

type Link = Option<Box<Node>>;

#[derive(Debug)]
struct Node {
    x: u32,
    y: u32,
    pri: u64,
    size: u32,
    left: Link,
    right: Link,
}

fn priority(x: u32) -> u64 {
    // splitmix64 finalizer: a fixed pseudo-random priority per key
    let mut z = (x as u64).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Node {
    fn new(x: u32, y: u32) -> Box<Node> {
        Box::new(Node {
            x,
            y,
            pri: priority(x),
            size: 1,
            left: None,
            right: None,
        })
    }

    fn update(&mut self) {
        self.size = 1 + size(&self.left) + size(&self.right);
    }
}

fn size(t: &Link) -> u32 {
    t.as_ref().map_or(0, |n| n.size)
}

/// Splits into the maximal prefix whose nodes satisfy `in_left` and the rest; `in_left`
/// must hold on a prefix of the in-order sequence.
fn split_by(t: Link, in_left: &impl Fn(&Node) -> bool, visits: &mut u64) -> (Link, Link) {
    match t {
        None => (None, None),
        Some(mut n) => {
            *visits += 1;
            if in_left(&n) {
                let (a, b) = split_by(n.right.take(), in_left, visits);
                n.right = a;
                n.update();
                (Some(n), b)
            } else {
                let (a, b) = split_by(n.left.take(), in_left, visits);
                n.left = b;
                n.update();
                (a, Some(n))
            }
        }
    }
}

/// Splits off the first `k` nodes.
fn split_rank(t: Link, k: u32, visits: &mut u64) -> (Link, Link) {
    match t {
        None => (None, None),
        Some(mut n) => {
            *visits += 1;
            let ls = size(&n.left);
            if k <= ls {
                let (a, b) = split_rank(n.left.take(), k, visits);
                n.left = b;
                n.update();
                (a, Some(n))
            } else {
                let (a, b) = split_rank(n.right.take(), k - ls - 1, visits);
                n.right = a;
                n.update();
                (Some(n), b)
            }
        }
    }
}

/// Concatenates two trees; every key of `a` precedes every key of `b`.
fn join(a: Link, b: Link, visits: &mut u64) -> Link {
    match (a, b) {
        (None, b) => b,
        (a, None) => a,
        (Some(mut a), Some(mut b)) => {
            *visits += 1;
            if a.pri > b.pri {
                a.right = join(a.right.take(), Some(b), visits);
                a.update();
                Some(a)
            } else {
                b.left = join(Some(a), b.left.take(), visits);
                b.update();
                Some(b)
            }
        }
    }
}

/// Builds a treap from points in increasing `x` in linear time.
fn build(points: &[(u32, u32)]) -> Link {
    let mut spine: Vec<Box<Node>> = Vec::new();
    for &(x, y) in points {
        let mut node = Node::new(x, y);
        let mut below: Link = None;
        while spine.last().is_some_and(|top| top.pri < node.pri) {
            let mut top = spine.pop().unwrap();
            top.right = below;
            top.update();
            below = Some(top);
        }
        node.left = below;
        spine.push(node);
    }
    let mut below: Link = None;
    while let Some(mut top) = spine.pop() {
        top.right = below;
        top.update();
        below = Some(top);
    }
    below
}

fn collect(t: &Link, out: &mut Vec<(u32, u32)>) {
    if let Some(n) = t {
        collect(&n.left, out);
        out.push((n.x, n.y));
        collect(&n.right, out);
    }
}

fn first(t: &Link) -> Option<(u32, u32)> {
    let mut n = t.as_deref()?;
    while let Some(l) = n.left.as_deref() {
        n = l;
    }
    Some((n.x, n.y))
}

fn last(t: &Link) -> Option<(u32, u32)> {
    let mut n = t.as_deref()?;
    while let Some(r) = n.right.as_deref() {
        n = r;
    }
    Some((n.x, n.y))
}

/// `y` of the last point with `x' < x` (or `x' ≤ x` when `inclusive`).
fn predecessor_y(t: &Link, x: u32, inclusive: bool, visits: &mut u64) -> Option<u32> {
    let mut best = None;
    let mut cur = t.as_deref();
    while let Some(n) = cur {
        *visits += 1;
        if n.x < x || (inclusive && n.x == x) {
            best = Some(n.y);
            cur = n.right.as_deref();
        } else {
            cur = n.left.as_deref();
        }
    }
    best
}

/// Answers sorted queries by descending once and dividing the batch at every node.
fn descend(t: &Link, xs: &[u32], out: &mut [Option<u32>], best: Option<u32>, visits: &mut u64) {
    if xs.is_empty() {
        return;
    }
    match t {
        None => out.fill(best),
        Some(n) => {
            *visits += 1;
            let k = xs.partition_point(|&x| x <= n.x);
            let (xl, xr) = xs.split_at(k);
            let (ol, or) = out.split_at_mut(k);
            descend(&n.left, xl, ol, best, visits);
            descend(&n.right, xr, or, Some(n.y), visits);
        }
    }
}

/// Sorts by `x`, keeps the smallest `y` per `x` and drops points dominated within the batch.
fn pareto(batch: &[(u32, u32)]) -> Vec<(u32, u32)> {
    let mut pts = batch.to_vec();
    pts.sort_unstable();
    let mut out: Vec<(u32, u32)> = Vec::with_capacity(pts.len());
    for p in pts {
        if out.last().is_none_or(|q| p.1 < q.1) {
            out.push(p);
        }
    }
    out
}

/// The staircase: mutually non-dominated points, `x` increasing and `y` decreasing.
#[derive(Debug, Default)]
pub struct Staircase {
    root: Link,
    visits: Cell<u64>,
}

impl Staircase {
    pub fn new() -> Self {
        Self::default()
    }

    /// From points already in staircase order (`x` increasing, `y` decreasing).
    pub fn from_sorted(points: &[(u32, u32)]) -> Self {
        assert!(
            points.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 > w[1].1),
            "points are not in staircase order"
        );
        Staircase {
            root: build(points),
            visits: Cell::new(points.len() as u64),
        }
    }

    fn with_root(root: Link) -> Self {
        Staircase {
            root,
            visits: Cell::new(0),
        }
    }

    pub fn len(&self) -> usize {
        size(&self.root) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.root.is_none()
    }

    /// Stored points in increasing `x`.
    pub fn points(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.len());
        collect(&self.root, &mut out);
        out
    }

    pub fn first(&self) -> Option<(u32, u32)> {
        first(&self.root)
    }

    pub fn last(&self) -> Option<(u32, u32)> {
        last(&self.root)
    }

    /// Tree nodes touched so far.
    pub fn visits(&self) -> u64 {
        self.visits.get()
    }

    fn count(&self, v: u64) {
        self.visits.set(self.visits.get() + v);
    }

    /// Smallest `y'` over stored points with `x' < x`, i.e. the `y` of the predecessor.
    pub fn query_min_y(&self, x: u32) -> Option<u32> {
        let mut v = 0;
        let r = predecessor_y(&self.root, x, false, &mut v);
        self.count(v);
        r
    }

    /// Whether some stored point has `x' < x` and `y' < y`.
    pub fn dominates_below(&self, x: u32, y: u32) -> bool {
        self.query_min_y(x).is_some_and(|m| m < y)
    }

    /// [`Staircase::query_min_y`] for every query, answers in input order.
    pub fn query_min_y_batch(&self, xs: &[u32]) -> Vec<Option<u32>> {
        if xs.windows(2).all(|w| w[0] <= w[1]) {
            let mut out = vec![None; xs.len()];
            self.query_min_y_sorted(xs, &mut out);
            return out;
        }
        let mut order: Vec<u32> = (0..xs.len() as u32).collect();
        order.sort_unstable_by_key(|&i| xs[i as usize]);
        let sorted: Vec<u32> = order.iter().map(|&i| xs[i as usize]).collect();
        let mut answers = vec![None; xs.len()];
        self.query_min_y_sorted(&sorted, &mut answers);
        let mut out = vec![None; xs.len()];
        for (k, &i) in order.iter().enumerate() {
            out[i as usize] = answers[k];
        }
        out
    }

    /// Batch query for non-decreasing `xs`; writes one answer per query into `out`.
    pub fn query_min_y_sorted(&self, xs: &[u32], out: &mut [Option<u32>]) {
        assert_eq!(xs.len(), out.len());
        debug_assert!(xs.windows(2).all(|w| w[0] <= w[1]), "queries not sorted");
        let mut v = 0;
        descend(&self.root, xs, out, None, &mut v);
        self.count(v);
    }

    pub fn insert(&mut self, x: u32, y: u32) {
        self.insert_batch(&[(x, y)]);
    }

    /// Adds a batch of points, keeping only the non-dominated ones overall.
    pub fn insert_batch(&mut self, batch: &[(u32, u32)]) {
        let batch = pareto(batch);
        if batch.is_empty() {
            return;
        }
        if self.is_empty() {
            *self = Staircase {
                root: build(&batch),
                visits: Cell::new(self.visits() + batch.len() as u64),
            };
            return;
        }

        let mut visits = self.visits();
        let pieces = std::mem::take(self).split_even_links(batch.len(), &mut visits);
        let starts: Vec<u32> = pieces.iter().map(|p| first(p).unwrap().0).collect();
        let mut done: Vec<Link> = Vec::with_capacity(pieces.len());
        // y of the last point kept so far: later points with y >= it are dominated
        let mut floor_y = u32::MAX;
        let mut next = 0;
        for (k, mut root) in pieces.into_iter().enumerate() {
            let end = match starts.get(k + 1) {
                Some(&bound) => next + batch[next..].partition_point(|p| p.0 < bound),
                None => batch.len(),
            };
            let local = &batch[next..end];
            next = end;

            if floor_y != u32::MAX {
                let (_, rest) = split_by(root, &|n: &Node| n.y >= floor_y, &mut visits);
                root = rest;
            }
            if local.len() as u32 > size(&root) {
                root = merge_linear(root, local, &mut floor_y, &mut visits);
            } else {
                for &(x, y) in local {
                    let below = predecessor_y(&root, x, true, &mut visits).map_or(floor_y, |m| m.min(floor_y));
                    if below <= y {
                        continue;
                    }
                    let (l, r) = split_by(root, &|n: &Node| n.x < x, &mut visits);
                    let (_, r) = split_by(r, &|n: &Node| n.y >= y, &mut visits);
                    root = join(join(l, Some(Node::new(x, y)), &mut visits), r, &mut visits);
                }
            }
            if let Some((_, y)) = last(&root) {
                floor_y = floor_y.min(y);
            }
            done.push(root);
        }
        self.root = merge_links(done, &mut visits);
        self.visits.set(visits);
    }

    /// Cuts into at most `b` consecutive pieces, each of size `< 2⌈len/b⌉` and at least 1.
    pub fn split_even(self, b: usize) -> Vec<Staircase> {
        let mut v = 0;
        let total = self.visits();
        let mut pieces: Vec<Staircase> = self
            .split_even_links(b, &mut v)
            .into_iter()
            .map(Staircase::with_root)
            .collect();
        if let Some(p) = pieces.first_mut() {
            p.visits.set(total + v);
        }
        pieces
    }

    fn split_even_links(self, b: usize, visits: &mut u64) -> Vec<Link> {
        assert!(b >= 1, "piece count must be positive");
        let n = self.len() as u32;
        let mut out = Vec::new();
        if n == 0 {
            return out;
        }
        let target = n.div_ceil(b as u32);
        fn rec(t: Link, target: u32, out: &mut Vec<Link>, visits: &mut u64) {
            let s = size(&t);
            if s >= 2 * target {
                let (a, b) = split_rank(t, s / 2, visits);
                rec(a, target, out, visits);
                rec(b, target, out, visits);
            } else {
                out.push(t);
            }
        }
        rec(self.root, target, &mut out, visits);
        out
    }

    /// Concatenates pieces given in increasing, non-overlapping `x` ranges by joining
    /// neighbours pairwise, level by level.
    pub fn merge_all(pieces: Vec<Staircase>) -> Staircase {
        for w in pieces.windows(2) {
            if let (Some(a), Some(b)) = (w[0].last(), w[1].first()) {
                assert!(a.0 < b.0, "pieces overlap in x: {} >= {}", a.0, b.0);
            }
        }
        let total: u64 = pieces.iter().map(|p| p.visits()).sum();
        let mut v = 0;
        let root = merge_links(pieces.into_iter().map(|p| p.root).collect(), &mut v);
        let s = Staircase::with_root(root);
        s.count(total + v);
        s
    }

    /// Checks ordering and subtree sizes.
    pub fn is_valid(&self) -> bool {
        fn sizes_ok(t: &Link) -> bool {
            match t {
                None => true,
                Some(n) => n.size == 1 + size(&n.left) + size(&n.right) && sizes_ok(&n.left) && sizes_ok(&n.right),
            }
        }
        let pts = self.points();
        sizes_ok(&self.root) && pts.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 > w[1].1)
    }
}

fn merge_links(mut level: Vec<Link>, visits: &mut u64) -> Link {
    if level.is_empty() {
        return None;
    }
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len().div_ceil(2));
        let mut it = level.into_iter();
        while let Some(a) = it.next() {
            next.push(match it.next() {
                Some(b) => join(a, b, visits),
                None => a,
            });
        }
        level = next;
    }
    level.pop().unwrap()
}

/// Merges a sorted, internally non-dominated batch into a piece by a linear sweep and
/// rebuilds it; used when the batch is larger than the piece.
fn merge_linear(root: Link, local: &[(u32, u32)], floor_y: &mut u32, visits: &mut u64) -> Link {
    let mut old = Vec::with_capacity(size(&root) as usize);
    collect(&root, &mut old);
    *visits += old.len() as u64 + local.len() as u64;
    drop(root);
    let mut merged: Vec<(u32, u32)> = Vec::with_capacity(old.len() + local.len());
    let (mut i, mut j) = (0, 0);
    let mut last_y = *floor_y;
    while i < old.len() || j < local.len() {
        let take_old = j == local.len() || (i < old.len() && old[i] < local[j]);
        let p = if take_old {
            i += 1;
            old[i - 1]
        } else {
            j += 1;
            local[j - 1]
        };
        if p.1 >= last_y {
            continue;
        }
        // a point with the same x and smaller y replaces its predecessor
        while merged.last().is_some_and(|q| q.0 == p.0) {
            merged.pop();
        }
        merged.push(p);
        last_y = p.1;
    }
    if let Some(&(_, y)) = merged.last() {
        *floor_y = (*floor_y).min(y);
    }
    build(&merged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::{naive_staircase, NaiveStaircase, StairOp};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn staircase(points: &[(u32, u32)]) -> Staircase {
        let mut s = Staircase::new();
        s.insert_batch(points);
        s
    }

    #[test]
    fn insert_examples() {
        assert_eq!(staircase(&[(2, 5), (4, 3)]).points(), vec![(2, 5), (4, 3)]);
        let mut s = staircase(&[(2, 5)]);
        s.insert_batch(&[(3, 6)]);
        assert_eq!(s.points(), vec![(2, 5)]);
        let mut s = staircase(&[(2, 5), (4, 3)]);
        s.insert_batch(&[(1, 1)]);
        assert_eq!(s.points(), vec![(1, 1)]);
    }

    #[test]
    fn visits_accumulate() {
        let mut s = staircase(&[(2, 5), (4, 3)]);
        let mut last = s.visits();
        for p in [(3, 4), (1, 9), (5, 1)] {
            s.insert_batch(&[p]);
            assert!(s.visits() > last);
            last = s.visits();
        }
    }

    #[test]
    fn query_examples() {
        let s = staircase(&[(2, 5), (4, 3)]);
        assert_eq!(s.query_min_y(3), Some(5));
        assert_eq!(s.query_min_y(5), Some(3));
        assert_eq!(s.query_min_y(1), None);
        assert_eq!(s.query_min_y_batch(&[5, 1, 3, 2]), vec![Some(3), None, Some(5), None]);
        assert!(s.dominates_below(3, 6));
        assert!(!s.dominates_below(3, 5));
        assert_eq!(Staircase::new().query_min_y(7), None);
    }

    #[test]
    fn split_even_examples() {
        let pts: Vec<(u32, u32)> = (1..=8).map(|i| (i, 100 - i)).collect();
        let pieces = Staircase::from_sorted(&pts).split_even(4);
        assert_eq!(pieces.iter().map(|p| p.len()).collect::<Vec<_>>(), vec![2, 2, 2, 2]);

        let pieces = Staircase::from_sorted(&[(1, 1)]).split_even(8);
        assert_eq!(pieces.len(), 1);

        let pts: Vec<(u32, u32)> = (1..=1000).map(|i| (i, 2000 - i)).collect();
        let pieces = Staircase::from_sorted(&pts).split_even(7);
        assert!(pieces.len() <= 7);
        assert!(pieces.iter().all(|p| !p.is_empty() && p.len() < 2 * 1000usize.div_ceil(7)));
        let concat: Vec<(u32, u32)> = pieces.iter().flat_map(|p| p.points()).collect();
        assert_eq!(concat, pts);

        assert!(Staircase::new().split_even(3).is_empty());
    }

    #[test]
    fn merge_examples() {
        let m = Staircase::merge_all(vec![Staircase::from_sorted(&[(1, 9)]), Staircase::from_sorted(&[(5, 2)])]);
        assert_eq!(m.points(), vec![(1, 9), (5, 2)]);
        assert!(Staircase::merge_all(vec![]).is_empty());
    }

    #[test]
    #[should_panic(expected = "overlap")]
    fn merge_rejects_overlap() {
        Staircase::merge_all(vec![Staircase::from_sorted(&[(5, 9)]), Staircase::from_sorted(&[(3, 2)])]);
    }

    #[test]
    fn oversized_batch_into_small_staircase() {
        let mut s = staircase(&[(50, 50)]);
        let batch: Vec<(u32, u32)> = (0..40).map(|i| (i * 3 + 1, 200 - i * 5)).collect();
        s.insert_batch(&batch);
        let mut naive = NaiveStaircase::new();
        naive.insert(50, 50);
        batch.iter().for_each(|&(x, y)| naive.insert(x, y));
        assert_eq!(s.points(), naive.pareto());
        assert!(s.is_valid());
    }

    #[test]
    fn random_traces_match_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..300 {
            let coord = rng.random_range(2..=300u32);
            let mut ops = Vec::new();
            for _ in 0..rng.random_range(1..=20) {
                let k = rng.random_range(0..=30);
                if rng.random_bool(0.5) {
                    ops.push(StairOp::Insert((0..k).map(|_| (rng.random_range(1..=coord), rng.random_range(1..=coord))).collect()));
                } else {
                    ops.push(StairOp::Query((0..k).map(|_| rng.random_range(1..=coord)).collect()));
                }
            }
            let want = naive_staircase(&ops);
            let mut s = Staircase::new();
            let mut naive = NaiveStaircase::new();
            let mut got = Vec::new();
            for op in &ops {
                match op {
                    StairOp::Insert(p) => {
                        s.insert_batch(p);
                        p.iter().for_each(|&(x, y)| naive.insert(x, y));
                        assert!(s.is_valid());
                        assert_eq!(s.points(), naive.pareto());
                    }
                    StairOp::Query(xs) => got.extend(s.query_min_y_batch(xs)),
                }
            }
            assert_eq!(got, want);
        }
    }

    proptest! {
        #[test]
        fn split_merge_roundtrip(n in 0usize..300, b in 1usize..40) {
            let pts: Vec<(u32, u32)> = (0..n as u32).map(|i| (2 * i + 1, 10_000 - 3 * i)).collect();
            let s = Staircase::from_sorted(&pts);
            let pieces = s.split_even(b);
            prop_assert!(pieces.len() <= b);
            if n > 0 {
                let cap = 2 * n.div_ceil(b);
                prop_assert!(pieces.iter().all(|p| !p.is_empty() && p.len() < cap));
            }
            let m = Staircase::merge_all(pieces);
            prop_assert!(m.is_valid());
            prop_assert_eq!(m.points(), pts);
        }

        #[test]
        fn batch_equals_one_by_one(points in proptest::collection::vec((1u32..64, 1u32..64), 0..40),
                                   queries in proptest::collection::vec(1u32..66, 0..20)) {
            let mut batched = Staircase::new();
            batched.insert_batch(&points);
            let mut single = Staircase::new();
            for &(x, y) in &points {
                single.insert(x, y);
            }
            prop_assert_eq!(batched.points(), single.points());
            let one: Vec<Option<u32>> = queries.iter().map(|&x| single.query_min_y(x)).collect();
            prop_assert_eq!(batched.query_min_y_batch(&queries), one);
        }
    }
}
