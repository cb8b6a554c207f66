//! The matching-pair solver: for every pair `(x, y)` with `A[x] = B[y]` it computes the length
//! of the best common increasing subsequence ending exactly there, one value at a time.
//!
//! Results are stored in per-length staircases `D(r)`. The best predecessor length of a pair is
//! found by a doubling binary search over `r`, where "does `D(r)` hold a point below `(x, y)`"
//! is monotone in `r`. All searches of one value advance together along a fixed traversal of a
//! conceptual complete binary tree over `r`, so that queries hitting the same level are
//! answered as one batch.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::alphabet::{Pos, PrevArrays, RankedInput, Rank};
use crate::staircase::Staircase;
use crate::{ceil_log2, Variant};

/// Per-length staircases: level `r` holds processed pairs whose result is exactly `r`.
#[derive(Debug, Default)]
pub struct ResultLevels {
    levels: Vec<Staircase>,
    max_level: u32,
}

impl ResultLevels {
    /// Room for results `1..=max_result`.
    pub fn new(max_result: usize) -> Self {
        ResultLevels {
            levels: (0..max_result).map(|_| Staircase::new()).collect(),
            max_level: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, r: u32) -> &Staircase {
        &self.levels[r as usize - 1]
    }

    /// Largest `r` whose level is non-empty, 0 if all are empty.
    pub fn max_level(&self) -> u32 {
        self.max_level
    }

    /// Inserts `(x, y, r)` triples with one batch per level.
    pub fn insert_results(&mut self, mut results: Vec<(u32, Pos, Pos)>) {
        results.sort_unstable();
        for group in results.chunk_by(|p, q| p.0 == q.0) {
            let r = group[0].0;
            let points: Vec<(u32, u32)> = group.iter().map(|&(_, x, y)| (x, y)).collect();
            self.levels[r as usize - 1].insert_batch(&points);
            self.max_level = self.max_level.max(r);
        }
    }

    /// Tree nodes touched by all levels so far.
    pub fn visits(&self) -> u64 {
        self.levels.iter().map(|s| s.visits()).sum()
    }
}

/// Chains that end outside the levels, e.g. in values handled by another solver.
pub trait ChainBase {
    /// Whether some chain of length `≥ r` ends strictly before `(x, y)`.
    fn reaches(&self, x: Pos, y: Pos, r: u32) -> bool;
    /// An upper bound on every `r` for which [`ChainBase::reaches`] holds in row `x`.
    fn bound(&self, x: Pos) -> u32;
}

/// No chains outside the levels.
pub struct NoBase;

impl ChainBase for NoBase {
    fn reaches(&self, _: Pos, _: Pos, _: u32) -> bool {
        false
    }

    fn bound(&self, _: Pos) -> u32 {
        0
    }
}

/// One event of the traversal: a tree node over `[a, a + m - 1]` and its first or second visit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Visit {
    pub a: u32,
    pub b: u32,
    pub second: bool,
}

/// The visit sequence over a complete binary tree on `n` leaves (rounded up to a power of
/// two): visit a node, traverse its right subtree, visit it again, traverse its left subtree.
pub fn traversal_order(n: usize) -> Vec<Visit> {
    assert!(n >= 1, "traversal needs at least one leaf");
    let n = n.next_power_of_two() as u32;
    fn rec(a: u32, m: u32, out: &mut Vec<Visit>) {
        let b = a + m - 1;
        out.push(Visit { a, b, second: false });
        if m > 1 {
            rec(a + m / 2, m / 2, out);
        }
        out.push(Visit { a, b, second: true });
        if m > 1 {
            rec(a, m / 2, out);
        }
    }
    let mut out = Vec::with_capacity(2 * (2 * n as usize - 1));
    rec(1, n, &mut out);
    out
}

/// A tree node with the index of its first visit in [`traversal_order`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Node {
    start: u32,
    a: u32,
    m: u32,
}

impl Node {
    fn first(self) -> u32 {
        self.start
    }

    fn second(self) -> u32 {
        self.start + 2 * self.m - 1
    }

    fn right(self) -> Node {
        Node {
            start: self.start + 1,
            a: self.a + self.m / 2,
            m: self.m / 2,
        }
    }

    fn left(self) -> Node {
        Node {
            start: self.start + 2 * self.m,
            a: self.a,
            m: self.m / 2,
        }
    }

    fn is_right_child(self) -> bool {
        ((self.a - 1) / self.m) % 2 == 1
    }

    /// Parent, given the total leaf count `n`; `None` at the root.
    fn parent(self, n: u32) -> Option<Node> {
        if self.m == n {
            return None;
        }
        Some(if self.is_right_child() {
            Node {
                start: self.start - 1,
                a: self.a - self.m,
                m: 2 * self.m,
            }
        } else {
            Node {
                start: self.start - 4 * self.m,
                a: self.a,
                m: 2 * self.m,
            }
        })
    }

    fn leaf(c: u32, n: u32) -> Node {
        let mut node = Node { start: 0, a: 1, m: n };
        while node.m > 1 {
            node = if c >= node.a + node.m / 2 { node.right() } else { node.left() };
        }
        node
    }
}

/// Work counters of the pair solver.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PairStats {
    pub pairs: u64,
    /// Tree-node queries over all pairs.
    pub node_queries: u64,
    /// Batched level calls, one per traversal event with waiting searches.
    pub level_batches: u64,
    /// Largest number of node queries charged to a single pair.
    pub max_pair_queries: u32,
    /// Per value: `(cnt(v), pairs, node queries)`.
    pub phases: Vec<(u32, u64, u64)>,
    /// Level queries re-answered by a scan, and how many disagreed.
    pub rechecked: u64,
    pub recheck_mismatches: u64,
}

impl PairStats {
    pub fn add(&mut self, o: &PairStats) {
        self.pairs += o.pairs;
        self.node_queries += o.node_queries;
        self.level_batches += o.level_batches;
        self.max_pair_queries = self.max_pair_queries.max(o.max_pair_queries);
        self.phases.extend_from_slice(&o.phases);
        self.rechecked += o.rechecked;
        self.recheck_mismatches += o.recheck_mismatches;
    }
}

#[derive(Clone, Copy, Debug)]
pub struct PairOptions {
    /// Re-answer every level query by scanning the level and count disagreements.
    pub recheck_queries: bool,
}

impl Default for PairOptions {
    fn default() -> Self {
        PairOptions {
            recheck_queries: cfg!(debug_assertions),
        }
    }
}

/// Per-pair budget of tree-node queries for inputs of size `n`.
pub fn query_budget(n: usize) -> u32 {
    4 * ceil_log2(n) + 4
}

/// Results of one value's pairs as a grid over occurrence indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhaseResults {
    pub v: Rank,
    pub xs: Vec<Pos>,
    pub ys: Vec<Pos>,
    /// `results[ix * ys.len() + iy]` belongs to `(xs[ix], ys[iy])`.
    pub results: Vec<u32>,
}

impl PhaseResults {
    pub fn get(&self, ix: usize, iy: usize) -> u32 {
        self.results[ix * self.ys.len() + iy]
    }

    /// `(x, y, result)` in increasing `x`, then `y`.
    pub fn triples(&self) -> impl Iterator<Item = (Pos, Pos, u32)> + '_ {
        self.xs.iter().enumerate().flat_map(move |(ix, &x)| {
            self.ys.iter().enumerate().map(move |(iy, &y)| (x, y, self.get(ix, iy)))
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    /// Query the leaf; on success it is the answer.
    Probe,
    /// Query after arriving from the right child; success sends the search into the left child.
    Ascend,
    /// Query the right child of the current node; it decides which child to enter.
    Descend,
    /// The answer is this leaf; its level is queried only to drain further pairs.
    Drain,
}

struct Search {
    x: Pos,
    /// Pairs `ys[..i]` are unresolved; the current one is `ys[i - 1]`.
    i: usize,
    node: Node,
    mode: Mode,
    /// Last level queried for this row and its answer.
    cached: Option<(u32, Option<u32>)>,
    charged: u32,
}

struct Phase<'a, B: ChainBase> {
    base: &'a B,
    ys: &'a [Pos],
    leaves: u32,
    budget: u32,
    grid: Vec<u32>,
    heap: BinaryHeap<Reverse<(u32, u32)>>,
    stats: PairStats,
}

impl<B: ChainBase> Phase<'_, B> {
    fn schedule(&mut self, id: usize, s: &mut Search, node: Node, mode: Mode, event: u32, now: Option<u32>) {
        debug_assert!(now.is_none_or(|e| event > e), "search scheduled into the past");
        s.node = node;
        s.mode = mode;
        self.heap.push(Reverse((event, id as u32)));
    }

    fn set(&mut self, ix: usize, i: usize, r: u32) {
        self.grid[ix * self.ys.len() + i - 1] = r;
    }

    fn holds(&self, s: &Search, r: u32, min_y: Option<u32>) -> bool {
        let y = self.ys[s.i - 1];
        min_y.is_some_and(|m| m < y) || self.base.reaches(s.x, y, r)
    }

    fn charge(&mut self, s: &mut Search) {
        s.charged += 1;
        self.stats.node_queries += 1;
        assert!(
            s.charged <= self.budget,
            "pair ({}, {}) needed more than {} node queries",
            s.x,
            self.ys[s.i - 1],
            self.budget
        );
    }

    fn next_pair(&mut self, s: &mut Search) {
        self.stats.max_pair_queries = self.stats.max_pair_queries.max(s.charged);
        s.charged = 0;
        s.i -= 1;
    }

    /// The best predecessor length of the current pair is `r`.
    fn resolve(&mut self, id: usize, ix: usize, s: &mut Search, r: u32, now: Option<u32>) {
        if r == 0 {
            while s.i > 0 {
                self.set(ix, s.i, 1);
                self.next_pair(s);
            }
            return;
        }
        let min_y = match s.cached {
            Some((level, m)) if level == r => m,
            _ => {
                let leaf = Node::leaf(r, self.leaves);
                let event = if now.is_some_and(|e| leaf.first() <= e) { leaf.second() } else { leaf.first() };
                self.schedule(id, s, leaf, Mode::Drain, event, now);
                return;
            }
        };
        self.set(ix, s.i, r + 1);
        self.next_pair(s);
        while s.i > 0 && self.holds(s, r, min_y) {
            self.set(ix, s.i, r + 1);
            self.next_pair(s);
        }
        if s.i > 0 {
            self.ascend_from(id, ix, s, Node::leaf(r, self.leaves), now);
        }
    }

    /// The query at `w` failed for the current pair: climb to the next ancestor worth asking.
    fn ascend_from(&mut self, id: usize, ix: usize, s: &mut Search, mut w: Node, now: Option<u32>) {
        loop {
            match w.parent(self.leaves) {
                None => return self.resolve(id, ix, s, 0, now),
                Some(p) if w.is_right_child() => return self.schedule(id, s, p, Mode::Ascend, p.second(), now),
                Some(p) => w = p,
            }
        }
    }

    /// The answer lies in `w`.
    fn enter(&mut self, id: usize, ix: usize, s: &mut Search, w: Node, now: Option<u32>) {
        if w.m == 1 {
            self.resolve(id, ix, s, w.a, now);
        } else {
            let r = w.right();
            self.schedule(id, s, w, Mode::Descend, r.first(), now);
        }
    }

    /// Continues a search after its awaited query at `now` was answered with `min_y`.
    fn step(&mut self, id: usize, ix: usize, s: &mut Search, level: u32, min_y: Option<u32>, now: u32) {
        s.cached = Some((level, min_y));
        let now = Some(now);
        let ok = self.holds(s, level, min_y);
        match s.mode {
            Mode::Probe if ok => self.resolve(id, ix, s, level, now),
            Mode::Probe => self.ascend_from(id, ix, s, s.node, now),
            Mode::Ascend if ok => self.enter(id, ix, s, s.node.left(), now),
            Mode::Ascend => self.ascend_from(id, ix, s, s.node, now),
            Mode::Descend if ok => self.enter(id, ix, s, s.node.right(), now),
            Mode::Descend => self.enter(id, ix, s, s.node.left(), now),
            Mode::Drain => {
                debug_assert!(ok, "drain leaf does not certify its pair");
                self.resolve(id, ix, s, level, now)
            }
        }
    }

}

/// The level a search waiting in its current mode queries.
fn query_level(s: &Search) -> u32 {
    match s.mode {
        Mode::Descend => s.node.right().a,
        _ => s.node.a,
    }
}

/// Results for every `σ[v]`-pair given all pairs of smaller values in `levels` (and `base`).
///
/// The result of `(x, y)` is `1 + max r` such that `D(r)` holds a point strictly below and
/// left of `(x, y)` or `base` reaches `r` there. Levels are only read.
pub fn solve_value_phase(
    input: &RankedInput,
    v: Rank,
    levels: &ResultLevels,
    base: &impl ChainBase,
    opts: &PairOptions,
) -> (PhaseResults, PairStats) {
    let xs = input.occ_a(v);
    let ys = input.occ_b(v);
    let leaves = levels.capacity().max(1).next_power_of_two() as u32;
    let mut phase = Phase {
        base,
        ys,
        leaves,
        budget: query_budget(input.n()),
        grid: vec![0; xs.len() * ys.len()],
        heap: BinaryHeap::new(),
        stats: PairStats {
            pairs: (xs.len() * ys.len()) as u64,
            ..PairStats::default()
        },
    };

    let mut searches: Vec<Search> = Vec::with_capacity(xs.len());
    if !ys.is_empty() {
        for (ix, &x) in xs.iter().enumerate() {
            let c = levels.max_level().max(base.bound(x)).min(leaves);
            let mut s = Search {
                x,
                i: ys.len(),
                node: Node::leaf(1, leaves),
                mode: Mode::Probe,
                cached: None,
                charged: 0,
            };
            if c == 0 {
                phase.resolve(ix, ix, &mut s, 0, None);
            } else {
                let leaf = Node::leaf(c, leaves);
                phase.schedule(ix, &mut s, leaf, Mode::Probe, leaf.first(), None);
            }
            searches.push(s);
        }
    }

    let mut batch: Vec<u32> = Vec::new();
    let mut qx: Vec<u32> = Vec::new();
    let mut answers: Vec<Option<u32>> = Vec::new();
    while let Some(&Reverse((event, _))) = phase.heap.peek() {
        batch.clear();
        while let Some(&Reverse((e, id))) = phase.heap.peek() {
            if e != event {
                break;
            }
            phase.heap.pop();
            batch.push(id);
        }
        let level = query_level(&searches[batch[0] as usize]);
        // ids ascend with x, so the batch is already sorted
        qx.clear();
        qx.extend(batch.iter().map(|&id| searches[id as usize].x));
        answers.clear();
        answers.resize(qx.len(), None);
        levels.level(level).query_min_y_sorted(&qx, &mut answers);
        phase.stats.level_batches += 1;
        if opts.recheck_queries {
            let pts = levels.level(level).points();
            for (k, &x) in qx.iter().enumerate() {
                let naive = pts.iter().filter(|p| p.0 < x).map(|p| p.1).min();
                phase.stats.rechecked += 1;
                phase.stats.recheck_mismatches += (naive != answers[k]) as u64;
            }
        }
        for (k, &id) in batch.iter().enumerate() {
            let id = id as usize;
            let mut s = std::mem::replace(
                &mut searches[id],
                Search {
                    x: 0,
                    i: 0,
                    node: Node::leaf(1, leaves),
                    mode: Mode::Probe,
                    cached: None,
                    charged: 0,
                },
            );
            debug_assert_eq!(query_level(&s), level);
            phase.charge(&mut s);
            phase.step(id, id, &mut s, level, answers[k], event);
            searches[id] = s;
        }
    }

    debug_assert!(
        phase.grid.chunks(ys.len().max(1)).all(|row| row.windows(2).all(|w| w[0] <= w[1])),
        "results decrease along a row"
    );
    let mut stats = phase.stats;
    stats.phases.push((input.cnt(v), stats.pairs, stats.node_queries));
    (
        PhaseResults {
            v,
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            results: phase.grid,
        },
        stats,
    )
}

/// Extends strict results by chains whose previous element has the same value: in increasing
/// `(x, y)`, `final(x, y) = max(strict(x, y), final(prev_a[x], prev_b[y]) + 1)`.
pub fn lcwis_equal_phase(phase: &mut PhaseResults, prev: &PrevArrays) {
    let w = phase.ys.len();
    for ix in 1..phase.xs.len() {
        debug_assert_eq!(prev.prev_a()[phase.xs[ix] as usize - 1], phase.xs[ix - 1]);
        for iy in 1..w {
            debug_assert_eq!(prev.prev_b()[phase.ys[iy] as usize - 1], phase.ys[iy - 1]);
            let chained = phase.results[(ix - 1) * w + iy - 1] + 1;
            let cell = &mut phase.results[ix * w + iy];
            *cell = (*cell).max(chained);
        }
    }
}

#[derive(Clone, Debug)]
pub struct PairOutcome {
    pub length: usize,
    pub stats: PairStats,
    /// Staircase nodes touched by level inserts and queries.
    pub level_visits: u64,
}

/// LCIS (or LCWIS) length by computing the result of every matching pair.
pub fn solve_pair_based(input: &RankedInput, variant: Variant) -> usize {
    solve_pair_based_with(input, variant, &PairOptions::default()).length
}

pub fn solve_pair_based_with(input: &RankedInput, variant: Variant, opts: &PairOptions) -> PairOutcome {
    let mut levels = ResultLevels::new(input.n_a().min(input.n_b()));
    let prev = crate::alphabet::build_prev_arrays(input);
    let mut stats = PairStats::default();
    for v in 1..=input.t() as Rank {
        if input.pair_count(v) == 0 {
            continue;
        }
        let (mut phase, s) = solve_value_phase(input, v, &levels, &NoBase, opts);
        stats.add(&s);
        if variant == Variant::Weak {
            lcwis_equal_phase(&mut phase, &prev);
        }
        levels.insert_results(phase.triples().map(|(x, y, r)| (r, x, y)).collect());
    }
    PairOutcome {
        length: levels.max_level() as usize,
        level_visits: levels.visits(),
        stats,
    }
}
