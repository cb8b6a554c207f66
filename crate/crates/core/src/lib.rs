//! Exact solvers for the longest common increasing subsequence (LCIS) and its
//! weakly increasing relative (LCWIS).
//!
//! Four solvers share one input normalization ([`alphabet`]):
//!
//! * [`reference::solve_quadratic`]: the classical `O(nA·nB)` dynamic program, with witness.
//! * [`bitdp::solve_dp_tabulated`]: per-value layered dp kept as packed 0/1 difference rows,
//!   updated `B` columns at a time through precomputed transition tables.
//! * [`pairsolver::solve_pair_based`]: computes the best chain ending at every matching pair,
//!   driving synchronized doubling searches over per-length staircases ([`staircase`]).
//! * [`combined::solve_combined`]: splits the alphabet into frequent and rare values and runs
//!   the table solver on the former and the pair solver on the latter.
//!
//! The [`cli`] module holds instance I/O, generators and the verify/bench harness used by the
//! `lcis` binary.

pub mod alphabet;
pub mod bitdp;
pub mod cli;
pub mod combined;
pub mod error;
pub mod pairsolver;
pub mod reference;
pub mod staircase;

pub use error::{Error, Result};

/// Which flavour of "increasing" the common subsequence must satisfy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    /// Strictly increasing (LCIS).
    Strict,
    /// Weakly increasing, equal neighbours allowed (LCWIS).
    Weak,
}

impl Variant {
    pub const ALL: [Variant; 2] = [Variant::Strict, Variant::Weak];

    /// Short name used by the CLI and in reports.
    pub fn name(self) -> &'static str {
        match self {
            Variant::Strict => "lcis",
            Variant::Weak => "lcwis",
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// `⌈log₂ n⌉` with `ceil_log2(0) = ceil_log2(1) = 0`.
pub(crate) fn ceil_log2(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

/// `⌊log₂ n⌋` as a float-free integer, `0` for `n ≤ 1`.
pub(crate) fn floor_log2(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - 1 - n.leading_zeros()
    }
}
