//! Communication schedules for the direct-channel collectives.
//!
//! These are pure functions of the world size so they can be checked
//! exhaustively; the collectives walk the same structures at run time.

use serde::Serialize;

use crate::error::{FmiError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Step {
    /// 1-based round.
    pub round: u32,
    pub sender: usize,
    pub receiver: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CommSchedule {
    pub steps: Vec<Step>,
}

impl CommSchedule {
    pub fn rounds(&self) -> u32 {
        self.steps.iter().map(|s| s.round).max().unwrap_or(0)
    }
}

/// `ceil(log2(n))`, with `ceil_log2(1) == 0`.
pub fn ceil_log2(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

/// Binomial tree over `n` ranks rooted at `root`.
///
/// In relative numbering (`v = (rank - root) mod n`) with `K = ceil(log2 n)`,
/// every holder `v` that is a multiple of `2^(K-k+1)` passes the data to
/// `v + 2^(K-k)` in round `k`. A node received in round `k` therefore roots
/// the contiguous relative range `[v, v + 2^(K-k))`, which keeps gathered
/// blocks and reduction operands in rank order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinomialTree {
    n: usize,
    root: usize,
}

/// A child edge: absolute rank, the round it is used in, and the size of
/// the child's subtree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Child {
    pub rank: usize,
    pub round: u32,
    pub subtree: usize,
}

impl BinomialTree {
    pub fn new(n: usize, root: usize) -> Result<Self> {
        if root >= n {
            return Err(FmiError::protocol(format!("root {root} outside world of {n}")));
        }
        Ok(BinomialTree { n, root })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn relative(&self, rank: usize) -> usize {
        (rank + self.n - self.root) % self.n
    }

    pub fn absolute(&self, rel: usize) -> usize {
        (rel + self.root) % self.n
    }

    pub fn depth(&self) -> u32 {
        ceil_log2(self.n)
    }

    /// Round in which `rank` receives (0 for the root).
    pub fn recv_round(&self, rank: usize) -> u32 {
        let v = self.relative(rank);
        if v == 0 {
            0
        } else {
            self.depth() - v.trailing_zeros()
        }
    }

    pub fn parent(&self, rank: usize) -> Option<(usize, u32)> {
        let v = self.relative(rank);
        if v == 0 {
            return None;
        }
        let low = 1usize << v.trailing_zeros();
        Some((self.absolute(v - low), self.recv_round(rank)))
    }

    /// Children in ascending round order, which is descending rank order
    /// within the subtree.
    pub fn children(&self, rank: usize) -> Vec<Child> {
        let v = self.relative(rank);
        let depth = self.depth();
        let mut out = Vec::new();
        for k in self.recv_round(rank) + 1..=depth {
            let d = 1usize << (depth - k);
            let c = v + d;
            if c < self.n {
                out.push(Child {
                    rank: self.absolute(c),
                    round: k,
                    subtree: d.min(self.n - c),
                });
            }
        }
        out
    }

    /// Relative size of the subtree rooted at `rank` (including it).
    pub fn subtree(&self, rank: usize) -> usize {
        1 + self.children(rank).iter().map(|c| c.subtree).sum::<usize>()
    }
}

pub fn binomial_schedule(n: usize, root: usize) -> Result<CommSchedule> {
    let tree = BinomialTree::new(n, root)?;
    let mut steps: Vec<Step> = (0..n)
        .flat_map(|r| {
            tree.children(r).into_iter().map(move |c| Step {
                round: c.round,
                sender: r,
                receiver: c.rank,
            })
        })
        .collect();
    steps.sort_by_key(|s| (s.round, tree.relative(s.sender)));
    Ok(CommSchedule { steps })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RdPhase {
    /// Surplus even ranks hand their input to the odd neighbour above.
    Fold,
    Exchange,
    /// Results go back to the ranks that sat out.
    Unfold,
}

/// One round: a phase plus the unordered pairs talking in it, `(lo, hi)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RdRound {
    pub phase: RdPhase,
    pub pairs: Vec<(usize, usize)>,
}

impl RdRound {
    pub fn partner_of(&self, rank: usize) -> Option<usize> {
        self.pairs.iter().find_map(|&(a, b)| {
            if a == rank {
                Some(b)
            } else if b == rank {
                Some(a)
            } else {
                None
            }
        })
    }
}

/// Largest power of two `<= n` (n >= 1).
pub fn floor_pow2(n: usize) -> usize {
    1usize << (usize::BITS - 1 - n.leading_zeros())
}

/// How one rank takes part in recursive doubling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RdRole {
    /// `Some(upper)` for a rank that hands off to `upper` and sits out.
    pub folds_into: Option<usize>,
    /// `Some(lower)` for a rank that absorbs `lower`'s input first.
    pub absorbs: Option<usize>,
    /// Partner per exchange round; empty for ranks that sit out.
    pub exchange: Vec<usize>,
}

impl RdRole {
    pub fn new(n: usize, rank: usize) -> Self {
        let p = floor_pow2(n.max(1));
        let rem = n - p;
        let real = |q: usize| if q < rem { 2 * q + 1 } else { q + rem };
        if rank < 2 * rem && rank.is_multiple_of(2) {
            return RdRole {
                folds_into: Some(rank + 1),
                absorbs: None,
                exchange: Vec::new(),
            };
        }
        let (absorbs, q) = if rank < 2 * rem {
            (Some(rank - 1), rank / 2)
        } else {
            (None, rank - rem)
        };
        let rounds = p.trailing_zeros();
        let exchange = (0..rounds).map(|k| real(q ^ (1 << k))).collect();
        RdRole {
            folds_into: None,
            absorbs,
            exchange,
        }
    }
}

/// Per-round partner maps of recursive doubling over `n` ranks, including
/// the fold and unfold rounds for non-powers of two.
pub fn recursive_doubling_rounds(n: usize) -> Vec<RdRound> {
    if n <= 1 {
        return Vec::new();
    }
    let p = floor_pow2(n);
    let rem = n - p;
    let fold: Vec<(usize, usize)> = (0..rem).map(|i| (2 * i, 2 * i + 1)).collect();
    let mut rounds = Vec::new();
    if rem > 0 {
        rounds.push(RdRound {
            phase: RdPhase::Fold,
            pairs: fold.clone(),
        });
    }
    let roles: Vec<RdRole> = (0..n).map(|r| RdRole::new(n, r)).collect();
    for k in 0..p.trailing_zeros() as usize {
        let mut pairs: Vec<(usize, usize)> = roles
            .iter()
            .enumerate()
            .filter_map(|(r, role)| role.exchange.get(k).map(|&q| (r, q)))
            .filter(|(a, b)| a < b)
            .collect();
        pairs.sort_unstable();
        rounds.push(RdRound {
            phase: RdPhase::Exchange,
            pairs,
        });
    }
    if rem > 0 {
        rounds.push(RdRound {
            phase: RdPhase::Unfold,
            pairs: fold,
        });
    }
    rounds
}
