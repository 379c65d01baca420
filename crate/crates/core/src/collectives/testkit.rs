//! Serial reference results for checking the distributed algorithms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::CollectiveKind;
use crate::buffer::{buffer_of, DataBuffer, ReductionOp, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefOp {
    Sum,
    Prod,
    Min,
    Max,
    /// Composition of maps `x -> m*x + c` over wrapping u32, packed as
    /// `(m << 32) | c`. Associative, not commutative.
    Affine,
}

impl RefOp {
    pub const ALL: [RefOp; 5] = [RefOp::Sum, RefOp::Prod, RefOp::Min, RefOp::Max, RefOp::Affine];

    pub fn apply(self, a: i64, b: i64) -> i64 {
        match self {
            RefOp::Sum => a.wrapping_add(b),
            RefOp::Prod => a.wrapping_mul(b),
            RefOp::Min => a.min(b),
            RefOp::Max => a.max(b),
            RefOp::Affine => {
                let (m1, c1) = ((a as u64 >> 32) as u32, a as u32);
                let (m2, c2) = ((b as u64 >> 32) as u32, b as u32);
                let m = m1.wrapping_mul(m2);
                let c = m2.wrapping_mul(c1).wrapping_add(c2);
                (((m as u64) << 32) | c as u64) as i64
            }
        }
    }

    pub fn op(self) -> ReductionOp {
        match self {
            RefOp::Sum => ReductionOp::sum(),
            RefOp::Prod => ReductionOp::prod(),
            RefOp::Min => ReductionOp::min(),
            RefOp::Max => ReductionOp::max(),
            RefOp::Affine => ReductionOp::custom("affine", false, |a, b| match (a, b) {
                (Scalar::Int64(x), Scalar::Int64(y)) => Scalar::Int64(RefOp::Affine.apply(x, y)),
                (a, _) => a,
            }),
        }
    }
}

fn fold(op: RefOp, parts: &[Vec<i64>]) -> Vec<i64> {
    let mut acc = parts[0].clone();
    for p in &parts[1..] {
        for (a, b) in acc.iter_mut().zip(p) {
            *a = op.apply(*a, *b);
        }
    }
    acc
}

/// What `rank` must hold after `kind` over `inputs`.
pub fn expected(kind: CollectiveKind, op: RefOp, inputs: &[Vec<i64>], root: usize, rank: usize) -> Vec<i64> {
    let n = inputs.len();
    match kind {
        CollectiveKind::Bcast => inputs[root].clone(),
        CollectiveKind::Barrier => Vec::new(),
        CollectiveKind::Gather if rank == root => inputs.concat(),
        CollectiveKind::Scatter => {
            let per = inputs[root].len() / n;
            inputs[root][rank * per..(rank + 1) * per].to_vec()
        }
        CollectiveKind::Reduce if rank == root => fold(op, inputs),
        CollectiveKind::Allreduce => fold(op, inputs),
        CollectiveKind::Scan => fold(op, &inputs[..=rank]),
        CollectiveKind::Gather | CollectiveKind::Reduce => Vec::new(),
    }
}

/// Random per-rank inputs of `m` elements; scatter roots get `m * n`.
pub fn inputs(seed: u64, kind: CollectiveKind, n: usize, m: usize, root: usize) -> Vec<Vec<i64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|r| {
            let len = if kind == CollectiveKind::Scatter && r == root { m * n } else { m };
            (0..len).map(|_| rng.gen()).collect()
        })
        .collect()
}

pub fn as_buffer(v: &[i64]) -> DataBuffer {
    buffer_of(v)
}
