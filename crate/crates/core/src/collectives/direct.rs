//! Direct-channel algorithms: binomial trees for bcast, gather, scatter and
//! reduce; recursive doubling for allreduce (and barrier); a two-phase tree
//! for scan.
//!
//! Non-commutative operators are always combined in ascending rank order.

use super::{collective_tag as tag, PointToPoint};
use crate::buffer::{apply_reduce, DataBuffer, ReductionOp};
use crate::error::{FmiError, Result};
use crate::schedule::{BinomialTree, Child, RdRole};

const FOLD_ROUND: u32 = 0;
const UNFOLD_ROUND: u32 = 62;
const FORWARD_ROUND: u32 = 63;
const DOWN_SWEEP: u32 = 32;

/// Children of `rank` in ascending rank order within its subtree.
fn ascending(tree: &BinomialTree, rank: usize) -> Vec<Child> {
    let mut c = tree.children(rank);
    c.reverse();
    c
}

fn wrap(buf: &DataBuffer, bytes: Vec<u8>) -> Result<DataBuffer> {
    DataBuffer::from_bytes(buf.dtype(), bytes)
}

fn same_len(expected: usize, got: usize, from: usize) -> Result<()> {
    if expected != got {
        return Err(FmiError::protocol(format!(
            "rank {from} sent {got} bytes, expected {expected}"
        )));
    }
    Ok(())
}

pub fn bcast<T: PointToPoint + ?Sized>(t: &mut T, op_seq: u64, buf: &DataBuffer, root: usize) -> Result<DataBuffer> {
    let tree = BinomialTree::new(t.size(), root)?;
    let me = t.rank();
    let data = match tree.parent(me) {
        Some((parent, round)) => {
            let data = t.recv(parent, tag(op_seq, round))?;
            same_len(buf.len_bytes(), data.len(), parent)?;
            data
        }
        None => buf.as_bytes().to_vec(),
    };
    for c in tree.children(me) {
        t.send(c.rank, tag(op_seq, c.round), &data)?;
    }
    wrap(buf, data)
}

/// Reduces up `tree`; the tree root gets `Some(result)`.
fn tree_reduce<T: PointToPoint + ?Sized>(
    t: &mut T,
    op_seq: u64,
    buf: &DataBuffer,
    op: &ReductionOp,
    tree: &BinomialTree,
) -> Result<Option<DataBuffer>> {
    let me = t.rank();
    // children cover ascending relative ranges; fold them right to left
    let mut right: Option<DataBuffer> = None;
    for c in ascending(tree, me).iter().rev() {
        let part = wrap(buf, t.recv(c.rank, tag(op_seq, c.round))?)?;
        right = Some(match right {
            None => part,
            Some(r) => apply_reduce(op, &part, &r)?,
        });
    }
    let total = match right {
        None => buf.clone(),
        Some(r) => apply_reduce(op, buf, &r)?,
    };
    match tree.parent(me) {
        Some((parent, round)) => {
            t.send(parent, tag(op_seq, round), total.as_bytes())?;
            Ok(None)
        }
        None => Ok(Some(total)),
    }
}

/// The root returns the reduction; other ranks return an empty buffer.
pub fn reduce<T: PointToPoint + ?Sized>(
    t: &mut T,
    op_seq: u64,
    buf: &DataBuffer,
    op: &ReductionOp,
    root: usize,
) -> Result<DataBuffer> {
    let n = t.size();
    let me = t.rank();
    BinomialTree::new(n, root)?;
    let empty = DataBuffer::empty(buf.dtype());
    if op.is_commutative() || root == 0 {
        let tree = BinomialTree::new(n, root)?;
        return Ok(tree_reduce(t, op_seq, buf, op, &tree)?.unwrap_or(empty));
    }
    // rooted at 0 the subtrees are ascending absolute ranges
    let tree = BinomialTree::new(n, 0)?;
    let at_zero = tree_reduce(t, op_seq, buf, op, &tree)?;
    if me == 0 {
        let total = at_zero.expect("rank 0 is the tree root");
        t.send(root, tag(op_seq, FORWARD_ROUND), total.as_bytes())?;
        Ok(empty)
    } else if me == root {
        wrap(buf, t.recv(0, tag(op_seq, FORWARD_ROUND))?)
    } else {
        Ok(empty)
    }
}

/// The root returns every rank's buffer concatenated in rank order.
pub fn gather<T: PointToPoint + ?Sized>(t: &mut T, op_seq: u64, buf: &DataBuffer, root: usize) -> Result<DataBuffer> {
    let tree = BinomialTree::new(t.size(), root)?;
    let me = t.rank();
    let block = buf.len_bytes();
    let children = ascending(&tree, me);
    let mut parts: Vec<Vec<u8>> = vec![Vec::new(); children.len()];
    for (i, c) in children.iter().enumerate().rev() {
        let part = t.recv(c.rank, tag(op_seq, c.round))?;
        same_len(c.subtree * block, part.len(), c.rank)?;
        parts[i] = part;
    }
    let mut acc = Vec::with_capacity(tree.subtree(me) * block);
    acc.extend_from_slice(buf.as_bytes());
    for p in &parts {
        acc.extend_from_slice(p);
    }
    match tree.parent(me) {
        Some((parent, round)) => {
            t.send(parent, tag(op_seq, round), &acc)?;
            Ok(DataBuffer::empty(buf.dtype()))
        }
        None => {
            let n = tree.size();
            let mut out = Vec::with_capacity(n * block);
            for abs in 0..n {
                let rel = tree.relative(abs);
                out.extend_from_slice(&acc[rel * block..(rel + 1) * block]);
            }
            wrap(buf, out)
        }
    }
}

/// Splits the root's buffer into `n` equal slices; rank `i` gets slice `i`.
/// Non-root buffers only supply the datatype.
pub fn scatter<T: PointToPoint + ?Sized>(t: &mut T, op_seq: u64, buf: &DataBuffer, root: usize) -> Result<DataBuffer> {
    let n = t.size();
    let tree = BinomialTree::new(n, root)?;
    let me = t.rank();
    let (data, block) = match tree.parent(me) {
        Some((parent, round)) => {
            let data = t.recv(parent, tag(op_seq, round))?;
            let span = tree.subtree(me);
            if data.len() % span != 0 {
                return Err(FmiError::protocol(format!(
                    "scatter slice of {} bytes does not split over {span} ranks",
                    data.len()
                )));
            }
            let block = data.len() / span;
            (data, block)
        }
        None => {
            if !buf.count().is_multiple_of(n) {
                return Err(FmiError::protocol(format!(
                    "scatter of {} elements does not divide over {n} ranks",
                    buf.count()
                )));
            }
            let block = buf.len_bytes() / n;
            let src = buf.as_bytes();
            let mut data = Vec::with_capacity(src.len());
            for rel in 0..n {
                let abs = tree.absolute(rel);
                data.extend_from_slice(&src[abs * block..(abs + 1) * block]);
            }
            (data, block)
        }
    };
    let base = tree.relative(me);
    for c in tree.children(me) {
        let off = (tree.relative(c.rank) - base) * block;
        t.send(c.rank, tag(op_seq, c.round), &data[off..off + c.subtree * block])?;
    }
    wrap(buf, data[..block].to_vec())
}

pub fn allreduce<T: PointToPoint + ?Sized>(
    t: &mut T,
    op_seq: u64,
    buf: &DataBuffer,
    op: &ReductionOp,
) -> Result<DataBuffer> {
    let me = t.rank();
    let role = RdRole::new(t.size(), me);
    if let Some(upper) = role.folds_into {
        t.send(upper, tag(op_seq, FOLD_ROUND), buf.as_bytes())?;
        let result = t.recv(upper, tag(op_seq, UNFOLD_ROUND))?;
        same_len(buf.len_bytes(), result.len(), upper)?;
        return wrap(buf, result);
    }
    let mut acc = buf.clone();
    if let Some(lower) = role.absorbs {
        let theirs = wrap(buf, t.recv(lower, tag(op_seq, FOLD_ROUND))?)?;
        acc = apply_reduce(op, &theirs, &acc)?;
    }
    for (k, &partner) in role.exchange.iter().enumerate() {
        let theirs = wrap(buf, t.exchange(partner, tag(op_seq, 1 + k as u32), acc.as_bytes())?)?;
        acc = if partner < me {
            apply_reduce(op, &theirs, &acc)?
        } else {
            apply_reduce(op, &acc, &theirs)?
        };
    }
    if let Some(lower) = role.absorbs {
        t.send(lower, tag(op_seq, UNFOLD_ROUND), acc.as_bytes())?;
    }
    Ok(acc)
}

/// Allreduce of one byte under the no-op operator.
pub fn barrier<T: PointToPoint + ?Sized>(t: &mut T, op_seq: u64) -> Result<()> {
    allreduce(t, op_seq, &crate::buffer::buffer_of(&[0u8]), &ReductionOp::noop()).map(|_| ())
}

/// Inclusive prefix reduction: up-sweep subtree totals to rank 0, then
/// sweep exclusive prefixes back down the same tree.
pub fn scan<T: PointToPoint + ?Sized>(t: &mut T, op_seq: u64, buf: &DataBuffer, op: &ReductionOp) -> Result<DataBuffer> {
    let tree = BinomialTree::new(t.size(), 0)?;
    let me = t.rank();
    let children = ascending(&tree, me);
    let mut totals: Vec<Option<DataBuffer>> = vec![None; children.len()];
    for (i, c) in children.iter().enumerate().rev() {
        totals[i] = Some(wrap(buf, t.recv(c.rank, tag(op_seq, c.round))?)?);
    }
    let mut right: Option<DataBuffer> = None;
    for part in totals.iter().rev().flatten() {
        right = Some(match right {
            None => part.clone(),
            Some(r) => apply_reduce(op, part, &r)?,
        });
    }
    let inclusive = match tree.parent(me) {
        Some((parent, round)) => {
            let subtotal = match &right {
                None => buf.clone(),
                Some(r) => apply_reduce(op, buf, r)?,
            };
            t.send(parent, tag(op_seq, round), subtotal.as_bytes())?;
            let left = wrap(buf, t.recv(parent, tag(op_seq, DOWN_SWEEP + round))?)?;
            apply_reduce(op, &left, buf)?
        }
        None => buf.clone(),
    };
    let mut running = inclusive.clone();
    for (c, total) in children.iter().zip(&totals) {
        t.send(c.rank, tag(op_seq, DOWN_SWEEP + c.round), running.as_bytes())?;
        running = apply_reduce(op, &running, total.as_ref().expect("received above"))?;
    }
    Ok(inclusive)
}
