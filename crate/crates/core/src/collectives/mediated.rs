//! Store-mediated algorithms. Producers upload one object per message and
//! consumers poll for it with backoff. Every key of an operation lives
//! under `{prefix}/{op_seq}/`, and each algorithm removes what it wrote
//! before the last participant returns.

use super::CollectiveKind;
use crate::buffer::{apply_reduce, DataBuffer, ReductionOp};
use crate::error::{FmiError, Result};
use crate::mediated::{get_poll, poll_count, KvStore, PollConfig};

/// Where and how one rank talks through the store.
#[derive(Debug, Clone)]
pub struct MediatedCtx {
    /// `{communicator}/{epoch}`.
    pub prefix: String,
    pub rank: usize,
    pub size: usize,
    pub poll: PollConfig,
}

impl MediatedCtx {
    pub fn new(comm: &str, epoch: u64, rank: usize, size: usize, poll: PollConfig) -> Self {
        MediatedCtx {
            prefix: format!("{comm}/{epoch}"),
            rank,
            size,
            poll,
        }
    }

    /// `{prefix}/{op_seq}/{segment}/`
    pub fn op_prefix(&self, op_seq: u64, segment: &str) -> String {
        format!("{}/{op_seq}/{segment}/", self.prefix)
    }

    fn key(&self, op_seq: u64, segment: &str, src: usize) -> String {
        format!("{}{src}", self.op_prefix(op_seq, segment))
    }

    fn edge(&self, op_seq: u64, segment: &str, src: usize, dst: usize) -> String {
        format!("{}{src}>{dst}", self.op_prefix(op_seq, segment))
    }

    fn check_root(&self, root: usize) -> Result<()> {
        if root >= self.size {
            return Err(FmiError::protocol(format!(
                "root {root} outside communicator of size {}",
                self.size
            )));
        }
        Ok(())
    }
}

fn wrap(buf: &DataBuffer, bytes: Vec<u8>) -> Result<DataBuffer> {
    DataBuffer::from_bytes(buf.dtype(), bytes)
}

fn take<S: KvStore + ?Sized>(store: &mut S, ctx: &MediatedCtx, key: &str) -> Result<Vec<u8>> {
    let v = get_poll(store, key, &ctx.poll)?.value;
    store.delete(key)?;
    Ok(v)
}

fn bcast_as<S: KvStore + ?Sized>(
    store: &mut S,
    ctx: &MediatedCtx,
    op_seq: u64,
    segment: &str,
    buf: &DataBuffer,
    root: usize,
) -> Result<DataBuffer> {
    ctx.check_root(root)?;
    if ctx.size == 1 {
        return Ok(buf.clone());
    }
    let data_key = ctx.key(op_seq, segment, root);
    let ack = format!("{segment}.ack");
    if ctx.rank == root {
        store.put(&data_key, buf.as_bytes())?;
        poll_count(store, &ctx.op_prefix(op_seq, &ack), (ctx.size - 1) as u32, &ctx.poll)?;
        store.delete(&data_key)?;
        for r in (0..ctx.size).filter(|&r| r != root) {
            store.delete(&ctx.key(op_seq, &ack, r))?;
        }
        Ok(buf.clone())
    } else {
        let data = get_poll(store, &data_key, &ctx.poll)?.value;
        if data.len() != buf.len_bytes() {
            return Err(FmiError::protocol(format!(
                "broadcast carried {} bytes, expected {}",
                data.len(),
                buf.len_bytes()
            )));
        }
        store.put(&ctx.key(op_seq, &ack, ctx.rank), &[])?;
        wrap(buf, data)
    }
}

pub fn bcast<S: KvStore + ?Sized>(
    store: &mut S,
    ctx: &MediatedCtx,
    op_seq: u64,
    buf: &DataBuffer,
    root: usize,
) -> Result<DataBuffer> {
    bcast_as(store, ctx, op_seq, CollectiveKind::Bcast.as_str(), buf, root)
}

/// Everyone announces arrival and waits for the full count. A second
/// announcement round lets rank 0 clean up once nobody reads the first.
pub fn barrier<S: KvStore + ?Sized>(store: &mut S, ctx: &MediatedCtx, op_seq: u64) -> Result<()> {
    if ctx.size == 1 {
        return Ok(());
    }
    let n = ctx.size as u32;
    store.put(&ctx.key(op_seq, "barrier", ctx.rank), &[])?;
    poll_count(store, &ctx.op_prefix(op_seq, "barrier"), n, &ctx.poll)?;
    store.put(&ctx.key(op_seq, "barrier.ack", ctx.rank), &[])?;
    if ctx.rank == 0 {
        poll_count(store, &ctx.op_prefix(op_seq, "barrier.ack"), n, &ctx.poll)?;
        for r in 0..ctx.size {
            store.delete(&ctx.key(op_seq, "barrier", r))?;
            store.delete(&ctx.key(op_seq, "barrier.ack", r))?;
        }
    }
    Ok(())
}

pub fn gather<S: KvStore + ?Sized>(
    store: &mut S,
    ctx: &MediatedCtx,
    op_seq: u64,
    buf: &DataBuffer,
    root: usize,
) -> Result<DataBuffer> {
    ctx.check_root(root)?;
    if ctx.rank != root {
        store.put(&ctx.edge(op_seq, "gather", ctx.rank, root), buf.as_bytes())?;
        return Ok(DataBuffer::empty(buf.dtype()));
    }
    let mut out = Vec::with_capacity(buf.len_bytes() * ctx.size);
    for r in 0..ctx.size {
        if r == root {
            out.extend_from_slice(buf.as_bytes());
            continue;
        }
        let part = take(store, ctx, &ctx.edge(op_seq, "gather", r, root))?;
        if part.len() != buf.len_bytes() {
            return Err(FmiError::protocol(format!(
                "rank {r} gathered {} bytes, expected {}",
                part.len(),
                buf.len_bytes()
            )));
        }
        out.extend_from_slice(&part);
    }
    wrap(buf, out)
}

pub fn scatter<S: KvStore + ?Sized>(
    store: &mut S,
    ctx: &MediatedCtx,
    op_seq: u64,
    buf: &DataBuffer,
    root: usize,
) -> Result<DataBuffer> {
    ctx.check_root(root)?;
    if ctx.rank != root {
        let part = take(store, ctx, &ctx.edge(op_seq, "scatter", root, ctx.rank))?;
        return wrap(buf, part);
    }
    if !buf.count().is_multiple_of(ctx.size) {
        return Err(FmiError::protocol(format!(
            "scatter of {} elements does not divide over {} ranks",
            buf.count(),
            ctx.size
        )));
    }
    let per = buf.count() / ctx.size;
    for r in (0..ctx.size).filter(|&r| r != root) {
        store.put(&ctx.edge(op_seq, "scatter", root, r), buf.slice(r * per, per).as_bytes())?;
    }
    Ok(buf.slice(root * per, per))
}

fn reduce_as<S: KvStore + ?Sized>(
    store: &mut S,
    ctx: &MediatedCtx,
    op_seq: u64,
    segment: &str,
    buf: &DataBuffer,
    op: &ReductionOp,
    root: usize,
) -> Result<DataBuffer> {
    ctx.check_root(root)?;
    if ctx.rank != root {
        store.put(&ctx.edge(op_seq, segment, ctx.rank, root), buf.as_bytes())?;
        return Ok(DataBuffer::empty(buf.dtype()));
    }
    let mut acc: Option<DataBuffer> = None;
    for r in 0..ctx.size {
        let part = if r == root {
            buf.clone()
        } else {
            wrap(buf, take(store, ctx, &ctx.edge(op_seq, segment, r, root))?)?
        };
        acc = Some(match acc {
            None => part,
            Some(a) => apply_reduce(op, &a, &part)?,
        });
    }
    Ok(acc.expect("size is at least one"))
}

/// The root returns the reduction; other ranks return an empty buffer.
pub fn reduce<S: KvStore + ?Sized>(
    store: &mut S,
    ctx: &MediatedCtx,
    op_seq: u64,
    buf: &DataBuffer,
    op: &ReductionOp,
    root: usize,
) -> Result<DataBuffer> {
    reduce_as(store, ctx, op_seq, CollectiveKind::Reduce.as_str(), buf, op, root)
}

/// Reduce to rank 0, then broadcast from rank 0.
pub fn allreduce<S: KvStore + ?Sized>(
    store: &mut S,
    ctx: &MediatedCtx,
    op_seq: u64,
    buf: &DataBuffer,
    op: &ReductionOp,
) -> Result<DataBuffer> {
    let reduced = reduce_as(store, ctx, op_seq, "allreduce.reduce", buf, op, 0)?;
    let src = if ctx.rank == 0 { &reduced } else { buf };
    bcast_as(store, ctx, op_seq, "allreduce.bcast", src, 0)
}

/// Inclusive prefix along the rank chain.
pub fn scan<S: KvStore + ?Sized>(
    store: &mut S,
    ctx: &MediatedCtx,
    op_seq: u64,
    buf: &DataBuffer,
    op: &ReductionOp,
) -> Result<DataBuffer> {
    let me = ctx.rank;
    let inclusive = if me == 0 {
        buf.clone()
    } else {
        let left = wrap(buf, take(store, ctx, &ctx.edge(op_seq, "scan", me - 1, me))?)?;
        apply_reduce(op, &left, buf)?
    };
    if me + 1 < ctx.size {
        store.put(&ctx.edge(op_seq, "scan", me, me + 1), inclusive.as_bytes())?;
    }
    Ok(inclusive)
}

/// One-byte join barrier used when a communicator starts.
pub fn join<S: KvStore + ?Sized>(store: &mut S, ctx: &MediatedCtx) -> Result<()> {
    barrier(store, ctx, 0)
}
