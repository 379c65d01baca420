//! Every collective against a serial oracle, for every world size up to 16
//! on both channel families, with randomized datatypes, operators, roots
//! and lengths. Results must match the oracle byte for byte.

use std::thread;
use std::time::{Duration, Instant};

use anyhow::Context;
use fmi_bench::Services;
use fmi_core::collectives::CollectiveKind;
use fmi_core::{
    ChannelConfig, ChannelProfile, Communicator, CommunicatorConfig, DataBuffer, Datatype, ReductionOp, Scalar,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::Checks;

const TRIALS: usize = 100;
const MAX_N: usize = 16;
const SEED: u64 = 0x5eed_0ff1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Op {
    Sum,
    Prod,
    Min,
    Max,
    /// `x -> m*x + c` over wrapping u32, packed `(m << 32) | c` in an i64.
    Affine,
}

impl Op {
    fn library(self) -> ReductionOp {
        match self {
            Op::Sum => ReductionOp::sum(),
            Op::Prod => ReductionOp::prod(),
            Op::Min => ReductionOp::min(),
            Op::Max => ReductionOp::max(),
            Op::Affine => ReductionOp::custom("affine", false, |a, b| match (a, b) {
                (Scalar::Int64(a), Scalar::Int64(b)) => Scalar::Int64(compose(a, b)),
                (a, _) => a,
            }),
        }
    }
}

fn compose(a: i64, b: i64) -> i64 {
    let (m1, c1) = ((a as u64 >> 32) as u32, a as u32);
    let (m2, c2) = ((b as u64 >> 32) as u32, b as u32);
    let m = m1.wrapping_mul(m2) as u64;
    let c = m2.wrapping_mul(c1).wrapping_add(c2) as u64;
    ((m << 32) | c) as i64
}

#[derive(Debug, Clone)]
struct Trial {
    kind: CollectiveKind,
    dtype: Datatype,
    op: Op,
    root: usize,
    /// Per-rank input bytes.
    inputs: Vec<Vec<u8>>,
}

fn random_bytes(rng: &mut ChaCha8Rng, len: usize) -> Vec<u8> {
    (0..len).map(|_| rng.gen()).collect()
}

fn reduction_input(rng: &mut ChaCha8Rng, op: Op, dtype: Datatype, count: usize) -> Vec<u8> {
    match dtype {
        Datatype::Float64 => (0..count)
            .flat_map(|_| {
                // nonzero so min and max never have to order -0.0 against 0.0
                let v: f64 = rng.gen_range(1e-3..1e9) * if rng.gen() { 1.0 } else { -1.0 };
                v.to_le_bytes()
            })
            .collect(),
        Datatype::Int64 if op == Op::Affine => (0..count)
            .flat_map(|_| ((rng.gen::<u32>() as u64) << 32 | rng.gen::<u32>() as u64).to_le_bytes())
            .collect(),
        _ => random_bytes(rng, count * dtype.width()),
    }
}

fn trial(n: usize, kind_idx: usize, t: usize) -> Trial {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ ((n as u64) << 40) ^ ((kind_idx as u64) << 32) ^ t as u64);
    let kind = CollectiveKind::ALL[kind_idx];
    let any_dtype = [Datatype::Int32, Datatype::Int64, Datatype::Float64, Datatype::Byte][rng.gen_range(0..4)];
    let root = rng.gen_range(0..n);
    let mut tr = Trial {
        kind,
        dtype: any_dtype,
        op: Op::Sum,
        root,
        inputs: vec![Vec::new(); n],
    };
    match kind {
        CollectiveKind::Barrier => {}
        CollectiveKind::Bcast => {
            let len = rng.gen_range(0..=12) * any_dtype.width();
            for r in 0..n {
                tr.inputs[r] = if r == root { random_bytes(&mut rng, len) } else { vec![0; len] };
            }
        }
        CollectiveKind::Gather => {
            let len = rng.gen_range(0..=6) * any_dtype.width();
            for input in &mut tr.inputs {
                *input = random_bytes(&mut rng, len);
            }
        }
        CollectiveKind::Scatter => {
            let len = n * rng.gen_range(0..=6) * any_dtype.width();
            tr.inputs[root] = random_bytes(&mut rng, len);
        }
        CollectiveKind::Reduce | CollectiveKind::Allreduce | CollectiveKind::Scan => {
            let (op, dtype) = match rng.gen_range(0..7) {
                0 => (Op::Sum, Datatype::Int32),
                1 => (Op::Sum, Datatype::Int64),
                2 => (Op::Prod, Datatype::Int32),
                3 => (Op::Prod, Datatype::Int64),
                4 => (Op::Min, Datatype::Float64),
                5 => (Op::Max, Datatype::Float64),
                _ => (Op::Affine, Datatype::Int64),
            };
            tr.op = op;
            tr.dtype = dtype;
            let count = rng.gen_range(0..=8);
            for input in &mut tr.inputs {
                *input = reduction_input(&mut rng, op, dtype, count);
            }
        }
    }
    tr
}

fn combine(op: Op, dtype: Datatype, a: &[u8], b: &[u8]) -> Vec<u8> {
    let w = dtype.width();
    let mut out = Vec::with_capacity(a.len());
    for (x, y) in a.chunks_exact(w).zip(b.chunks_exact(w)) {
        match dtype {
            Datatype::Int32 => {
                let (x, y) = (i32::from_le_bytes(x.try_into().unwrap()), i32::from_le_bytes(y.try_into().unwrap()));
                let v = match op {
                    Op::Sum => x.wrapping_add(y),
                    Op::Prod => x.wrapping_mul(y),
                    Op::Min => x.min(y),
                    Op::Max => x.max(y),
                    Op::Affine => unreachable!("affine is defined on int64"),
                };
                out.extend_from_slice(&v.to_le_bytes());
            }
            Datatype::Int64 => {
                let (x, y) = (i64::from_le_bytes(x.try_into().unwrap()), i64::from_le_bytes(y.try_into().unwrap()));
                let v = match op {
                    Op::Sum => x.wrapping_add(y),
                    Op::Prod => x.wrapping_mul(y),
                    Op::Min => x.min(y),
                    Op::Max => x.max(y),
                    Op::Affine => compose(x, y),
                };
                out.extend_from_slice(&v.to_le_bytes());
            }
            Datatype::Float64 => {
                let (x, y) = (f64::from_le_bytes(x.try_into().unwrap()), f64::from_le_bytes(y.try_into().unwrap()));
                let v = match op {
                    Op::Min => if y < x { y } else { x },
                    Op::Max => if y > x { y } else { x },
                    _ => unreachable!("float trials only use min and max"),
                };
                out.extend_from_slice(&v.to_le_bytes());
            }
            Datatype::Byte => unreachable!("no byte reductions"),
        }
    }
    out
}

/// Left fold over ranks `0..=last`, in rank order.
fn fold(tr: &Trial, last: usize) -> Vec<u8> {
    let mut acc = tr.inputs[0].clone();
    for input in &tr.inputs[1..=last] {
        acc = combine(tr.op, tr.dtype, &acc, input);
    }
    acc
}

/// What `rank` must return.
fn expected(tr: &Trial, rank: usize) -> Vec<u8> {
    let n = tr.inputs.len();
    let at_root = |v: Vec<u8>| if rank == tr.root { v } else { Vec::new() };
    match tr.kind {
        CollectiveKind::Barrier => Vec::new(),
        CollectiveKind::Bcast => tr.inputs[tr.root].clone(),
        CollectiveKind::Gather => at_root(tr.inputs.concat()),
        CollectiveKind::Scatter => {
            let block = tr.inputs[tr.root].len() / n;
            tr.inputs[tr.root][rank * block..(rank + 1) * block].to_vec()
        }
        CollectiveKind::Reduce => at_root(fold(tr, n - 1)),
        CollectiveKind::Allreduce => fold(tr, n - 1),
        CollectiveKind::Scan => fold(tr, rank),
    }
}

/// One rank's output of one trial: the bytes, plus entry and exit times for barriers.
type Output = (Vec<u8>, Instant, Instant);

fn run_rank(cfg: CommunicatorConfig) -> Result<Vec<Vec<Output>>, String> {
    let (n, rank) = (cfg.world_size, cfg.rank);
    let mut comm = Communicator::join(cfg).map_err(|e| format!("join: {e}"))?;
    let mut outputs = Vec::new();
    for (k, kind) in CollectiveKind::ALL.into_iter().enumerate() {
        let mut per_kind = Vec::with_capacity(TRIALS);
        for t in 0..TRIALS {
            let tr = trial(n, k, t);
            let buf = DataBuffer::from_bytes(tr.dtype, tr.inputs[rank].clone()).map_err(|e| e.to_string())?;
            let op = tr.op.library();
            let entered = Instant::now();
            let got = match kind {
                CollectiveKind::Barrier => comm.barrier().map(|()| DataBuffer::empty(tr.dtype)),
                CollectiveKind::Bcast => comm.bcast(&buf, tr.root),
                CollectiveKind::Gather => comm.gather(&buf, tr.root),
                CollectiveKind::Scatter => comm.scatter(&buf, tr.root),
                CollectiveKind::Reduce => comm.reduce(&buf, &op, tr.root),
                CollectiveKind::Allreduce => comm.allreduce(&buf, &op),
                CollectiveKind::Scan => comm.scan(&buf, &op),
            }
            .map_err(|e| format!("{kind} trial {t}: {e}"))?;
            per_kind.push((got.into_bytes(), entered, Instant::now()));
        }
        outputs.push(per_kind);
    }
    Ok(outputs)
}

/// Runs a world of `n` rank threads and compares every output with the oracle.
fn world(n: usize, family: &'static str, channel: ChannelConfig) -> thread::JoinHandle<Result<(), String>> {
    thread::spawn(move || {
        let ranks: Vec<_> = (0..n)
            .map(|rank| {
                let cfg = CommunicatorConfig::new(format!("acc-oracle-{family}-{n}"), n, rank, channel.clone())
                    .with_join_timeout(Duration::from_secs(300))
                    .with_op_timeout(Duration::from_secs(60));
                thread::Builder::new()
                    .stack_size(512 * 1024)
                    .spawn(move || run_rank(cfg))
                    .expect("spawn rank")
            })
            .collect();
        let results: Vec<Result<Vec<Vec<Output>>, String>> = ranks
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err("rank panicked".into())))
            .collect();
        let mut outputs = Vec::with_capacity(n);
        for (rank, r) in results.into_iter().enumerate() {
            outputs.push(r.map_err(|e| format!("rank {rank}: {e}"))?);
        }

        let mut mismatches = Vec::new();
        for (k, kind) in CollectiveKind::ALL.into_iter().enumerate() {
            for t in 0..TRIALS {
                let tr = trial(n, k, t);
                for (rank, out) in outputs.iter().enumerate() {
                    if out[k][t].0 != expected(&tr, rank) {
                        mismatches.push(format!("{kind} trial {t} rank {rank} ({:?}, {}, root {})", tr.op, tr.dtype, tr.root));
                    }
                }
                if kind == CollectiveKind::Barrier {
                    let last_in = outputs.iter().map(|o| o[k][t].1).max().unwrap();
                    let first_out = outputs.iter().map(|o| o[k][t].2).min().unwrap();
                    if first_out < last_in {
                        mismatches.push(format!("barrier trial {t}: a rank left before every rank entered"));
                    }
                }
            }
        }
        if mismatches.is_empty() {
            Ok(())
        } else {
            Err(format!("{} mismatches, first: {}", mismatches.len(), mismatches[0]))
        }
    })
}

pub fn run(c: &mut Checks) -> anyhow::Result<()> {
    let direct = Services::start("direct", false)?;
    let coordinator = direct.coordinator().context("no coordinator")?;
    let store = Services::start("redis", false)?;
    let store_addr = store.store().context("no store")?;
    let mediated = ChannelConfig::Mediated {
        store: store_addr,
        profile: ChannelProfile::redis(),
    };

    let started = Instant::now();
    let mut worlds = Vec::new();
    for n in 1..=MAX_N {
        worlds.push((n, "direct", world(n, "direct", ChannelConfig::Direct { coordinator })));
        worlds.push((n, "mediated", world(n, "mediated", mediated.clone())));
    }
    for (n, family, h) in worlds {
        let r = h.join().unwrap_or_else(|_| Err("world panicked".into()));
        c.check(r.is_ok(), format!("{family} n={n}: {}", r.err().unwrap_or_default()));
    }
    let leftover = store.store_core().map(|s| s.len()).unwrap_or(0);
    c.check(leftover == 0, format!("{leftover} keys left in the store"));
    c.note(format!(
        "{} collective calls per rank over 32 worlds in {:.1} s",
        TRIALS * CollectiveKind::ALL.len(),
        started.elapsed().as_secs_f64()
    ));
    Ok(())
}
