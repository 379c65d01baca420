//! The benchmark bodies, run by every rank over a joined communicator.
//! Each returns this rank's local samples in seconds.

use std::time::Instant;

use anyhow::{anyhow, ensure, Result};
use fmi_core::collectives::CollectiveKind;
use fmi_core::{buffer_of, Communicator, DataBuffer, Datatype, ReductionOp};

use crate::spec::collective_ints;

/// Rank 0 sends `size` bytes, rank 1 echoes them. Rank 0 records half of
/// each round trip after `warmups` discarded ones; rank 1 records nothing.
pub fn pingpong(comm: &mut Communicator, size: usize, reps: usize, warmups: usize) -> Result<Vec<f64>> {
    ensure!(size >= 1, "message size must be at least 1 byte");
    ensure!(comm.size() == 2, "ping-pong needs exactly 2 ranks, got {}", comm.size());
    let payload = DataBuffer::zeroed(Datatype::Byte, size);
    let mut samples = Vec::with_capacity(reps);
    for i in 0..warmups + reps {
        if comm.rank() == 0 {
            let t = Instant::now();
            comm.send(&payload, 1)?;
            let back = comm.recv(1, Datatype::Byte)?;
            let half = t.elapsed().as_secs_f64() / 2.0;
            ensure!(back.len_bytes() == size, "echo of {} bytes, sent {size}", back.len_bytes());
            if i >= warmups {
                samples.push(half);
            }
        } else {
            let msg = comm.recv(0, Datatype::Byte)?;
            comm.send(&msg, 0)?;
        }
    }
    Ok(samples)
}

/// Rank 0 sends the payload to every other rank in turn, without any tree.
/// Each rank times one repetition from a common barrier to its last byte.
pub fn one_to_many(comm: &mut Communicator, size: usize, reps: usize, warmups: usize) -> Result<Vec<f64>> {
    ensure!(size >= 1, "message size must be at least 1 byte");
    ensure!(comm.size() >= 2, "one-to-many needs at least one receiver");
    let payload = DataBuffer::zeroed(Datatype::Byte, size);
    let mut samples = Vec::with_capacity(reps);
    for i in 0..warmups + reps {
        comm.barrier()?;
        let t = Instant::now();
        if comm.rank() == 0 {
            for r in 1..comm.size() {
                comm.send(&payload, r)?;
            }
        } else {
            let got = comm.recv(0, Datatype::Byte)?;
            ensure!(got.len_bytes() == size, "received {} bytes, expected {size}", got.len_bytes());
        }
        if i >= warmups {
            samples.push(t.elapsed().as_secs_f64());
        }
    }
    Ok(samples)
}

/// Each repetition is a barrier followed by the timed collective. Results
/// are checked on every repetition.
pub fn collective_bench(comm: &mut Communicator, kind: CollectiveKind, reps: usize, warmups: usize) -> Result<Vec<f64>> {
    let n = comm.size();
    let me = comm.rank();
    let per = collective_ints(kind, n);
    let ones = buffer_of(&[1i32]);
    let own: Vec<i32> = (0..per).map(|i| (me * per + i) as i32).collect();
    let all: Vec<i32> = (0..per * n).map(|i| i as i32).collect();
    let mut samples = Vec::with_capacity(reps);
    for i in 0..warmups + reps {
        comm.barrier()?;
        let t = Instant::now();
        let out = match kind {
            CollectiveKind::Barrier => comm.barrier().map(|_| DataBuffer::empty(Datatype::Int32)),
            CollectiveKind::Bcast => comm.bcast(&buffer_of(&[if me == 0 { 42i32 } else { 0 }]), 0),
            CollectiveKind::Gather => comm.gather(&buffer_of(&own), 0),
            CollectiveKind::Scatter => comm.scatter(&buffer_of(if me == 0 { &all } else { &own }), 0),
            CollectiveKind::Reduce => comm.reduce(&ones, &ReductionOp::sum(), 0),
            CollectiveKind::Allreduce => comm.allreduce(&ones, &ReductionOp::sum()),
            CollectiveKind::Scan => comm.scan(&ones, &ReductionOp::sum()),
        }?;
        let elapsed = t.elapsed().as_secs_f64();
        let got = out.to_vec::<i32>()?;
        let expected: Vec<i32> = match kind {
            CollectiveKind::Barrier => vec![],
            CollectiveKind::Bcast => vec![42],
            CollectiveKind::Gather if me == 0 => all.clone(),
            CollectiveKind::Scatter => own.clone(),
            CollectiveKind::Reduce if me == 0 => vec![n as i32],
            CollectiveKind::Gather | CollectiveKind::Reduce => vec![],
            CollectiveKind::Allreduce => vec![n as i32],
            CollectiveKind::Scan => vec![me as i32 + 1],
        };
        if got != expected {
            return Err(anyhow!("{kind} produced a wrong result on rank {me} in repetition {i}"));
        }
        if i >= warmups {
            samples.push(elapsed);
        }
    }
    Ok(samples)
}
