use std::thread;

use anyhow::Context;
use fmi_bench::Services;
use fmi_core::schedule::{binomial_schedule, recursive_doubling_rounds, RdPhase};
use fmi_core::{buffer_of, ChannelConfig, Communicator, CommunicatorConfig};

use crate::Checks;

fn log2_ceil(n: usize) -> u32 {
    let mut d = 0;
    while (1usize << d) < n {
        d += 1;
    }
    d
}

fn binomial(c: &mut Checks) -> anyhow::Result<()> {
    let mut bad = Vec::new();
    for n in 1..=64usize {
        for root in 0..n {
            let s = binomial_schedule(n, root)?;
            let mut recv_round = vec![None::<u32>; n];
            recv_round[root] = Some(0);
            let mut problems = Vec::new();
            if s.steps.len() != n - 1 {
                problems.push(format!("{} messages", s.steps.len()));
            }
            let mut steps = s.steps.clone();
            steps.sort_by_key(|st| st.round);
            for st in &steps {
                match recv_round[st.sender] {
                    Some(r) if r < st.round => {}
                    _ => problems.push(format!("rank {} sends in round {} before receiving", st.sender, st.round)),
                }
                if st.receiver == root || recv_round[st.receiver].is_some() {
                    problems.push(format!("rank {} receives twice", st.receiver));
                }
                recv_round[st.receiver] = Some(st.round);
            }
            if recv_round.iter().any(Option::is_none) {
                problems.push("a rank never receives".into());
            }
            for round in 1..=s.rounds() {
                let mut busy = vec![false; n];
                for st in steps.iter().filter(|st| st.round == round) {
                    for r in [st.sender, st.receiver] {
                        if std::mem::replace(&mut busy[r], true) {
                            problems.push(format!("rank {r} in two messages of round {round}"));
                        }
                    }
                }
            }
            if s.rounds() != log2_ceil(n) {
                problems.push(format!("depth {} want {}", s.rounds(), log2_ceil(n)));
            }
            if !problems.is_empty() {
                bad.push(format!("n={n} root={root}: {}", problems.join("; ")));
            }
        }
    }
    c.check(bad.is_empty(), format!("binomial schedules: {}", bad.join(" | ")));
    Ok(())
}

fn doubling(c: &mut Checks) {
    for n in (0..=6).map(|k| 1usize << k) {
        let rounds = recursive_doubling_rounds(n);
        c.check(
            rounds.len() as u32 == log2_ceil(n),
            format!("n={n}: {} doubling rounds", rounds.len()),
        );
        for (k, round) in rounds.iter().enumerate() {
            let mut seen = vec![0u32; n];
            for &(a, b) in &round.pairs {
                seen[a] += 1;
                seen[b] += 1;
            }
            let matching = round.phase == RdPhase::Exchange && seen.iter().all(|&s| s == 1);
            let xor = round.pairs.iter().all(|&(a, b)| a ^ b == 1 << k);
            c.check(matching && xor, format!("n={n} round {k} is not a perfect xor matching"));
        }
    }
}

fn bcast_frames(c: &mut Checks) -> anyhow::Result<()> {
    const N: usize = 8;
    let services = Services::start("direct", false)?;
    let coordinator = services.coordinator().context("no coordinator")?;
    let handles: Vec<_> = (0..N)
        .map(|rank| {
            thread::spawn(move || -> anyhow::Result<(u64, Vec<u8>)> {
                let cfg = CommunicatorConfig::new("acc-bcast8", N, rank, ChannelConfig::Direct { coordinator });
                let mut comm = Communicator::join(cfg)?;
                let data: Vec<u8> = if rank == 0 { (0..=255).collect() } else { vec![0; 256] };
                let before = comm.frames_sent();
                let out = comm.bcast(&buffer_of(&data), 0)?;
                Ok((comm.frames_sent() - before, out.into_bytes()))
            })
        })
        .collect();
    let mut frames = 0;
    for (rank, h) in handles.into_iter().enumerate() {
        let (sent, out) = h.join().expect("rank thread panicked")?;
        frames += sent;
        c.check(out == (0..=255).collect::<Vec<u8>>(), format!("rank {rank} got wrong bcast data"));
    }
    c.check(frames == 7, format!("bcast over 8 ranks sent {frames} payload frames, want 7"));
    Ok(())
}

pub fn run(c: &mut Checks) -> anyhow::Result<()> {
    binomial(c)?;
    doubling(c);
    bcast_frames(c)
}
