//! 256 simultaneous pairings against one coordinator.

use std::sync::{Arc, Barrier};
use std::thread;
use std::time::{Duration, Instant};

use anyhow::Context;
use fmi_bench::Services;
use fmi_core::rendezvous::{pair, pairing_name, Pairing};

use crate::Checks;

const PAIRS: usize = 256;
const LIMIT: Duration = Duration::from_secs(5);

pub fn run(c: &mut Checks) -> anyhow::Result<()> {
    let services = Services::start("direct", false)?;
    let coordinator = services.coordinator().context("no coordinator")?;
    let gate = Arc::new(Barrier::new(2 * PAIRS + 1));
    let handles: Vec<_> = (0..2 * PAIRS)
        .map(|client| {
            let gate = gate.clone();
            thread::Builder::new()
                .stack_size(256 * 1024)
                .spawn(move || -> (fmi_core::Result<Pairing>, Instant) {
                    let name = pairing_name("acc-scale", 0, 1, client as u64 / 2);
                    gate.wait();
                    let r = pair(coordinator, &name, Duration::from_secs(20));
                    (r, Instant::now())
                })
                .expect("spawn client")
        })
        .collect();
    gate.wait();
    let start = Instant::now();

    let results: Vec<_> = handles
        .into_iter()
        .map(|h| h.join().expect("client panicked"))
        .collect();
    let last = results.iter().map(|(_, t)| *t).max().unwrap_or(start);
    let took = last.saturating_duration_since(start);

    let mut errors = Vec::new();
    let mut mismatched = 0;
    for (i, pairs) in results.chunks(2).enumerate() {
        match (&pairs[0].0, &pairs[1].0) {
            (Ok(a), Ok(b)) => {
                if a.peer.port() != b.local_port || b.peer.port() != a.local_port {
                    mismatched += 1;
                }
            }
            (a, b) => errors.push(format!("pair {i}: {:?} / {:?}", a.as_ref().err(), b.as_ref().err())),
        }
    }
    c.check(
        errors.is_empty(),
        format!("{} pairings failed, first: {}", errors.len(), errors.first().cloned().unwrap_or_default()),
    );
    c.check(mismatched == 0, format!("{mismatched} pairings exchanged the wrong endpoints"));
    c.check(took < LIMIT, format!("all pairings took {took:?}, limit {LIMIT:?}"));
    c.note(format!("{PAIRS} pairings of {} clients completed in {:.0} ms", 2 * PAIRS, took.as_secs_f64() * 1e3));
    Ok(())
}
