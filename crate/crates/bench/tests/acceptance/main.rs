//! Acceptance gate for the primary component.
//!
//! Runs every criterion at its stated tolerance and runtime budget and
//! prints one PASS/FAIL line per criterion. Exits non-zero if any fails.
//! Pass criterion numbers as arguments to run a subset.

mod backoff;
mod faults;
mod model;
mod oracle;
mod ordering;
mod rendezvous;
mod schedules;
mod wire;

use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

/// Sub-check results of one criterion.
#[derive(Default)]
pub struct Checks {
    passed: usize,
    failed: Vec<String>,
    notes: Vec<String>,
}

impl Checks {
    pub fn check(&mut self, ok: bool, what: impl Into<String>) {
        if ok {
            self.passed += 1;
        } else {
            self.failed.push(what.into());
        }
    }

    /// `|got - want| <= tol`.
    pub fn close(&mut self, what: &str, got: f64, want: f64, tol: f64) {
        self.check(
            (got - want).abs() <= tol,
            format!("{what}: got {got:.4}, want {want} +- {tol}"),
        );
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }
}

struct Criterion {
    id: u32,
    title: &'static str,
    budget: Duration,
    run: fn(&mut Checks) -> anyhow::Result<()>,
}

const CRITERIA: [Criterion; 8] = [
    Criterion {
        id: 1,
        title: "cost model golden table",
        budget: Duration::from_secs(1),
        run: model::run,
    },
    Criterion {
        id: 2,
        title: "collective oracle suite",
        budget: Duration::from_secs(600),
        run: oracle::run,
    },
    Criterion {
        id: 3,
        title: "schedule properties",
        budget: Duration::from_secs(30),
        run: schedules::run,
    },
    Criterion {
        id: 4,
        title: "backoff schedule",
        budget: Duration::from_secs(1),
        run: backoff::run,
    },
    Criterion {
        id: 5,
        title: "rendezvous scale",
        budget: Duration::from_secs(30),
        run: rendezvous::run,
    },
    Criterion {
        id: 6,
        title: "channel ordering",
        budget: Duration::from_secs(120),
        run: ordering::run,
    },
    Criterion {
        id: 7,
        title: "fault semantics",
        budget: Duration::from_secs(60),
        run: faults::run,
    },
    Criterion {
        id: 8,
        title: "wire format round-trips",
        budget: Duration::from_secs(30),
        run: wire::run,
    },
];

fn panic_message(p: Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<String>()
        .cloned()
        .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_else(|| "panic".into())
}

fn evaluate(c: &Criterion) -> bool {
    let mut checks = Checks::default();
    let start = Instant::now();
    let outcome = panic::catch_unwind(AssertUnwindSafe(|| (c.run)(&mut checks)));
    let elapsed = start.elapsed();
    match outcome {
        Ok(Ok(())) => {}
        Ok(Err(e)) => checks.failed.push(format!("error: {e:#}")),
        Err(p) => checks.failed.push(format!("panicked: {}", panic_message(p))),
    }
    if elapsed > c.budget {
        checks
            .failed
            .push(format!("took {:.1} s, budget {:.0} s", elapsed.as_secs_f64(), c.budget.as_secs_f64()));
    }
    let pass = checks.failed.is_empty();
    println!(
        "criterion {} [{}]: {} ({} checks passed, {} failed, {:.2} s)",
        c.id,
        c.title,
        if pass { "PASS" } else { "FAIL" },
        checks.passed,
        checks.failed.len(),
        elapsed.as_secs_f64()
    );
    for f in &checks.failed {
        println!("    failed: {f}");
    }
    for n in &checks.notes {
        println!("    note: {n}");
    }
    pass
}

fn main() {
    let wanted: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let selected: Vec<&Criterion> = CRITERIA
        .iter()
        .filter(|c| wanted.is_empty() || wanted.contains(&c.id))
        .collect();
    let red: Vec<u32> = selected.iter().filter(|c| !evaluate(c)).map(|c| c.id).collect();
    println!(
        "acceptance: {} of {} criteria passed",
        selected.len() - red.len(),
        selected.len()
    );
    if !red.is_empty() {
        println!("acceptance: failing criteria {red:?}");
        std::process::exit(1);
    }
}
