use std::cell::Cell;
use std::time::Duration;

use fmi_core::mediated::{poll_with, PollConfig};
use fmi_core::{backoff_delay, BackoffPolicy, ErrorKind};

use crate::Checks;

pub fn run(c: &mut Checks) -> anyhow::Result<()> {
    for (retry, want) in [(1, 1), (100, 100), (101, 202), (102, 204)] {
        let got = backoff_delay(retry)?;
        c.check(
            got == Duration::from_millis(want),
            format!("backoff_delay({retry}) = {got:?}, want {want} ms"),
        );
    }
    let past = backoff_delay(501);
    c.check(
        past.as_ref().is_err_and(|e| e.kind == ErrorKind::RetriesExhausted),
        format!("backoff_delay(501) = {past:?}, want RetriesExhausted"),
    );

    let mut total_ms = 0u64;
    for r in 1..=500 {
        total_ms += backoff_delay(r)?.as_millis() as u64;
    }
    c.check(total_ms == 245_450, format!("summed worst case {total_ms} ms, want 245450"));
    let policy_total = BackoffPolicy::default().worst_case_total();
    c.check(
        policy_total == Duration::from_millis(245_450),
        format!("policy worst case {policy_total:?}"),
    );

    // a poll that never succeeds gives up after 500 reads without sleeping for real
    let reads = Cell::new(0u32);
    let mut slept = Duration::ZERO;
    let r = poll_with(
        &PollConfig::default(),
        || {
            reads.set(reads.get() + 1);
            Ok(None::<()>)
        },
        |d| slept += d,
    );
    c.check(
        r.as_ref().is_err_and(|e| e.kind == ErrorKind::RetriesExhausted),
        format!("exhausted poll returned {r:?}"),
    );
    c.check(reads.get() == 500, format!("exhausted poll made {} reads", reads.get()));
    c.check(slept > Duration::from_secs(240), format!("simulated sleep {slept:?}"));
    Ok(())
}
