//! 1-byte ping-pong: direct channel against the object-store preset with
//! its injected latency.

use std::time::Duration;

use anyhow::Context;
use fmi_bench::{launch_world, BenchmarkSpec, LaunchOptions};

use crate::Checks;

const REPS: usize = 1000;

fn median(channel: &str, c: &mut Checks) -> anyhow::Result<f64> {
    let mut spec = BenchmarkSpec::pingpong(channel, 1, REPS);
    spec.warmups = 2;
    let mut opts = LaunchOptions::new(env!("CARGO_BIN_EXE_fmi-bench"));
    opts.comm_name = format!("acc-order-{channel}");
    opts.timeout = Duration::from_secs(180);
    let out = launch_world(&spec, &opts)?;
    c.check(out.succeeded(), format!("{channel} ping-pong failed: {:?}", out.failed));
    let summary = out.result.summary.context("no samples")?;
    c.check(
        summary.count == REPS,
        format!("{channel} ping-pong produced {} samples", summary.count),
    );
    c.note(format!(
        "{channel}: median one-way {:.3} ms over {} reps in {:.1} s",
        summary.median * 1e3,
        summary.count,
        out.elapsed.as_secs_f64()
    ));
    Ok(summary.median)
}

pub fn run(c: &mut Checks) -> anyhow::Result<()> {
    let direct = median("direct", c)?;
    let store = median("s3", c)?;
    let ratio = store / direct;
    c.check(ratio >= 10.0, format!("store/direct median ratio {ratio:.1}, want >= 10"));
    c.note(format!("store/direct median ratio {ratio:.0}"));
    Ok(())
}
