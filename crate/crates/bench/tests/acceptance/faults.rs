//! Killing one of four workers in the middle of a long allreduce run.

use std::path::Path;
use std::time::Duration;

use fmi_bench::{launch_world, BenchmarkSpec, KillPlan, LaunchOptions};
use fmi_core::collectives::CollectiveKind;
use fmi_core::ErrorKind;

use crate::Checks;

const N: usize = 4;
const VICTIM: usize = 2;

/// Local ports in LISTEN state, from the kernel socket tables.
fn listening_ports() -> Vec<u16> {
    let mut ports = Vec::new();
    for table in ["/proc/net/tcp", "/proc/net/tcp6"] {
        let Ok(text) = std::fs::read_to_string(table) else { continue };
        for line in text.lines().skip(1) {
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.len() < 4 || cols[3] != "0A" {
                continue;
            }
            if let Some(port) = cols[1].rsplit(':').next().and_then(|h| u16::from_str_radix(h, 16).ok()) {
                ports.push(port);
            }
        }
    }
    ports
}

pub fn run(c: &mut Checks) -> anyhow::Result<()> {
    let mut spec = BenchmarkSpec::collective("direct", CollectiveKind::Allreduce, N, 100_000_000);
    spec.warmups = 0;
    let mut opts = LaunchOptions::new(env!("CARGO_BIN_EXE_fmi-bench"));
    opts.comm_name = "acc-fault".into();
    opts.op_timeout = Duration::from_secs(10);
    opts.timeout = Duration::from_secs(45);
    opts.kill = Some(KillPlan {
        rank: VICTIM,
        after: Duration::from_millis(1500),
    });
    let out = launch_world(&spec, &opts)?;

    let victim = out.failed.iter().find(|f| f.rank == VICTIM);
    c.check(
        victim.is_some_and(|f| f.reason.contains("killed")),
        format!("killed rank not reported: {:?}", out.failed),
    );
    for rank in (0..N).filter(|&r| r != VICTIM) {
        let Some(report) = out.reports[rank].as_ref() else {
            c.check(false, format!("rank {rank} left no report"));
            continue;
        };
        c.check(report.joined, format!("rank {rank} never joined"));
        c.check(
            !report.samples.is_empty() || report.error.is_some(),
            format!("rank {rank} neither ran nor failed"),
        );
        let kind = report.error.as_ref().and_then(|e| e.kind);
        c.check(
            matches!(kind, Some(ErrorKind::ChannelFailure | ErrorKind::Timeout)),
            format!("rank {rank} ended with {:?}", report.error),
        );
        c.check(report.aborted == Some(true), format!("rank {rank} communicator not aborted"));
        if let Some(e) = &report.error {
            c.note(format!("rank {rank}: {}", e.detail));
        }
    }
    c.check(
        out.elapsed < Duration::from_secs(30),
        format!("world took {:?} to wind down", out.elapsed),
    );

    let alive: Vec<u32> = out
        .worker_pids
        .iter()
        .copied()
        .filter(|pid| Path::new(&format!("/proc/{pid}")).exists())
        .collect();
    c.check(alive.is_empty(), format!("worker processes still alive: {alive:?}"));
    let listening = listening_ports();
    let leaked: Vec<u16> = out
        .service_ports
        .iter()
        .copied()
        .filter(|p| listening.contains(p))
        .collect();
    c.check(!out.service_ports.is_empty(), "no service ports recorded");
    c.check(leaked.is_empty(), format!("service ports still listening: {leaked:?}"));
    Ok(())
}
