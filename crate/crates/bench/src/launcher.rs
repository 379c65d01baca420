//! Runs one benchmark as a world of worker processes.

use std::fs::File;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::{Child, Command, ExitStatus, Stdio};
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use serde::Serialize;

use crate::report::BenchmarkResult;
use crate::services::Services;
use crate::spec::BenchmarkSpec;
use crate::stats::max_across;
use crate::worker::WorkerReport;

/// Kill `rank` once the world has run for `after`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KillPlan {
    pub rank: usize,
    pub after: Duration,
}

#[derive(Debug, Clone)]
pub struct LaunchOptions {
    /// Executable that understands `worker --spec JSON --out FILE`.
    pub worker_bin: PathBuf,
    /// Start the coordinator or store in this process.
    pub auto_services: bool,
    /// Inject the store preset's latency (auto-started stores only).
    pub store_latency: bool,
    pub coordinator: Option<SocketAddr>,
    pub store: Option<SocketAddr>,
    pub comm_name: String,
    pub epoch: u64,
    pub join_timeout: Duration,
    pub op_timeout: Duration,
    /// Kill whatever is still running after this long.
    pub timeout: Duration,
    pub kill: Option<KillPlan>,
}

impl LaunchOptions {
    pub fn new(worker_bin: impl Into<PathBuf>) -> Self {
        LaunchOptions {
            worker_bin: worker_bin.into(),
            auto_services: true,
            store_latency: true,
            coordinator: None,
            store: None,
            comm_name: "bench".into(),
            epoch: 0,
            join_timeout: Duration::from_secs(30),
            op_timeout: Duration::from_secs(60),
            timeout: Duration::from_secs(600),
            kill: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FailedRank {
    pub rank: usize,
    pub reason: String,
}

#[derive(Debug)]
pub struct LaunchOutcome {
    pub result: BenchmarkResult,
    /// Indexed by rank; `None` if the worker left no report.
    pub reports: Vec<Option<WorkerReport>>,
    pub failed: Vec<FailedRank>,
    pub elapsed: Duration,
    pub worker_pids: Vec<u32>,
    /// Ports of services started for this run, all closed on return.
    pub service_ports: Vec<u16>,
}

impl LaunchOutcome {
    pub fn succeeded(&self) -> bool {
        self.failed.is_empty()
    }

    pub fn failed_ranks(&self) -> Vec<usize> {
        self.failed.iter().map(|f| f.rank).collect()
    }
}

/// Kills and reaps every child still running when dropped.
struct Fleet(Vec<(Child, Option<ExitStatus>)>);

impl Fleet {
    fn running(&self) -> usize {
        self.0.iter().filter(|(_, s)| s.is_none()).count()
    }

    fn poll(&mut self) -> Result<()> {
        for (child, status) in self.0.iter_mut().filter(|(_, s)| s.is_none()) {
            *status = child.try_wait()?;
        }
        Ok(())
    }

    fn kill(&mut self, rank: usize) {
        let (child, status) = &mut self.0[rank];
        if status.is_none() {
            let _ = child.kill();
            *status = child.wait().ok();
        }
    }

    fn kill_all(&mut self) {
        for rank in 0..self.0.len() {
            self.kill(rank);
        }
    }
}

impl Drop for Fleet {
    fn drop(&mut self) {
        self.kill_all();
    }
}

pub fn launch_world(spec: &BenchmarkSpec, opts: &LaunchOptions) -> Result<LaunchOutcome> {
    spec.validate()?;
    let mediated = spec.channel != "direct";
    let services = if opts.auto_services {
        Services::start(&spec.channel, opts.store_latency)?
    } else {
        Services::none()
    };
    let endpoint = if mediated {
        services.store().or(opts.store).context("no store address; pass one or auto-start services")?
    } else {
        services
            .coordinator()
            .or(opts.coordinator)
            .context("no coordinator address; pass one or auto-start services")?
    };
    let service_ports = services.ports();
    let dir = tempfile::tempdir().context("create result directory")?;
    let spec_json = serde_json::to_string(spec)?;
    let n = spec.world_size;

    let started = Instant::now();
    let mut fleet = Fleet(Vec::with_capacity(n));
    for rank in 0..n {
        let log = File::create(dir.path().join(format!("rank-{rank}.log")))?;
        let mut cmd = Command::new(&opts.worker_bin);
        cmd.arg("worker")
            .arg("--spec")
            .arg(&spec_json)
            .arg("--out")
            .arg(dir.path().join(format!("rank-{rank}.json")))
            .env("FMI_COMM_NAME", &opts.comm_name)
            .env("FMI_RANK", rank.to_string())
            .env("FMI_WORLD_SIZE", n.to_string())
            .env("FMI_CHANNEL", &spec.channel)
            .env("FMI_EPOCH", opts.epoch.to_string())
            .env("FMI_JOIN_TIMEOUT_MS", opts.join_timeout.as_millis().to_string())
            .env("FMI_OP_TIMEOUT_MS", opts.op_timeout.as_millis().to_string())
            .env(if mediated { "FMI_STORE" } else { "FMI_COORDINATOR" }, endpoint.to_string())
            .stdin(Stdio::null())
            .stdout(Stdio::null())
            .stderr(log);
        let child = cmd
            .spawn()
            .with_context(|| format!("spawn worker {}", opts.worker_bin.display()))?;
        fleet.0.push((child, None));
    }
    let worker_pids: Vec<u32> = fleet.0.iter().map(|(c, _)| c.id()).collect();
    log::debug!("launched {n} workers: {worker_pids:?}");

    let mut killed = None;
    let mut timed_out = false;
    while fleet.running() > 0 {
        fleet.poll()?;
        if let Some(plan) = opts.kill {
            if killed.is_none() && started.elapsed() >= plan.after {
                if plan.rank >= n {
                    bail!("cannot kill rank {} of {n}", plan.rank);
                }
                log::info!("killing rank {}", plan.rank);
                fleet.kill(plan.rank);
                killed = Some(plan.rank);
            }
        }
        if started.elapsed() >= opts.timeout {
            timed_out = fleet.running() > 0;
            fleet.kill_all();
            break;
        }
        std::thread::sleep(Duration::from_millis(5));
    }
    let elapsed = started.elapsed();
    let statuses: Vec<Option<ExitStatus>> = fleet.0.iter().map(|(_, s)| *s).collect();
    drop(fleet);

    let reports: Vec<Option<WorkerReport>> = (0..n)
        .map(|rank| {
            std::fs::read(dir.path().join(format!("rank-{rank}.json")))
                .ok()
                .and_then(|b| serde_json::from_slice(&b).ok())
        })
        .collect();
    let mut failed = Vec::new();
    for rank in 0..n {
        let ok = statuses[rank].map(|s| s.success()).unwrap_or(false);
        if ok {
            continue;
        }
        let reason = if killed == Some(rank) {
            "killed by launcher".to_string()
        } else if let Some(e) = reports[rank].as_ref().and_then(|r| r.error.as_ref()) {
            e.detail.clone()
        } else if timed_out && statuses[rank].map(|s| !s.success()).unwrap_or(true) {
            format!("still running after {:?}", opts.timeout)
        } else {
            let log = std::fs::read_to_string(dir.path().join(format!("rank-{rank}.log"))).unwrap_or_default();
            let tail = log.lines().last().unwrap_or("").to_string();
            format!("exited with {:?} {tail}", statuses[rank])
        };
        failed.push(FailedRank { rank, reason });
    }

    let per_worker: Vec<Vec<f64>> = reports
        .iter()
        .map(|r| r.as_ref().map(|r| r.samples.clone()).unwrap_or_default())
        .collect();
    let mut result = BenchmarkResult::new(
        spec.kind.label(),
        spec.channel.clone(),
        n,
        spec.size,
        max_across(&per_worker),
    );
    if mediated {
        result.metered_cost = services.metered_cost(elapsed.as_secs_f64());
    }
    services.shutdown();
    Ok(LaunchOutcome {
        result,
        reports,
        failed,
        elapsed,
        worker_pids,
        service_ports,
    })
}
