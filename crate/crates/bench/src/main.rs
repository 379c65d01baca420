use std::fs::File;
use std::io::{self, Write};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fmi_bench::cost_report::{cost_table, load_preset, write_csv, write_text};
use fmi_bench::worker::{run_worker, write_report};
use fmi_bench::{emit_report, launch_world, BenchmarkSpec, KillPlan, LaunchOptions, ReportFormat};
use fmi_core::collectives::CollectiveKind;
use fmi_core::CommunicatorConfig;

#[derive(Parser)]
#[command(name = "fmi-bench", version, about = "Benchmarks over a local world of worker processes")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Half round-trip time between two ranks.
    Pingpong(RunArgs),
    /// One producer sending to every other rank.
    OneToMany(RunArgs),
    /// A collective preceded by a barrier on every repetition.
    Collective(RunArgs),
    /// Model-only time and price per channel.
    CostReport(CostArgs),
    /// Runs one rank; configured through FMI_* variables.
    #[command(hide = true)]
    Worker {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Channel {
    Direct,
    S3,
    Dynamodb,
    Redis,
}

impl Channel {
    fn name(self) -> &'static str {
        match self {
            Channel::Direct => "direct",
            Channel::S3 => "s3",
            Channel::Dynamodb => "dynamodb",
            Channel::Redis => "redis",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Text,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_enum)]
    channel: Channel,
    #[arg(long, default_value_t = 2)]
    world_size: usize,
    /// Message size in bytes (ping-pong and one-to-many).
    #[arg(long, default_value_t = 1)]
    size: usize,
    #[arg(long, default_value_t = 30)]
    reps: usize,
    #[arg(long, default_value_t = 1)]
    warmups: usize,
    /// One-to-many receivers; sets the world size to K+1.
    #[arg(long)]
    receivers: Option<usize>,
    #[arg(long, value_parser = parse_collective)]
    collective: Option<CollectiveKind>,
    /// Write the CSV report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Start the coordinator or store in the launcher.
    #[arg(long)]
    auto_services: bool,
    /// Do not inject the store preset's latency (auto-started stores only).
    #[arg(long)]
    no_latency: bool,
    #[arg(long, env = "FMI_COORDINATOR")]
    coordinator: Option<SocketAddr>,
    #[arg(long, env = "FMI_STORE")]
    store: Option<SocketAddr>,
    #[arg(long, default_value = "bench")]
    comm_name: String,
    #[arg(long, default_value_t = 0)]
    epoch: u64,
    #[arg(long, default_value_t = 30_000)]
    join_timeout_ms: u64,
    #[arg(long, default_value_t = 60_000)]
    op_timeout_ms: u64,
    #[arg(long, default_value_t = 600)]
    timeout_s: u64,
    /// Kill this rank after --kill-after-ms to exercise failure handling.
    #[arg(long, requires = "kill_after_ms")]
    kill_rank: Option<usize>,
    #[arg(long)]
    kill_after_ms: Option<u64>,
}

#[derive(Args)]
struct CostArgs {
    #[arg(long)]
    size: u64,
    #[arg(long, default_value_t = 2)]
    participants: u32,
    #[arg(long, default_value_t = 2.0)]
    memory_gib: f64,
    #[arg(long, default_value_t = 1_000_000)]
    reps: u64,
    /// `table2`, `table4-derived`, `all`, or a JSON file of channel profiles.
    #[arg(long, default_value = "table2")]
    preset: String,
    /// Write the CSV here; the aligned table still goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_collective(s: &str) -> Result<CollectiveKind, String> {
    s.parse()
}

fn run(kind: &str, a: RunArgs) -> Result<ExitCode> {
    let channel = a.channel.name();
    let spec = match kind {
        "pingpong" => BenchmarkSpec::pingpong(channel, a.size, a.reps),
        "one-to-many" => {
            let receivers = a.receivers.unwrap_or(a.world_size.saturating_sub(1));
            BenchmarkSpec::one_to_many(channel, receivers, a.size, a.reps)
        }
        _ => {
            let c = a.collective.context("--collective is required")?;
            BenchmarkSpec::collective(channel, c, a.world_size, a.reps)
        }
    };
    let spec = BenchmarkSpec {
        warmups: a.warmups,
        ..spec
    };
    let mut opts = LaunchOptions::new(std::env::current_exe()?);
    opts.auto_services = a.auto_services;
    opts.store_latency = !a.no_latency;
    opts.coordinator = a.coordinator;
    opts.store = a.store;
    opts.comm_name = a.comm_name;
    opts.epoch = a.epoch;
    opts.join_timeout = Duration::from_millis(a.join_timeout_ms);
    opts.op_timeout = Duration::from_millis(a.op_timeout_ms);
    opts.timeout = Duration::from_secs(a.timeout_s);
    opts.kill = a.kill_rank.zip(a.kill_after_ms).map(|(rank, ms)| KillPlan {
        rank,
        after: Duration::from_millis(ms),
    });

    let outcome = launch_world(&spec, &opts)?;
    let format = match a.format {
        Format::Csv => ReportFormat::Csv,
        Format::Text => ReportFormat::Text,
    };
    let results = [outcome.result.clone()];
    match &a.out {
        Some(path) => emit_report(&results, format, &mut File::create(path)?)?,
        None => emit_report(&results, format, &mut io::stdout().lock())?,
    }
    for f in &outcome.failed {
        eprintln!("rank {} failed: {}", f.rank, f.reason);
    }
    Ok(if outcome.succeeded() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn cost(a: CostArgs) -> Result<ExitCode> {
    let profiles = load_preset(&a.preset)?;
    let rows = cost_table(&profiles, a.participants, a.memory_gib, a.size, a.reps)?;
    let mut stdout = io::stdout().lock();
    match &a.out {
        Some(path) => write_csv(&rows, &mut File::create(path)?)?,
        None => {
            write_csv(&rows, &mut stdout)?;
            writeln!(stdout)?;
        }
    }
    write_text(&rows, &mut stdout)?;
    Ok(ExitCode::SUCCESS)
}

fn worker(spec: &str, out: PathBuf) -> Result<ExitCode> {
    let spec: BenchmarkSpec = serde_json::from_str(spec).context("parse --spec")?;
    let cfg = CommunicatorConfig::from_env()?;
    if cfg.world_size != spec.world_size {
        bail!("FMI_WORLD_SIZE={} but the benchmark needs {}", cfg.world_size, spec.world_size);
    }
    let report = run_worker(cfg, &spec);
    write_report(&report, &out)?;
    if let Some(e) = &report.error {
        eprintln!("rank {}: {}", report.rank, e.detail);
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let res = match cli.command {
        Cmd::Pingpong(a) => run("pingpong", a),
        Cmd::OneToMany(a) => run("one-to-many", a),
        Cmd::Collective(a) => run("collective", a),
        Cmd::CostReport(a) => cost(a),
        Cmd::Worker { spec, out } => worker(&spec, out),
    };
    res.unwrap_or_else(|e| {
        eprintln!("fmi-bench: {e:#}");
        ExitCode::FAILURE
    })
}
