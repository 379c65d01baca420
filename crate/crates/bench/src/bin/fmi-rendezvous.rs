use std::time::Duration;

use anyhow::{Context, Result};
use clap::Parser;
use fmi_core::rendezvous::RendezvousServer;

/// Pairs workers by name and tells each the other's public endpoint.
#[derive(Parser)]
#[command(name = "fmi-rendezvous", version)]
struct Args {
    #[arg(long, default_value = "0.0.0.0:10000")]
    bind: String,
    /// How long a ticket waits for its counterpart.
    #[arg(long, default_value_t = 30_000)]
    hold_timeout_ms: u64,
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    let server = RendezvousServer::bind(&args.bind, Duration::from_millis(args.hold_timeout_ms))
        .with_context(|| format!("bind {}", args.bind))?;
    log::info!("coordinator listening on {}", server.local_addr()?);
    server.run()?;
    Ok(())
}
