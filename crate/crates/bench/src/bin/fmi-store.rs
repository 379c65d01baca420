use anyhow::{Context, Result};
use clap::{Parser, ValueEnum};
use fmi_core::mediated::StoreServer;
use fmi_core::ChannelProfile;

#[derive(Clone, Copy, ValueEnum)]
enum Profile {
    S3,
    Dynamodb,
    Redis,
}

/// Key-value store with the latency, size limit and metering of a channel preset.
#[derive(Parser)]
#[command(name = "fmi-store", version)]
struct Args {
    #[arg(long, default_value = "0.0.0.0:10001")]
    bind: String,
    #[arg(long, value_enum)]
    profile: Profile,
    /// Vary injected latency by up to 10% either way.
    #[arg(long)]
    jitter: bool,
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    let profile = match args.profile {
        Profile::S3 => ChannelProfile::s3_table2(),
        Profile::Dynamodb => ChannelProfile::dynamodb(),
        Profile::Redis => ChannelProfile::redis(),
    };
    let name = profile.name.clone();
    let server = StoreServer::bind(&args.bind, profile, args.jitter).with_context(|| format!("bind {}", args.bind))?;
    log::info!("store ({name}) listening on {}", server.local_addr()?);
    server.run()?;
    Ok(())
}
