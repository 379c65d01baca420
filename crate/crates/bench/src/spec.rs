use fmi_core::collectives::CollectiveKind;
use fmi_core::{ChannelKind, ChannelProfile};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchKind {
    Pingpong,
    OneToMany,
    Collective(CollectiveKind),
}

impl BenchKind {
    /// Value of the `benchmark` report column.
    pub fn label(&self) -> String {
        match self {
            BenchKind::Pingpong => "pingpong".into(),
            BenchKind::OneToMany => "one-to-many".into(),
            BenchKind::Collective(k) => k.as_str().into(),
        }
    }
}

/// Integers each rank contributes to gather, or the root hands out in scatter.
pub const GATHER_SCATTER_TOTAL: usize = 5000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchmarkSpec {
    pub kind: BenchKind,
    pub world_size: usize,
    /// Message size in bytes. Collectives derive it from their fixed parameters.
    pub size: usize,
    pub reps: usize,
    pub warmups: usize,
    /// `direct` or a store preset name (`s3`, `dynamodb`, `redis`, ...).
    pub channel: String,
}

impl BenchmarkSpec {
    pub fn pingpong(channel: &str, size: usize, reps: usize) -> Self {
        BenchmarkSpec {
            kind: BenchKind::Pingpong,
            world_size: 2,
            size,
            reps,
            warmups: 1,
            channel: channel.into(),
        }
    }

    pub fn one_to_many(channel: &str, receivers: usize, size: usize, reps: usize) -> Self {
        BenchmarkSpec {
            kind: BenchKind::OneToMany,
            world_size: receivers + 1,
            size,
            reps,
            warmups: 1,
            channel: channel.into(),
        }
    }

    pub fn collective(channel: &str, kind: CollectiveKind, world_size: usize, reps: usize) -> Self {
        BenchmarkSpec {
            kind: BenchKind::Collective(kind),
            world_size,
            size: collective_bytes(kind, world_size),
            reps,
            warmups: 1,
            channel: channel.into(),
        }
    }

    pub fn channel_kind(&self) -> anyhow::Result<ChannelKind> {
        if self.channel == "direct" {
            return Ok(ChannelKind::Direct);
        }
        ChannelProfile::by_name(&self.channel)
            .map(|p| p.kind)
            .ok_or_else(|| anyhow::anyhow!("unknown channel '{}'", self.channel))
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        anyhow::ensure!(self.reps >= 1, "repetitions must be at least 1");
        anyhow::ensure!(self.world_size >= 1, "world size must be at least 1");
        self.channel_kind()?;
        match self.kind {
            BenchKind::Pingpong => {
                anyhow::ensure!(self.size >= 1, "message size must be at least 1 byte");
                anyhow::ensure!(self.world_size == 2, "ping-pong needs exactly 2 ranks");
            }
            BenchKind::OneToMany => {
                anyhow::ensure!(self.size >= 1, "message size must be at least 1 byte");
                anyhow::ensure!(self.world_size >= 2, "one-to-many needs at least 1 receiver");
            }
            BenchKind::Collective(_) => {}
        }
        Ok(())
    }
}

/// Integers per rank: one for the reductions and bcast, an even share of
/// 5,000 for gather and scatter, none for the barrier.
pub fn collective_ints(kind: CollectiveKind, world_size: usize) -> usize {
    match kind {
        CollectiveKind::Barrier => 0,
        CollectiveKind::Gather | CollectiveKind::Scatter => GATHER_SCATTER_TOTAL / world_size.max(1),
        _ => 1,
    }
}

/// Bytes moved per operation as reported in the `size_bytes` column: the
/// root's total for gather and scatter, one rank's share otherwise.
pub fn collective_bytes(kind: CollectiveKind, world_size: usize) -> usize {
    let per = collective_ints(kind, world_size) * 4;
    match kind {
        CollectiveKind::Gather | CollectiveKind::Scatter => per * world_size,
        _ => per,
    }
}
