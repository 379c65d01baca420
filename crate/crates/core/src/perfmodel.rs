//! Alpha-beta transfer time, function cost and channel cost.
//!
//! Every function takes its parameters explicitly; the presets in
//! [`crate::profile`] are data fed into them.

use serde::{Deserialize, Serialize};

use crate::error::{FmiError, Result};
use crate::profile::{ddb_units, ChannelKind, ChannelProfile, Dollars};

/// `alpha + s / beta_inv`, in seconds.
pub fn transfer_time(profile: &ChannelProfile, size: u64) -> f64 {
    profile.alpha + size as f64 / profile.beta_inv
}

/// Runtime cost of `participants` functions of `memory_gib` each busy for `seconds`.
pub fn function_cost(participants: u32, seconds: f64, memory_gib: f64, p_faas: Dollars) -> Dollars {
    p_faas.scale(participants as f64 * seconds * memory_gib)
}

/// Cost of moving `reps` messages of `size` bytes through the channel.
///
/// Request-billed stores ignore `total_time`; instance-billed channels
/// (cache, hole-punching server) ignore the request count.
pub fn channel_cost(profile: &ChannelProfile, size: u64, reps: u64, total_time: f64) -> Dollars {
    let p = &profile.price;
    match profile.kind {
        ChannelKind::S3 => (p.p_s3_u + p.p_s3_d) * reps,
        ChannelKind::DynamoDb => (p.p_ddb_u + p.p_ddb_d) * ddb_units(size) * reps,
        ChannelKind::Redis => p.p_redis.scale(total_time),
        ChannelKind::Direct => p.p_hps.scale(total_time),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostQuery {
    pub participants: u32,
    pub memory_gib: f64,
    pub size: u64,
    pub reps: u64,
    pub channel: ChannelProfile,
}

impl CostQuery {
    pub fn validate(&self) -> Result<()> {
        if self.participants < 1 {
            return Err(FmiError::protocol("participants must be >= 1"));
        }
        if !(self.memory_gib > 0.0) {
            return Err(FmiError::protocol("memory must be > 0 GiB"));
        }
        self.channel.validate().map_err(FmiError::protocol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    /// Preset that produced the numbers.
    pub channel: String,
    pub kind: ChannelKind,
    pub time_per_exchange: f64,
    pub faas_cost: Dollars,
    pub channel_cost: Dollars,
    pub total_cost: Dollars,
}

pub fn exchange_report(query: &CostQuery) -> Result<CostReport> {
    query.validate()?;
    let t = transfer_time(&query.channel, query.size);
    let total_time = t * query.reps as f64;
    let faas_cost = function_cost(
        query.participants,
        total_time,
        query.memory_gib,
        query.channel.price.p_faas,
    );
    let channel_cost = channel_cost(&query.channel, query.size, query.reps, total_time);
    Ok(CostReport {
        channel: query.channel.name.clone(),
        kind: query.channel.kind,
        time_per_exchange: t,
        faas_cost,
        channel_cost,
        total_cost: faas_cost + channel_cost,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SelectionPolicy {
    MinCost,
    MinTime,
    /// Cheapest channel whose per-exchange time is within the budget (seconds).
    MinCostUnderTimeBudget(f64),
}

/// Ranks `profiles` for the workload in `query` (its `channel` is replaced
/// by each candidate in turn). Ties go to the lower time, then the
/// lexicographically smaller preset name.
pub fn select_channel(
    profiles: &[ChannelProfile],
    query: &CostQuery,
    policy: SelectionPolicy,
) -> Result<Vec<(ChannelProfile, CostReport)>> {
    if profiles.is_empty() {
        return Err(FmiError::protocol("no channel profiles to select from"));
    }
    let mut ranked = profiles
        .iter()
        .map(|p| {
            let q = CostQuery {
                channel: p.clone(),
                ..query.clone()
            };
            exchange_report(&q).map(|r| (p.clone(), r))
        })
        .collect::<Result<Vec<_>>>()?;

    if let SelectionPolicy::MinCostUnderTimeBudget(budget) = policy {
        let tightest = ranked
            .iter()
            .map(|(_, r)| r.time_per_exchange)
            .fold(f64::INFINITY, f64::min);
        ranked.retain(|(_, r)| r.time_per_exchange <= budget);
        if ranked.is_empty() {
            return Err(FmiError::protocol(format!(
                "no channel meets the {:.3} ms budget; tightest achievable is {:.3} ms",
                budget * 1e3,
                tightest * 1e3
            )));
        }
    }

    ranked.sort_by(|(pa, a), (pb, b)| {
        let primary = match policy {
            SelectionPolicy::MinTime => a.time_per_exchange.total_cmp(&b.time_per_exchange),
            _ => a.total_cost.cmp(&b.total_cost),
        };
        primary
            .then(a.time_per_exchange.total_cmp(&b.time_per_exchange))
            .then_with(|| pa.name.cmp(&pb.name))
    });
    Ok(ranked)
}
