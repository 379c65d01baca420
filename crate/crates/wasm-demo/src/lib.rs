//! Browser bindings for the cost model, channel selection, broadcast
//! schedules and the poll backoff curve. Every export returns JSON text.

use fmi_core::perfmodel::{exchange_report, select_channel, CostQuery, CostReport, SelectionPolicy};
use fmi_core::schedule::binomial_schedule;
use fmi_core::{BackoffPolicy, ChannelProfile};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest world the schedule view will draw.
pub const MAX_SCHEDULE_RANKS: u32 = 256;

#[derive(Debug, Serialize)]
struct CostRow {
    channel: String,
    time_ms: f64,
    faas_usd: f64,
    channel_usd: f64,
    total_usd: f64,
}

impl From<&CostReport> for CostRow {
    fn from(r: &CostReport) -> Self {
        CostRow {
            channel: r.channel.clone(),
            time_ms: r.time_per_exchange * 1e3,
            faas_usd: r.faas_cost.as_f64(),
            channel_usd: r.channel_cost.as_f64(),
            total_usd: r.total_cost.as_f64(),
        }
    }
}

fn presets(name: &str) -> Result<Vec<ChannelProfile>, String> {
    match name {
        "table2" => Ok(ChannelProfile::table2()),
        "table4-derived" => Ok(ChannelProfile::table4_derived()),
        other => Err(format!("unknown preset '{other}'")),
    }
}

fn query(size: f64, participants: u32, memory_gib: f64, reps: f64) -> Result<CostQuery, String> {
    if !(size >= 0.0 && size.fract() == 0.0) {
        return Err(format!("message size must be a whole number of bytes, got {size}"));
    }
    if !(reps >= 1.0 && reps.fract() == 0.0) {
        return Err(format!("repetitions must be a positive whole number, got {reps}"));
    }
    Ok(CostQuery {
        participants,
        memory_gib,
        size: size as u64,
        reps: reps as u64,
        channel: ChannelProfile::direct(),
    })
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

pub fn cost_table_json(size: f64, participants: u32, memory_gib: f64, reps: f64, preset: &str) -> Result<String, String> {
    let q = query(size, participants, memory_gib, reps)?;
    let rows = presets(preset)?
        .into_iter()
        .map(|p| exchange_report(&CostQuery { channel: p, ..q.clone() }).map(|r| CostRow::from(&r)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    to_json(&rows)
}

/// `policy` is `cost`, `time` or `budget`; `budget_ms` only matters for the last.
pub fn select_channel_json(
    size: f64,
    participants: u32,
    memory_gib: f64,
    reps: f64,
    preset: &str,
    policy: &str,
    budget_ms: f64,
) -> Result<String, String> {
    let q = query(size, participants, memory_gib, reps)?;
    let policy = match policy {
        "cost" => SelectionPolicy::MinCost,
        "time" => SelectionPolicy::MinTime,
        "budget" => SelectionPolicy::MinCostUnderTimeBudget(budget_ms / 1e3),
        other => return Err(format!("unknown policy '{other}'")),
    };
    let ranked = select_channel(&presets(preset)?, &q, policy).map_err(|e| e.detail)?;
    to_json(&ranked.iter().map(|(_, r)| CostRow::from(r)).collect::<Vec<_>>())
}

#[derive(Debug, Serialize)]
struct ScheduleView {
    n: usize,
    root: usize,
    rounds: u32,
    messages: usize,
    /// `[round, sender, receiver]` triples.
    steps: Vec<[usize; 3]>,
}

pub fn schedule_json(n: u32, root: u32) -> Result<String, String> {
    if n == 0 || n > MAX_SCHEDULE_RANKS {
        return Err(format!("world size must be 1..={MAX_SCHEDULE_RANKS}, got {n}"));
    }
    let s = binomial_schedule(n as usize, root as usize).map_err(|e| e.detail)?;
    let view = ScheduleView {
        n: n as usize,
        root: root as usize,
        rounds: s.rounds(),
        messages: s.steps.len(),
        steps: s.steps.iter().map(|st| [st.round as usize, st.sender, st.receiver]).collect(),
    };
    to_json(&view)
}

#[derive(Debug, Serialize)]
struct BackoffPoint {
    retry: u32,
    sleep_ms: f64,
    cumulative_ms: f64,
}

/// Sleep before each retry under the default policy, raised to `floor_ms`.
pub fn backoff_json(floor_ms: f64) -> Result<String, String> {
    if !(floor_ms >= 0.0) {
        return Err(format!("poll floor must be >= 0 ms, got {floor_ms}"));
    }
    let policy = BackoffPolicy::default();
    let mut total = 0.0;
    let points = (1..=policy.max_retries)
        .map(|r| {
            let d = policy.delay(r).map_err(|e| e.detail)?;
            let sleep_ms = (d.as_secs_f64() * 1e3).max(floor_ms);
            total += sleep_ms;
            Ok(BackoffPoint {
                retry: r,
                sleep_ms,
                cumulative_ms: total,
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    to_json(&points)
}

fn js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn cost_table(size: f64, participants: u32, memory_gib: f64, reps: f64, preset: &str) -> Result<String, JsValue> {
    js(cost_table_json(size, participants, memory_gib, reps, preset))
}

#[wasm_bindgen]
pub fn rank_channels(
    size: f64,
    participants: u32,
    memory_gib: f64,
    reps: f64,
    preset: &str,
    policy: &str,
    budget_ms: f64,
) -> Result<String, JsValue> {
    js(select_channel_json(size, participants, memory_gib, reps, preset, policy, budget_ms))
}

#[wasm_bindgen]
pub fn bcast_schedule(n: u32, root: u32) -> Result<String, JsValue> {
    js(schedule_json(n, root))
}

#[wasm_bindgen]
pub fn backoff_curve(floor_ms: f64) -> Result<String, JsValue> {
    js(backoff_json(floor_ms))
}
