//! Model-only price analysis for one message exchange pattern.

use std::io::{self, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use fmi_core::perfmodel::{exchange_report, CostQuery, CostReport};
use fmi_core::ChannelProfile;

use crate::report::write_table;

/// Resolves `table2`, `table4-derived`, `all`, or a JSON file holding a
/// list of channel profiles.
pub fn load_preset(preset: &str) -> Result<Vec<ChannelProfile>> {
    match preset {
        "table2" => Ok(ChannelProfile::table2()),
        "table4-derived" => Ok(ChannelProfile::table4_derived()),
        "all" => {
            let mut v = ChannelProfile::table2();
            v.insert(1, ChannelProfile::s3_table4_derived());
            Ok(v)
        }
        path => {
            let text = std::fs::read_to_string(Path::new(path)).with_context(|| format!("read preset file {path}"))?;
            let profiles: Vec<ChannelProfile> =
                serde_json::from_str(&text).with_context(|| format!("parse preset file {path}"))?;
            if profiles.is_empty() {
                bail!("preset file {path} lists no channels");
            }
            for p in &profiles {
                p.validate().map_err(anyhow::Error::msg)?;
            }
            Ok(profiles)
        }
    }
}

pub fn cost_table(
    profiles: &[ChannelProfile],
    participants: u32,
    memory_gib: f64,
    size: u64,
    reps: u64,
) -> Result<Vec<CostReport>> {
    profiles
        .iter()
        .map(|p| {
            exchange_report(&CostQuery {
                participants,
                memory_gib,
                size,
                reps,
                channel: p.clone(),
            })
            .map_err(anyhow::Error::from)
        })
        .collect()
}

const HEADER: [&str; 5] = ["channel", "time_ms", "faas_cost_usd", "channel_cost_usd", "total_cost_usd"];

fn cells(r: &CostReport, precision: usize) -> Vec<String> {
    vec![
        r.channel.clone(),
        format!("{:.2}", r.time_per_exchange * 1e3),
        format!("{:.prec$}", r.faas_cost.as_f64(), prec = precision),
        format!("{:.prec$}", r.channel_cost.as_f64(), prec = precision),
        format!("{:.prec$}", r.total_cost.as_f64(), prec = precision),
    ]
}

pub fn write_csv(rows: &[CostReport], out: &mut impl Write) -> io::Result<()> {
    writeln!(out, "{}", HEADER.join(","))?;
    for r in rows {
        writeln!(out, "{}", cells(r, 6).join(","))?;
    }
    Ok(())
}

pub fn write_text(rows: &[CostReport], out: &mut impl Write) -> io::Result<()> {
    let header: Vec<String> = HEADER.iter().map(|s| s.to_string()).collect();
    let body: Vec<Vec<String>> = rows.iter().map(|r| cells(r, 2)).collect();
    write_table(out, &header, &body)
}
