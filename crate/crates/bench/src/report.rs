use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::stats::Summary;

/// Samples of one benchmark run after merging all workers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkResult {
    pub benchmark: String,
    pub channel: String,
    pub world_size: usize,
    pub size_bytes: usize,
    /// Seconds per repetition, the maximum across workers.
    pub samples: Vec<f64>,
    pub summary: Option<Summary>,
    /// Store charges for mediated runs, in dollars.
    pub metered_cost: Option<f64>,
}

impl BenchmarkResult {
    pub fn new(benchmark: String, channel: String, world_size: usize, size_bytes: usize, samples: Vec<f64>) -> Self {
        let summary = Summary::of(&samples);
        BenchmarkResult {
            benchmark,
            channel,
            world_size,
            size_bytes,
            samples,
            summary,
            metered_cost: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Text,
}

const COLUMNS: &str = "benchmark,channel,world_size,size_bytes,rep,seconds";
const SUMMARY_COLUMNS: &str = "benchmark,channel,world_size,size_bytes,count,median,mean,p95,max,metered_cost_usd";

fn summary_cells(r: &BenchmarkResult) -> Vec<String> {
    let mut cells = vec![
        r.benchmark.clone(),
        r.channel.clone(),
        r.world_size.to_string(),
        r.size_bytes.to_string(),
    ];
    match &r.summary {
        Some(s) => cells.extend([
            s.count.to_string(),
            format!("{:.9}", s.median),
            format!("{:.9}", s.mean),
            format!("{:.9}", s.p95),
            format!("{:.9}", s.max),
        ]),
        None => cells.extend(["0", "", "", "", ""].map(String::from)),
    }
    cells.push(r.metered_cost.map(|c| format!("{c:.9}")).unwrap_or_default());
    cells
}

/// CSV has one row per repetition followed by `#`-prefixed summary lines;
/// text is an aligned summary table.
pub fn emit_report(results: &[BenchmarkResult], format: ReportFormat, out: &mut impl Write) -> io::Result<()> {
    match format {
        ReportFormat::Csv => {
            writeln!(out, "{COLUMNS}")?;
            for r in results {
                for (i, s) in r.samples.iter().enumerate() {
                    writeln!(
                        out,
                        "{},{},{},{},{},{:.9}",
                        r.benchmark, r.channel, r.world_size, r.size_bytes, i, s
                    )?;
                }
            }
            writeln!(out, "# {SUMMARY_COLUMNS}")?;
            for r in results {
                writeln!(out, "# {}", summary_cells(r).join(","))?;
            }
        }
        ReportFormat::Text => {
            let header: Vec<String> = SUMMARY_COLUMNS.split(',').map(String::from).collect();
            let rows: Vec<Vec<String>> = results.iter().map(summary_cells).collect();
            write_table(out, &header, &rows)?;
        }
    }
    Ok(())
}

/// Left-aligned first column, right-aligned others.
pub fn write_table(out: &mut impl Write, header: &[String], rows: &[Vec<String>]) -> io::Result<()> {
    let mut widths: Vec<usize> = header.iter().map(String::len).collect();
    for row in rows {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cells: &[String]| {
        cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect::<Vec<_>>()
            .join("  ")
    };
    writeln!(out, "{}", line(header))?;
    for row in rows {
        writeln!(out, "{}", line(row))?;
    }
    Ok(())
}
