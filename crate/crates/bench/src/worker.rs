//! The per-rank side of a launched benchmark.

use std::path::Path;

use anyhow::Result;
use fmi_core::{CommState, Communicator, CommunicatorConfig, ErrorKind, FmiError};
use serde::{Deserialize, Serialize};

use crate::ops;
use crate::spec::{BenchKind, BenchmarkSpec};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkerError {
    /// Set when the failure came from the communicator.
    pub kind: Option<ErrorKind>,
    pub detail: String,
}

impl From<&anyhow::Error> for WorkerError {
    fn from(e: &anyhow::Error) -> Self {
        WorkerError {
            kind: e.downcast_ref::<FmiError>().map(|f| f.kind),
            detail: format!("{e:#}"),
        }
    }
}

/// What one rank writes for the launcher.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkerReport {
    pub rank: usize,
    pub samples: Vec<f64>,
    pub joined: bool,
    /// Communicator state at exit; `None` if the join failed.
    pub aborted: Option<bool>,
    pub error: Option<WorkerError>,
}

pub fn run_spec(comm: &mut Communicator, spec: &BenchmarkSpec) -> Result<Vec<f64>> {
    match spec.kind {
        BenchKind::Pingpong => ops::pingpong(comm, spec.size, spec.reps, spec.warmups),
        BenchKind::OneToMany => ops::one_to_many(comm, spec.size, spec.reps, spec.warmups),
        BenchKind::Collective(kind) => ops::collective_bench(comm, kind, spec.reps, spec.warmups),
    }
}

/// Joins the communicator described by `cfg`, runs the benchmark and
/// returns this rank's report.
pub fn run_worker(cfg: CommunicatorConfig, spec: &BenchmarkSpec) -> WorkerReport {
    let rank = cfg.rank;
    let mut comm = match Communicator::join(cfg) {
        Ok(c) => c,
        Err(e) => {
            return WorkerReport {
                rank,
                samples: vec![],
                joined: false,
                aborted: None,
                error: Some(WorkerError {
                    kind: Some(e.kind),
                    detail: e.to_string(),
                }),
            }
        }
    };
    let outcome = run_spec(&mut comm, spec);
    let (samples, error) = match outcome {
        Ok(s) => (s, None),
        Err(e) => (vec![], Some(WorkerError::from(&e))),
    };
    WorkerReport {
        rank,
        samples,
        joined: true,
        aborted: Some(comm.state() == CommState::Aborted),
        error,
    }
}

pub fn write_report(report: &WorkerReport, path: &Path) -> Result<()> {
    let tmp = path.with_extension("partial");
    std::fs::write(&tmp, serde_json::to_vec(report)?)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
