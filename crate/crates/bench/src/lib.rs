//! Benchmarks and a local launcher for `fmi-core`.
//!
//! The launcher stands in for a function invoker: it starts the
//! coordinator and store services, spawns one worker process per rank with
//! its rank wired through the environment, and merges the per-rank sample
//! files into one [`BenchmarkResult`].

pub mod cost_report;
pub mod launcher;
pub mod ops;
pub mod report;
pub mod services;
pub mod spec;
pub mod stats;
pub mod worker;

pub use launcher::{launch_world, FailedRank, KillPlan, LaunchOptions, LaunchOutcome};
pub use report::{emit_report, BenchmarkResult, ReportFormat};
pub use services::Services;
pub use spec::{BenchKind, BenchmarkSpec};
pub use stats::Summary;
pub use worker::{WorkerError, WorkerReport};
