//! Experiment harness: full-fingerprint sweeps, RMSE-vs-P curves,
//! threshold sweeps, confusion matrices, and capture ingestion.
//!
//! Experiments are driven by an [`ExperimentConfig`] and are reproducible
//! bit-for-bit: every random choice (instances, probe subsets, per-session
//! ambient drift, measurement noise) derives from the config's base seed,
//! and CSV emission uses deterministic shortest round-trip float formatting.

mod config;
mod confusion;
mod experiments;
mod ingest;

pub use config::ExperimentConfig;
pub use confusion::ConfusionCounts;
pub use experiments::{
    build_bench, compute_confusion, compute_p_sweep, compute_theta_sweep, confusion_table,
    run_confusion, run_p_sweep, run_sweep, run_theta_sweep, Bench, BenchDevice, ModelConfusion,
    PSweepRow, ThetaRow,
};
pub use ingest::{export_sweep_captures, ingest_captures};
