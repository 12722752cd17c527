//! Batch runner: configuration, persisted result stores and the commands
//! behind the `groundzoom` binary.

pub mod commands;
pub mod config;
pub mod store;

pub use commands::{
    cmd_ablate, cmd_bench, cmd_ground, cmd_report, cmd_sweep, execute, format_summary, prepare_synthetic,
    resolve_config, GroundInput, GroundReport, Overrides, RunError, RunSummary,
};
pub use config::{AblationSection, RunConfig, SweepSection};
pub use store::{
    verify_store, Derived, PlotData, RunManifest, StoreError, StoredRecord, VerifiedStore, SCHEMA_VERSION,
};
