//! Benchmark toolkit: datasets, metrics, sweeps and ablations.

pub mod dataset;
pub mod metrics;
pub mod stats;
pub mod sweep;
pub mod synthetic;

pub use dataset::{load_dataset, write_dataset, DatasetError, GroundingTask, TaskMetadata};
pub use metrics::{
    avg_steps, composite_score, conditional_accuracy, containment_rate, contains_target, refusal_metrics,
    resolution_cluster, top1_accuracy, CoreMetrics, Membership, MetricsReport, ResolutionCluster, TaskOutcome,
};
pub use stats::{paired_sign_test, sign_test, SignTest};
pub use sweep::{
    outcome_of, run_ablation, run_batch, run_sweep, AblationConfig, AblationKind, AblationResult, ArmComparison,
    ArmResult, SweepConfig, SweepResult, SweepRow,
};
pub use synthetic::{generate_tasks, render_screenshot, SyntheticOptions};
