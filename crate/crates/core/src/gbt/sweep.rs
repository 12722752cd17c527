//! Batch execution, ROI-size sweeps and paired ablations.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::GroundingTask;
use super::metrics::{contains_target, CoreMetrics, Membership, TaskOutcome};
use super::stats::{paired_sign_test, SignTest};
use crate::agents::{Decision, Pipeline, PipelineConfig, PipelineResult, SearchMethod};
use crate::zoom::ZoomMode;

/// Runs every task on a pool of `workers` threads. Results come back in
/// task order regardless of scheduling.
pub fn run_batch(pipeline: &Pipeline, tasks: &[GroundingTask], workers: usize) -> Vec<PipelineResult> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build().expect("thread pool");
    pool.install(|| tasks.par_iter().map(|t| pipeline.run(t)).collect())
}

pub fn outcome_of(task: &GroundingTask, result: &PipelineResult) -> TaskOutcome {
    TaskOutcome {
        task_id: task.id.clone(),
        feasible: task.feasible,
        target: task.target.clone(),
        resolution: task.metadata.resolution,
        group: task.metadata.group.clone(),
        refused: result.decision == Decision::Refuse,
        errored: result.error.is_some(),
        final_roi: result.final_roi,
        final_point: result.final_point,
        steps: result.final_roi.map(|_| result.search_calls),
        correct: result.correct,
    }
}

fn evaluate(
    config: &PipelineConfig,
    tasks: &[GroundingTask],
    seed: u64,
    workers: usize,
) -> Result<Vec<TaskOutcome>, String> {
    let pipeline = Pipeline::new(config.clone(), seed)?;
    let results = run_batch(&pipeline, tasks, workers);
    Ok(tasks.iter().zip(&results).map(|(t, r)| outcome_of(t, r)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    #[serde(default = "default_sizes")]
    pub roi_sizes: Vec<f64>,
    #[serde(default)]
    pub method: SearchMethod,
    pub pipeline: PipelineConfig,
    #[serde(default)]
    pub seed: u64,
}

/// 400 to 1800 px in 200 px steps.
pub fn default_sizes() -> Vec<f64> {
    (0..8).map(|i| 400.0 + 200.0 * i as f64).collect()
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.roi_sizes.is_empty() {
            return Err("roi_sizes is empty".into());
        }
        if self.roi_sizes.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err("roi_sizes must be positive".into());
        }
        if self.roi_sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err("roi_sizes must be strictly ascending".into());
        }
        self.pipeline.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub roi_size: f64,
    pub metrics: CoreMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub method: SearchMethod,
    pub mode: ZoomMode,
    pub rows: Vec<SweepRow>,
    /// Per-size task outcomes, aligned with `rows`.
    #[serde(skip)]
    pub outcomes: Vec<Vec<TaskOutcome>>,
}

/// Runs the whole pipeline once per ROI size (as `s_min` for zoom, as the
/// square side for the one-shot baseline).
pub fn run_sweep(tasks: &[GroundingTask], config: &SweepConfig, workers: usize) -> Result<SweepResult, String> {
    config.validate()?;
    let mut rows = Vec::new();
    let mut outcomes = Vec::new();
    for &size in &config.roi_sizes {
        let mut pc = config.pipeline.clone();
        pc.search = config.method;
        pc.zoom.s_min = size;
        let out = evaluate(&pc, tasks, config.seed, workers)?;
        rows.push(SweepRow { roi_size: size, metrics: CoreMetrics::compute(&out, Membership::Center) });
        outcomes.push(out);
    }
    Ok(SweepResult { method: config.method, mode: config.pipeline.mode, rows, outcomes })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AblationKind {
    BidirectionalVsUnidirectional,
    AsymmetricVsSymmetric,
    PruningRates,
    ScalingFactors,
}

impl AblationKind {
    /// `(arm name, config)` pairs; the first arm is the reference.
    pub fn arms(self, base: &PipelineConfig) -> Vec<(String, PipelineConfig)> {
        let with = |f: &dyn Fn(&mut PipelineConfig)| {
            let mut c = base.clone();
            f(&mut c);
            c
        };
        match self {
            AblationKind::BidirectionalVsUnidirectional => vec![
                ("bidirectional".into(), with(&|c| c.mode = ZoomMode::Bidirectional)),
                ("unidirectional".into(), with(&|c| c.mode = ZoomMode::Unidirectional)),
            ],
            AblationKind::AsymmetricVsSymmetric => vec![
                ("asymmetric".into(), with(&|c| c.mode = ZoomMode::Bidirectional)),
                ("symmetric".into(), with(&|c| c.mode = ZoomMode::SymmetricBaseline)),
            ],
            AblationKind::PruningRates => [0.10, 0.20, 0.30]
                .into_iter()
                .map(|d| (format!("delta_in={d:.2}"), with(&|c| c.zoom.delta_in = d)))
                .collect(),
            AblationKind::ScalingFactors => {
                (1..=4).map(|s| (format!("scale={s}"), with(&|c| c.scale_factor = s))).collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationConfig {
    pub kind: AblationKind,
    pub pipeline: PipelineConfig,
    /// Each seed reruns every arm; outcomes are pooled and paired by
    /// (seed, task).
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
}

fn default_seeds() -> Vec<u64> {
    vec![0, 1, 2]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmResult {
    pub name: String,
    pub metrics: CoreMetrics,
    #[serde(skip)]
    pub outcomes: Vec<TaskOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmComparison {
    pub reference: String,
    pub arm: String,
    /// Arm minus reference.
    pub delta_containment: Option<f64>,
    pub delta_top1: Option<f64>,
    pub delta_avg_steps: Option<f64>,
    pub delta_pass_rate: Option<f64>,
    /// Reference as A, arm as B, on per-task containment.
    pub containment_sign_test: SignTest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationResult {
    pub kind: AblationKind,
    pub arms: Vec<ArmResult>,
    pub comparisons: Vec<ArmComparison>,
}

pub fn contained_flags(outcomes: &[TaskOutcome]) -> Vec<bool> {
    outcomes.iter().map(|o| contains_target(o, Membership::Center) == Some(true) && !o.errored).collect()
}

pub fn run_ablation(
    tasks: &[GroundingTask],
    config: &AblationConfig,
    workers: usize,
) -> Result<AblationResult, String> {
    config.pipeline.validate()?;
    if config.seeds.is_empty() {
        return Err("ablation needs at least one seed".into());
    }
    let mut arms = Vec::new();
    for (name, pc) in config.kind.arms(&config.pipeline) {
        let mut pooled = Vec::with_capacity(tasks.len() * config.seeds.len());
        for &seed in &config.seeds {
            pooled.extend(evaluate(&pc, tasks, seed, workers)?);
        }
        arms.push(ArmResult { name, metrics: CoreMetrics::compute(&pooled, Membership::Center), outcomes: pooled });
    }
    let reference = &arms[0];
    let diff = |a: Option<f64>, b: Option<f64>| Some(b? - a?);
    let comparisons = arms[1..]
        .iter()
        .map(|arm| ArmComparison {
            reference: reference.name.clone(),
            arm: arm.name.clone(),
            delta_containment: diff(reference.metrics.containment_rate, arm.metrics.containment_rate),
            delta_top1: diff(reference.metrics.top1_accuracy, arm.metrics.top1_accuracy),
            delta_avg_steps: diff(reference.metrics.avg_steps, arm.metrics.avg_steps),
            delta_pass_rate: diff(reference.metrics.pass_rate, arm.metrics.pass_rate),
            containment_sign_test: paired_sign_test(
                &contained_flags(&reference.outcomes),
                &contained_flags(&arm.outcomes),
            ),
        })
        .collect();
    Ok(AblationResult { kind: config.kind, arms, comparisons })
}
