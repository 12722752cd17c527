//! The five runner commands. The binary is a thin argument parser over
//! these functions.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use super::config::{RunConfig, SweepSection};
use super::store::{
    sha256_file, verify_store, ArmSpec, DatasetInfo, Derived, PlotData, RunManifest, StoreError, StoreWriter,
    StoredRecord, VerifiedStore, SCHEMA_VERSION,
};
use crate::agents::{Decision, Pipeline, PipelineResult};
use crate::gbt::dataset::{load_dataset, write_dataset, DatasetError, GroundingTask, TaskMetadata};
use crate::gbt::metrics::CoreMetrics;
use crate::gbt::sweep::{outcome_of, AblationKind};
use crate::gbt::synthetic::{generate_tasks, SyntheticOptions};
use crate::zoom::ZoomMode;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub dataset: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub mode: Option<ZoomMode>,
    /// Sets `zoom.s_min`.
    pub roi_size: Option<f64>,
    /// Sets `zoom.delta_in`.
    pub pruning: Option<f64>,
    pub scale: Option<u32>,
}

pub fn resolve_config(path: Option<&Path>, ov: &Overrides) -> Result<RunConfig, RunError> {
    let mut cfg = match path {
        Some(p) => RunConfig::load(p).map_err(RunError::Config)?,
        None => RunConfig::default(),
    };
    if let Some(d) = &ov.dataset {
        cfg.dataset = Some(d.clone());
    }
    if let Some(o) = &ov.out {
        cfg.out = Some(o.clone());
    }
    if let Some(s) = ov.seed {
        cfg.seed = s;
    }
    if let Some(w) = ov.workers {
        cfg.workers = w;
    }
    if let Some(m) = ov.mode {
        cfg.pipeline.mode = m;
    }
    if let Some(s) = ov.roi_size {
        cfg.pipeline.zoom.s_min = s;
    }
    if let Some(p) = ov.pruning {
        cfg.pipeline.zoom.delta_in = p;
    }
    if let Some(s) = ov.scale {
        cfg.pipeline.scale_factor = s;
    }
    if cfg.workers == 0 {
        return Err(RunError::Config("workers must be at least 1".into()));
    }
    cfg.pipeline.validate().map_err(RunError::Config)?;
    Ok(cfg)
}

/// Generates `n` synthetic tasks from the run seed, writes them to
/// `<out>/dataset.jsonl` and points the config at that file.
pub fn prepare_synthetic(cfg: &mut RunConfig, n: usize) -> Result<PathBuf, RunError> {
    let out = out_dir(cfg)?;
    std::fs::create_dir_all(&out).map_err(|e| RunError::Input { path: out.clone(), message: e.to_string() })?;
    let path = out.join("dataset.jsonl");
    let tasks = generate_tasks(&SyntheticOptions { n_tasks: n, seed: cfg.seed, ..Default::default() });
    write_dataset(&path, &tasks).map_err(|e| RunError::Input { path: path.clone(), message: e.to_string() })?;
    cfg.dataset = Some(path.clone());
    Ok(path)
}

fn out_dir(cfg: &RunConfig) -> Result<PathBuf, RunError> {
    cfg.out.clone().ok_or_else(|| RunError::Config("no output directory; pass --out or set `out`".into()))
}

fn dataset_path(cfg: &RunConfig) -> Result<PathBuf, RunError> {
    cfg.dataset.clone().ok_or_else(|| RunError::Config("no dataset; pass --dataset or set `dataset`".into()))
}

/// A finished run: its directory and the verified derived data.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub dir: PathBuf,
    pub store: VerifiedStore,
}

impl RunSummary {
    pub fn plot(&self) -> &PlotData {
        &self.store.derived.plot
    }
}

/// Runs every arm for every seed over the dataset and persists the store.
/// The manifest lands on disk before the first task starts.
pub fn execute(cfg: &RunConfig, command: &str, arms: Vec<ArmSpec>, seeds: Vec<u64>) -> Result<RunSummary, RunError> {
    let dataset = dataset_path(cfg)?;
    let out = out_dir(cfg)?;
    let tasks = load_dataset(&dataset)?;
    if tasks.is_empty() {
        return Err(RunError::Input { path: dataset, message: "dataset has no tasks".into() });
    }
    if arms.is_empty() || seeds.is_empty() {
        return Err(RunError::Config("nothing to run: no arms or no seeds".into()));
    }
    let pipelines = arms
        .iter()
        .map(|a| {
            a.config.validate().map_err(|e| RunError::Config(format!("arm {}: {e}", a.name)))?;
            Ok(a.config.clone())
        })
        .collect::<Result<Vec<_>, RunError>>()?;

    let sha = sha256_file(&dataset)?;
    let config = serde_json::to_value(cfg).expect("config serializes");
    // Locations and worker count do not change results, so they stay out of the id.
    let identity = RunConfig { dataset: None, out: None, workers: 1, ..cfg.clone() };
    let identity = serde_json::to_value(&identity).expect("config serializes");
    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        run_id: RunManifest::compute_run_id(command, &identity, &sha, cfg.seed),
        created_utc: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        command: command.to_owned(),
        code_version: env!("CARGO_PKG_VERSION").to_owned(),
        seed: cfg.seed,
        membership: cfg.membership,
        config,
        dataset: DatasetInfo { path: dataset.clone(), sha256: sha, n_tasks: tasks.len() },
        task_ids: tasks.iter().map(|t| t.id.clone()).collect(),
        arms,
        seeds,
    };
    let mut writer = StoreWriter::create(&out, &manifest)?;

    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build().expect("thread pool");
    let chunk = cfg.workers * 8;
    let mut records = Vec::with_capacity(manifest.expected_records());
    for (arm, pc) in manifest.arms.iter().zip(pipelines) {
        for &seed in &manifest.seeds {
            let pipeline = Pipeline::new(pc.clone(), seed).map_err(RunError::Config)?;
            for batch in tasks.chunks(chunk) {
                let results: Vec<PipelineResult> = pool.install(|| batch.par_iter().map(|t| pipeline.run(t)).collect());
                for (task, result) in batch.iter().zip(&results) {
                    if let Some(e) = &result.error {
                        log::warn!(
                            "arm {} seed {seed} task {}: {:?} stage failed: {}",
                            arm.name,
                            task.id,
                            e.stage,
                            e.message
                        );
                    }
                    let rec = StoredRecord::new(&arm.name, seed, outcome_of(task, result), result);
                    writer.append(&rec, result.trace.as_ref())?;
                    records.push(rec);
                }
            }
            log::info!("arm {} seed {seed}: {} tasks done", arm.name, tasks.len());
        }
    }
    let derived = Derived::compute(&manifest, &records);
    writer.finish(&derived)?;
    let store = verify_store(&out)?;
    Ok(RunSummary { dir: out, store })
}

pub fn cmd_bench(cfg: &RunConfig) -> Result<RunSummary, RunError> {
    let arms = vec![ArmSpec { name: "main".into(), x: None, config: cfg.pipeline.clone() }];
    execute(cfg, "bench", arms, vec![cfg.seed])
}

/// One arm per ROI size, used as `s_min` for zoom and as the square side
/// for the one-shot baseline.
pub fn sweep_arms(cfg: &RunConfig) -> Result<Vec<ArmSpec>, RunError> {
    let section = cfg.sweep.clone().unwrap_or_default();
    let check = crate::gbt::sweep::SweepConfig {
        roi_sizes: section.roi_sizes.clone(),
        method: section.method,
        pipeline: cfg.pipeline.clone(),
        seed: cfg.seed,
    };
    check.validate().map_err(RunError::Config)?;
    let SweepSection { roi_sizes, method } = section;
    Ok(roi_sizes
        .into_iter()
        .map(|size| {
            let mut pc = cfg.pipeline.clone();
            pc.search = method;
            pc.zoom.s_min = size;
            ArmSpec { name: format!("roi={size}"), x: Some(size), config: pc }
        })
        .collect())
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<RunSummary, RunError> {
    let arms = sweep_arms(cfg)?;
    execute(cfg, "sweep", arms, vec![cfg.seed])
}

/// Runs an ablation. `kind` overrides the config's `[ablation]` section.
pub fn cmd_ablate(cfg: &RunConfig, kind: Option<AblationKind>) -> Result<RunSummary, RunError> {
    let kind = kind
        .or(cfg.ablation.as_ref().map(|a| a.kind))
        .ok_or_else(|| RunError::Config("no ablation kind; pass --kind or set [ablation] kind".into()))?;
    let arms = kind.arms(&cfg.pipeline).into_iter().map(|(name, config)| ArmSpec { name, x: None, config }).collect();
    execute(cfg, "ablate", arms, cfg.ablation_seeds())
}

pub fn cmd_report(dir: &Path) -> Result<VerifiedStore, StoreError> {
    verify_store(dir)
}

fn fmt_opt(v: Option<f64>, pct: bool) -> String {
    match v {
        Some(x) if pct => format!("{:.2}%", 100.0 * x),
        Some(x) => format!("{x:.2}"),
        None => "-".into(),
    }
}

fn metric_row(name: &str, m: &CoreMetrics) -> String {
    format!(
        "{:<24} {:>6} {:>6} {:>10} {:>10} {:>10} {:>10} {:>7} {:>9} {:>7}\n",
        name,
        m.n_tasks,
        m.n_errors,
        fmt_opt(m.containment_rate, true),
        fmt_opt(m.conditional_accuracy, true),
        fmt_opt(m.composite_score, true),
        fmt_opt(m.top1_accuracy, true),
        fmt_opt(m.avg_steps, false),
        fmt_opt(m.refusal_accuracy, true),
        fmt_opt(m.false_positive_rate, true),
    )
}

/// Plain-text tables: one row per arm, then per-group and per-resolution
/// breakdowns when there is a single arm, then paired comparisons.
pub fn format_summary(store: &VerifiedStore) -> String {
    let mut s = String::new();
    let header = format!(
        "{:<24} {:>6} {:>6} {:>10} {:>10} {:>10} {:>10} {:>7} {:>9} {:>7}\n",
        "arm", "tasks", "errors", "contain", "cond_acc", "composite", "top1", "steps", "refusal", "fpr"
    );
    let _ = writeln!(s, "run {} ({}), {} records", store.manifest.run_id, store.manifest.command, store.records.len());
    s.push_str(&header);
    for arm in &store.derived.plot.arms {
        s.push_str(&metric_row(&arm.name, &arm.metrics));
    }
    if let [(_, report)] = store.derived.reports.as_slice() {
        if !report.by_group.is_empty() {
            s.push_str("\nby group\n");
            s.push_str(&header.replacen("arm   ", "group ", 1));
            for (g, m) in &report.by_group {
                s.push_str(&metric_row(g, m));
            }
        }
        s.push_str("\nby resolution\n");
        s.push_str(&header.replacen("arm       ", "resolution", 1));
        for (c, m) in &report.by_resolution {
            s.push_str(&metric_row(c.label(), m));
        }
    }
    if !store.derived.plot.comparisons.is_empty() {
        s.push_str("\npaired comparisons (containment)\n");
        for c in &store.derived.plot.comparisons {
            let t = &c.containment_sign_test;
            let _ = writeln!(
                s,
                "{} vs {}: delta {} pp, only-{} {}, only-{} {}, sign test p = {:.3e}",
                c.arm,
                c.reference,
                c.delta_containment.map_or("-".into(), |d| format!("{:+.2}", 100.0 * d)),
                c.reference,
                t.a_only,
                c.arm,
                t.b_only,
                t.p_value
            );
        }
    }
    s
}

/// What `ground` should run on.
#[derive(Debug, Clone)]
pub enum GroundInput {
    /// A task from a dataset file, by id.
    DatasetTask { dataset: PathBuf, task_id: String },
    /// A screenshot and instruction given directly.
    Image { image: PathBuf, instruction: String },
}

#[derive(Debug, Clone)]
pub struct GroundReport {
    pub task: GroundingTask,
    pub result: PipelineResult,
    pub trace_path: Option<PathBuf>,
}

impl GroundReport {
    /// Human-readable lines for stdout.
    pub fn render(&self) -> String {
        let r = &self.result;
        let mut s = String::new();
        let _ = writeln!(s, "task: {}", self.task.id);
        if r.decision == Decision::Refuse {
            let _ = writeln!(s, "refused: {}", r.rationale.as_deref().unwrap_or("(no rationale)"));
        } else if let Some(p) = r.final_point {
            let _ = writeln!(s, "point: ({:.1}, {:.1})", p.x, p.y);
            if let Some(roi) = r.final_roi {
                let _ = writeln!(s, "roi: [{:.1}, {:.1}, {:.1}, {:.1}]", roi.x_min, roi.y_min, roi.x_max, roi.y_max);
            }
            match &r.trace {
                Some(t) => {
                    let _ = writeln!(s, "termination: {:?} after {} steps", t.termination, t.steps.len());
                }
                None => {
                    let _ = writeln!(s, "termination: one-shot");
                }
            }
            if let Some(c) = r.correct {
                let _ = writeln!(s, "correct: {c}");
            }
        }
        if let Some(p) = &self.trace_path {
            let _ = writeln!(s, "trace: {}", p.display());
        }
        s
    }

    /// Machine-readable error for stderr when a stage failed.
    pub fn error_json(&self) -> Option<String> {
        self.result
            .error
            .as_ref()
            .map(|e| serde_json::json!({"task_id": self.task.id, "stage": e.stage, "error": e.message}).to_string())
    }
}

pub fn resolve_ground_task(input: &GroundInput) -> Result<GroundingTask, RunError> {
    match input {
        GroundInput::DatasetTask { dataset, task_id } => load_dataset(dataset)?
            .into_iter()
            .find(|t| &t.id == task_id)
            .ok_or_else(|| RunError::Input { path: dataset.clone(), message: format!("no task with id {task_id}") }),
        GroundInput::Image { image, instruction } => {
            let (w, h) = image::image_dimensions(image)
                .map_err(|e| RunError::Input { path: image.clone(), message: e.to_string() })?;
            let id = image.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "image".into());
            Ok(GroundingTask {
                id,
                image_path: Some(image.clone()),
                instruction: instruction.clone(),
                target: None,
                feasible: true,
                metadata: TaskMetadata { application: String::new(), resolution: (w, h), group: String::new() },
            })
        }
    }
}

/// Runs the pipeline once. The zoom trace goes to `<out>/trace-<task>.json`
/// when an output directory is configured.
pub fn cmd_ground(cfg: &RunConfig, input: &GroundInput) -> Result<GroundReport, RunError> {
    let task = resolve_ground_task(input)?;
    let pipeline = Pipeline::new(cfg.pipeline.clone(), cfg.seed).map_err(RunError::Config)?;
    let result = pipeline.run(&task);
    let trace_path = match (&cfg.out, &result.trace) {
        (Some(out), Some(trace)) => {
            std::fs::create_dir_all(out).map_err(|e| RunError::Input { path: out.clone(), message: e.to_string() })?;
            let path = out.join(format!("trace-{}.json", task.id));
            let text = serde_json::to_string_pretty(trace).expect("trace serializes") + "\n";
            std::fs::write(&path, text).map_err(|e| RunError::Input { path: path.clone(), message: e.to_string() })?;
            Some(path)
        }
        _ => None,
    };
    Ok(GroundReport { task, result, trace_path })
}
