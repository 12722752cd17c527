//! On-disk result store.
//!
//! ```text
//! <out>/manifest.json   written before any task runs
//! <out>/results.jsonl   one StoredRecord per (arm, seed, task)
//! <out>/traces.jsonl    one TraceRecord per zoom search
//! <out>/metrics.csv     arm,scope,metric,value
//! <out>/plot.json       per-arm metrics, comparisons and sweep series
//! ```
//!
//! `metrics.csv` and `plot.json` are pure functions of `manifest.json` and
//! `results.jsonl`, which is what `report` checks.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::agents::{Decision, PipelineResult, StageError, StageTimings};
use crate::gbt::metrics::{CoreMetrics, Membership, MetricsReport, TaskOutcome};
use crate::gbt::stats::{paired_sign_test, SignTest};
use crate::gbt::sweep::contained_flags;
use crate::geometry::Point;
use crate::zoom::{Termination, ZoomTrace};

pub const SCHEMA_VERSION: u32 = 2;

pub const MANIFEST: &str = "manifest.json";
pub const RESULTS: &str = "results.jsonl";
pub const TRACES: &str = "traces.jsonl";
pub const METRICS: &str = "metrics.csv";
pub const PLOT: &str = "plot.json";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("store schema version {found} is not supported (this build reads version {expected}); rerun the command to regenerate it")]
    Schema { found: u32, expected: u32 },
    #[error("integrity error: {} missing record(s): {}", missing.len(), preview(missing))]
    Missing { missing: Vec<String> },
    #[error("integrity error: {0}")]
    Integrity(String),
}

fn preview(items: &[String]) -> String {
    const SHOWN: usize = 10;
    let mut s = items.iter().take(SHOWN).cloned().collect::<Vec<_>>().join(", ");
    if items.len() > SHOWN {
        s.push_str(&format!(", ... ({} more)", items.len() - SHOWN));
    }
    s
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io { path: path.to_owned(), source }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmSpec {
    pub name: String,
    /// Position on the x axis of plots (ROI size for sweeps).
    #[serde(default)]
    pub x: Option<f64>,
    pub config: crate::agents::PipelineConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub path: PathBuf,
    pub sha256: String,
    pub n_tasks: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub run_id: String,
    pub created_utc: String,
    pub command: String,
    pub code_version: String,
    pub seed: u64,
    pub membership: Membership,
    /// The fully resolved run configuration.
    pub config: serde_json::Value,
    pub dataset: DatasetInfo,
    pub task_ids: Vec<String>,
    pub arms: Vec<ArmSpec>,
    pub seeds: Vec<u64>,
}

impl RunManifest {
    /// The run id hashes everything that determines the results, so equal
    /// inputs give equal ids.
    pub fn compute_run_id(command: &str, config: &serde_json::Value, dataset_sha: &str, seed: u64) -> String {
        let mut h = Sha256::new();
        h.update(command.as_bytes());
        h.update([0]);
        h.update(config.to_string().as_bytes());
        h.update([0]);
        h.update(dataset_sha.as_bytes());
        h.update(seed.to_le_bytes());
        hex::encode(&h.finalize()[..8])
    }

    pub fn expected_records(&self) -> usize {
        self.arms.len() * self.seeds.len() * self.task_ids.len()
    }
}

pub fn sha256_file(path: &Path) -> Result<String, StoreError> {
    let bytes = std::fs::read(path).map_err(io_err(path))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// One task run as persisted in `results.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredRecord {
    pub arm: String,
    pub seed: u64,
    #[serde(flatten)]
    pub outcome: TaskOutcome,
    pub decision: Decision,
    #[serde(default)]
    pub rationale: Option<String>,
    #[serde(default)]
    pub instruction: Option<String>,
    #[serde(default)]
    pub rewrite_fell_back: bool,
    #[serde(default)]
    pub stage2_local: Option<Point>,
    #[serde(default)]
    pub termination: Option<Termination>,
    #[serde(default)]
    pub error: Option<StageError>,
    pub timings: StageTimings,
}

impl StoredRecord {
    pub fn new(arm: &str, seed: u64, outcome: TaskOutcome, result: &PipelineResult) -> Self {
        Self {
            arm: arm.to_owned(),
            seed,
            outcome,
            decision: result.decision,
            rationale: result.rationale.clone(),
            instruction: result.instruction.clone(),
            rewrite_fell_back: result.rewrite_fell_back,
            stage2_local: result.stage2_local,
            termination: result.trace.as_ref().map(|t| t.termination),
            error: result.error.clone(),
            timings: result.timings.clone(),
        }
    }

    fn key(&self) -> (String, u64, String) {
        (self.arm.clone(), self.seed, self.outcome.task_id.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub arm: String,
    pub seed: u64,
    pub trace: ZoomTrace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmSummary {
    pub name: String,
    pub x: Option<f64>,
    pub metrics: CoreMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub reference: String,
    pub arm: String,
    pub delta_containment: Option<f64>,
    pub delta_top1: Option<f64>,
    pub delta_avg_steps: Option<f64>,
    pub delta_pass_rate: Option<f64>,
    /// Reference as A, arm as B, paired by (seed, task) on containment.
    pub containment_sign_test: SignTest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub x: Vec<f64>,
    pub containment_rate: Vec<Option<f64>>,
    pub top1_accuracy: Vec<Option<f64>>,
    pub avg_steps: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotData {
    pub schema_version: u32,
    pub run_id: String,
    pub command: String,
    pub arms: Vec<ArmSummary>,
    pub comparisons: Vec<Comparison>,
    /// Present when every arm has an x value.
    #[serde(default)]
    pub series: Option<Series>,
}

/// Everything derived from the records of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Derived {
    pub reports: Vec<(String, MetricsReport)>,
    pub plot: PlotData,
}

impl Derived {
    pub fn compute(manifest: &RunManifest, records: &[StoredRecord]) -> Self {
        let mut by_arm: HashMap<&str, Vec<&StoredRecord>> = HashMap::new();
        for r in records {
            by_arm.entry(r.arm.as_str()).or_default().push(r);
        }
        // Outcomes in manifest order (seed, then task) regardless of file order.
        let order: HashMap<(u64, &str), usize> = manifest
            .seeds
            .iter()
            .enumerate()
            .flat_map(|(si, &s)| {
                let n = manifest.task_ids.len();
                manifest.task_ids.iter().enumerate().map(move |(ti, t)| ((s, t.as_str()), si * n + ti))
            })
            .collect();
        let outcomes: Vec<Vec<TaskOutcome>> = manifest
            .arms
            .iter()
            .map(|arm| {
                let mut rs = by_arm.get(arm.name.as_str()).cloned().unwrap_or_default();
                rs.sort_by_key(|r| order.get(&(r.seed, r.outcome.task_id.as_str())).copied().unwrap_or(usize::MAX));
                rs.into_iter().map(|r| r.outcome.clone()).collect()
            })
            .collect();

        let reports: Vec<(String, MetricsReport)> = manifest
            .arms
            .iter()
            .zip(&outcomes)
            .map(|(a, o)| (a.name.clone(), MetricsReport::compute(o, manifest.membership)))
            .collect();
        let arms: Vec<ArmSummary> = manifest
            .arms
            .iter()
            .zip(&reports)
            .map(|(a, (_, r))| ArmSummary { name: a.name.clone(), x: a.x, metrics: r.overall.clone() })
            .collect();

        let comparisons = if manifest.command == "ablate" && arms.len() > 1 {
            let reference = &arms[0];
            let ref_flags = contained_flags(&outcomes[0]);
            let diff = |a: Option<f64>, b: Option<f64>| Some(b? - a?);
            arms[1..]
                .iter()
                .zip(&outcomes[1..])
                .map(|(arm, o)| Comparison {
                    reference: reference.name.clone(),
                    arm: arm.name.clone(),
                    delta_containment: diff(reference.metrics.containment_rate, arm.metrics.containment_rate),
                    delta_top1: diff(reference.metrics.top1_accuracy, arm.metrics.top1_accuracy),
                    delta_avg_steps: diff(reference.metrics.avg_steps, arm.metrics.avg_steps),
                    delta_pass_rate: diff(reference.metrics.pass_rate, arm.metrics.pass_rate),
                    containment_sign_test: paired_sign_test(&ref_flags, &contained_flags(o)),
                })
                .collect()
        } else {
            Vec::new()
        };

        let series = arms.iter().map(|a| a.x).collect::<Option<Vec<f64>>>().map(|x| Series {
            x,
            containment_rate: arms.iter().map(|a| a.metrics.containment_rate).collect(),
            top1_accuracy: arms.iter().map(|a| a.metrics.top1_accuracy).collect(),
            avg_steps: arms.iter().map(|a| a.metrics.avg_steps).collect(),
        });

        let plot = PlotData {
            schema_version: SCHEMA_VERSION,
            run_id: manifest.run_id.clone(),
            command: manifest.command.clone(),
            arms,
            comparisons,
            series,
        };
        Self { reports, plot }
    }

    pub fn metrics_csv(&self) -> String {
        let mut s = String::from("arm,scope,metric,value\n");
        for (arm, report) in &self.reports {
            for (scope, metric, value) in report.rows() {
                s.push_str(&format!("{},{},{},{}\n", csv_field(arm), csv_field(&scope), metric, value));
            }
        }
        s
    }

    pub fn plot_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.plot).expect("plot data serializes");
        s.push('\n');
        s
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// Writer side of a store. Each file has exactly one writer; callers append
/// records in the order they should appear.
pub struct StoreWriter {
    dir: PathBuf,
    results: BufWriter<File>,
    traces: BufWriter<File>,
}

impl StoreWriter {
    /// Creates the directory and writes the manifest. Any previous run in
    /// the same directory is replaced.
    pub fn create(dir: &Path, manifest: &RunManifest) -> Result<Self, StoreError> {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        for stale in [METRICS, PLOT] {
            let p = dir.join(stale);
            if p.exists() {
                std::fs::remove_file(&p).map_err(io_err(&p))?;
            }
        }
        let mpath = dir.join(MANIFEST);
        let text = serde_json::to_string_pretty(manifest).expect("manifest serializes") + "\n";
        std::fs::write(&mpath, text).map_err(io_err(&mpath))?;
        let open = |name: &str| -> Result<BufWriter<File>, StoreError> {
            let p = dir.join(name);
            File::create(&p).map(BufWriter::new).map_err(io_err(&p))
        };
        Ok(Self { dir: dir.to_owned(), results: open(RESULTS)?, traces: open(TRACES)? })
    }

    pub fn append(&mut self, record: &StoredRecord, trace: Option<&ZoomTrace>) -> Result<(), StoreError> {
        let line = serde_json::to_string(record).expect("record serializes");
        writeln!(self.results, "{line}").map_err(io_err(&self.dir.join(RESULTS)))?;
        if let Some(trace) = trace {
            let t = TraceRecord { arm: record.arm.clone(), seed: record.seed, trace: trace.clone() };
            let line = serde_json::to_string(&t).expect("trace serializes");
            writeln!(self.traces, "{line}").map_err(io_err(&self.dir.join(TRACES)))?;
        }
        Ok(())
    }

    /// Flushes the logs and writes the derived files.
    pub fn finish(mut self, derived: &Derived) -> Result<(), StoreError> {
        self.results.flush().map_err(io_err(&self.dir.join(RESULTS)))?;
        self.traces.flush().map_err(io_err(&self.dir.join(TRACES)))?;
        write_derived(&self.dir, derived)
    }
}

pub fn write_derived(dir: &Path, derived: &Derived) -> Result<(), StoreError> {
    let p = dir.join(METRICS);
    std::fs::write(&p, derived.metrics_csv()).map_err(io_err(&p))?;
    let p = dir.join(PLOT);
    std::fs::write(&p, derived.plot_json()).map_err(io_err(&p))
}

pub fn read_manifest(dir: &Path) -> Result<RunManifest, StoreError> {
    let path = dir.join(MANIFEST);
    let text = std::fs::read_to_string(&path).map_err(io_err(&path))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| StoreError::Parse {
        path: path.clone(),
        line: e.line(),
        message: e.to_string(),
    })?;
    let found = value.get("schema_version").and_then(|v| v.as_u64()).unwrap_or(0) as u32;
    if found != SCHEMA_VERSION {
        return Err(StoreError::Schema { found, expected: SCHEMA_VERSION });
    }
    serde_json::from_value(value).map_err(|e| StoreError::Parse { path, line: 0, message: e.to_string() })
}

pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, StoreError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| StoreError::Parse {
            path: path.to_owned(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn read_records(dir: &Path) -> Result<Vec<StoredRecord>, StoreError> {
    read_jsonl(&dir.join(RESULTS))
}

/// Every (arm, seed, task) named by the manifest has exactly one record and
/// no record falls outside that set.
pub fn check_complete(manifest: &RunManifest, records: &[StoredRecord]) -> Result<(), StoreError> {
    let mut seen = BTreeSet::new();
    for r in records {
        if !seen.insert(r.key()) {
            return Err(StoreError::Integrity(format!(
                "duplicate record arm={} seed={} task={}",
                r.arm, r.seed, r.outcome.task_id
            )));
        }
    }
    let mut missing = Vec::new();
    let mut expected = BTreeSet::new();
    for arm in &manifest.arms {
        for &seed in &manifest.seeds {
            for t in &manifest.task_ids {
                let key = (arm.name.clone(), seed, t.clone());
                if !seen.contains(&key) {
                    missing.push(format!("arm={} seed={} task={}", arm.name, seed, t));
                }
                expected.insert(key);
            }
        }
    }
    if !missing.is_empty() {
        return Err(StoreError::Missing { missing });
    }
    if let Some(extra) = seen.difference(&expected).next() {
        return Err(StoreError::Integrity(format!(
            "record arm={} seed={} task={} is not part of this run",
            extra.0, extra.1, extra.2
        )));
    }
    Ok(())
}

/// A store that passed every check.
#[derive(Debug, Clone)]
pub struct VerifiedStore {
    pub manifest: RunManifest,
    pub records: Vec<StoredRecord>,
    pub derived: Derived,
    /// False when the dataset file named in the manifest no longer exists.
    pub dataset_checked: bool,
}

/// Recomputes all derived files from the stored records and compares them
/// byte for byte with what is on disk.
pub fn verify_store(dir: &Path) -> Result<VerifiedStore, StoreError> {
    let manifest = read_manifest(dir)?;
    let records = read_records(dir)?;
    check_complete(&manifest, &records)?;
    let derived = Derived::compute(&manifest, &records);
    for (name, fresh) in [(METRICS, derived.metrics_csv()), (PLOT, derived.plot_json())] {
        let path = dir.join(name);
        let stored = std::fs::read_to_string(&path).map_err(io_err(&path))?;
        if stored != fresh {
            let line = stored
                .lines()
                .zip(fresh.lines())
                .position(|(a, b)| a != b)
                .unwrap_or_else(|| stored.lines().count().min(fresh.lines().count()));
            return Err(StoreError::Integrity(format!(
                "{name} does not match metrics recomputed from {RESULTS} (first difference at line {})",
                line + 1
            )));
        }
    }
    let dataset_checked = manifest.dataset.path.exists();
    if dataset_checked {
        let sha = sha256_file(&manifest.dataset.path)?;
        if sha != manifest.dataset.sha256 {
            return Err(StoreError::Integrity(format!(
                "dataset {} changed since the run (sha256 {} != {})",
                manifest.dataset.path.display(),
                sha,
                manifest.dataset.sha256
            )));
        }
    }
    Ok(VerifiedStore { manifest, records, derived, dataset_checked })
}
