//! Benchmark metrics over per-task outcomes.
//!
//! Denominators:
//! * containment, pass rate and conditional accuracy use feasible tasks that
//!   ran Stage 1 without error;
//! * Top-1 uses every feasible task that did not error, refusals counting as
//!   misses;
//! * refusal accuracy and false-positive rate use non-errored infeasible and
//!   feasible tasks respectively.
//!
//! Errored tasks never enter a denominator; they are counted in `n_errors`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geometry::{is_inside, Point, Rect};
use crate::imaging::TargetRegion;

/// Everything the metrics need to know about one finished task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskOutcome {
    pub task_id: String,
    pub feasible: bool,
    #[serde(default)]
    pub target: Option<TargetRegion>,
    pub resolution: (u32, u32),
    #[serde(default)]
    pub group: String,
    #[serde(default)]
    pub refused: bool,
    #[serde(default)]
    pub errored: bool,
    #[serde(default)]
    pub final_roi: Option<Rect>,
    #[serde(default)]
    pub final_point: Option<Point>,
    /// Stage 1 predictor calls.
    #[serde(default)]
    pub steps: Option<usize>,
    #[serde(default)]
    pub correct: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Membership {
    /// The target region's center lies in the ROI.
    #[default]
    Center,
    /// The target's bounding box intersects the ROI at all.
    AnyOverlap,
}

/// Whether the finalized ROI holds the target; `None` when the task has no
/// ROI or no target.
pub fn contains_target(o: &TaskOutcome, membership: Membership) -> Option<bool> {
    let roi = o.final_roi.as_ref()?;
    let target = o.target.as_ref()?;
    Some(match membership {
        Membership::Center => is_inside(target.center(), roi),
        Membership::AnyOverlap => {
            let b = target.bounding_box();
            b.x_min <= roi.x_max && roi.x_min <= b.x_max && b.y_min <= roi.y_max && roi.y_min <= b.y_max
        }
    })
}

fn stage1_eligible(o: &TaskOutcome) -> bool {
    o.feasible && !o.errored && !o.refused && o.final_roi.is_some() && o.target.is_some()
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Fraction of eligible tasks whose finalized ROI contains the target.
pub fn containment_rate(outcomes: &[TaskOutcome], membership: Membership) -> Option<f64> {
    let eligible: Vec<_> = outcomes.iter().filter(|o| stage1_eligible(o)).collect();
    let hit = eligible.iter().filter(|o| contains_target(o, membership) == Some(true)).count();
    ratio(hit, eligible.len())
}

/// Accuracy among contained tasks only; `None` when nothing was contained.
pub fn conditional_accuracy(outcomes: &[TaskOutcome], membership: Membership) -> Option<f64> {
    let contained: Vec<_> =
        outcomes.iter().filter(|o| stage1_eligible(o) && contains_target(o, membership) == Some(true)).collect();
    let correct = contained.iter().filter(|o| o.correct == Some(true)).count();
    ratio(correct, contained.len())
}

pub fn composite_score(containment: f64, conditional: f64) -> f64 {
    containment * conditional
}

/// Final-point accuracy over all non-errored feasible tasks.
pub fn top1_accuracy(outcomes: &[TaskOutcome]) -> Option<f64> {
    let feasible: Vec<_> = outcomes.iter().filter(|o| o.feasible && !o.errored).collect();
    let correct = feasible.iter().filter(|o| !o.refused && o.correct == Some(true)).count();
    ratio(correct, feasible.len())
}

pub fn avg_steps(outcomes: &[TaskOutcome]) -> Option<f64> {
    let steps: Vec<usize> = outcomes.iter().filter(|o| !o.errored).filter_map(|o| o.steps).collect();
    (!steps.is_empty()).then(|| steps.iter().sum::<usize>() as f64 / steps.len() as f64)
}

/// Refusal accuracy (refused / infeasible) and false-positive rate
/// (refused / feasible).
pub fn refusal_metrics(outcomes: &[TaskOutcome]) -> (Option<f64>, Option<f64>) {
    let count = |feasible: bool| {
        let group: Vec<_> = outcomes.iter().filter(|o| !o.errored && o.feasible == feasible).collect();
        (group.iter().filter(|o| o.refused).count(), group.len())
    };
    let (ri, ni) = count(false);
    let (rf, nf) = count(true);
    (ratio(ri, ni), ratio(rf, nf))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ResolutionCluster {
    Standard,
    HighRes,
    UltraWide,
    Extreme,
}

impl ResolutionCluster {
    pub fn label(self) -> &'static str {
        match self {
            ResolutionCluster::Standard => "standard",
            ResolutionCluster::HighRes => "high_res",
            ResolutionCluster::UltraWide => "ultra_wide",
            ResolutionCluster::Extreme => "extreme",
        }
    }
}

/// Aspect ratio 2.5:1 or wider is ultra-wide; otherwise under 5 MP is
/// standard (HD/QHD), under 8 MP is high-res, anything larger is 4K+.
pub fn resolution_cluster(width: u32, height: u32) -> ResolutionCluster {
    let (long, short) = (width.max(height) as f64, width.min(height).max(1) as f64);
    let pixels = width as u64 * height as u64;
    if long / short >= 2.5 {
        ResolutionCluster::UltraWide
    } else if pixels < 5_000_000 {
        ResolutionCluster::Standard
    } else if pixels < 8_000_000 {
        ResolutionCluster::HighRes
    } else {
        ResolutionCluster::Extreme
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CoreMetrics {
    pub n_tasks: usize,
    pub n_errors: usize,
    pub n_contained: usize,
    pub containment_rate: Option<f64>,
    pub conditional_accuracy: Option<f64>,
    pub composite_score: Option<f64>,
    pub top1_accuracy: Option<f64>,
    pub avg_steps: Option<f64>,
    pub pass_rate: Option<f64>,
    pub refusal_accuracy: Option<f64>,
    pub false_positive_rate: Option<f64>,
}

impl CoreMetrics {
    pub fn compute(outcomes: &[TaskOutcome], membership: Membership) -> Self {
        let containment = containment_rate(outcomes, membership);
        let conditional = conditional_accuracy(outcomes, membership);
        let (refusal_accuracy, false_positive_rate) = refusal_metrics(outcomes);
        Self {
            n_tasks: outcomes.len(),
            n_errors: outcomes.iter().filter(|o| o.errored).count(),
            n_contained: outcomes
                .iter()
                .filter(|o| stage1_eligible(o) && contains_target(o, membership) == Some(true))
                .count(),
            containment_rate: containment,
            conditional_accuracy: conditional,
            composite_score: match (containment, conditional) {
                (Some(a), Some(b)) => Some(composite_score(a, b)),
                _ => None,
            },
            top1_accuracy: top1_accuracy(outcomes),
            avg_steps: avg_steps(outcomes),
            pass_rate: containment_rate(outcomes, Membership::Center),
            refusal_accuracy,
            false_positive_rate,
        }
    }

    /// `(name, value)` pairs in a fixed order; absent values are skipped.
    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        let mut v = vec![("n_tasks", self.n_tasks as f64), ("n_errors", self.n_errors as f64)];
        v.push(("n_contained", self.n_contained as f64));
        let opts = [
            ("containment_rate", self.containment_rate),
            ("conditional_accuracy", self.conditional_accuracy),
            ("composite_score", self.composite_score),
            ("top1_accuracy", self.top1_accuracy),
            ("avg_steps", self.avg_steps),
            ("pass_rate", self.pass_rate),
            ("refusal_accuracy", self.refusal_accuracy),
            ("false_positive_rate", self.false_positive_rate),
        ];
        v.extend(opts.into_iter().filter_map(|(k, x)| x.map(|x| (k, x))));
        v
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricsReport {
    pub overall: CoreMetrics,
    pub by_group: BTreeMap<String, CoreMetrics>,
    pub by_resolution: BTreeMap<ResolutionCluster, CoreMetrics>,
}

impl MetricsReport {
    pub fn compute(outcomes: &[TaskOutcome], membership: Membership) -> Self {
        let mut groups: BTreeMap<String, Vec<TaskOutcome>> = BTreeMap::new();
        let mut clusters: BTreeMap<ResolutionCluster, Vec<TaskOutcome>> = BTreeMap::new();
        for o in outcomes {
            if !o.group.is_empty() {
                groups.entry(o.group.clone()).or_default().push(o.clone());
            }
            let (w, h) = o.resolution;
            clusters.entry(resolution_cluster(w, h)).or_default().push(o.clone());
        }
        Self {
            overall: CoreMetrics::compute(outcomes, membership),
            by_group: groups.into_iter().map(|(k, v)| (k, CoreMetrics::compute(&v, membership))).collect(),
            by_resolution: clusters.into_iter().map(|(k, v)| (k, CoreMetrics::compute(&v, membership))).collect(),
        }
    }

    /// `(scope, metric, value)` rows: `all`, then `group:<name>`, then
    /// `resolution:<cluster>`.
    pub fn rows(&self) -> Vec<(String, &'static str, f64)> {
        let mut rows = Vec::new();
        let mut push = |scope: String, m: &CoreMetrics| {
            rows.extend(m.entries().into_iter().map(|(k, v)| (scope.clone(), k, v)));
        };
        push("all".into(), &self.overall);
        for (g, m) in &self.by_group {
            push(format!("group:{g}"), m);
        }
        for (c, m) in &self.by_resolution {
            push(format!("resolution:{}", c.label()), m);
        }
        rows
    }
}
