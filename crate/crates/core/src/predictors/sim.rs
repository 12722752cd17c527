//! Simulated predictors: an exact oracle plus generative models of the
//! typical ways a grounding model goes wrong.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{PredictError, PredictRequest, Predictor, PredictorInfo};
use crate::geometry::{ImageBounds, Point};
use crate::imaging::TargetRegion;
use crate::rng;

/// Desk-scale stand-in for a benchmark screenshot: image size, where the
/// target is, and salient decoys a fixating model may lock onto.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatedWorld {
    pub bounds: ImageBounds,
    pub target: TargetRegion,
    #[serde(default)]
    pub distractors: Vec<Point>,
    #[serde(default)]
    pub seed: u64,
}

impl SimulatedWorld {
    /// Builds a world, scattering `n_distractors` decoys uniformly over the
    /// image from a stream keyed on `(seed, task_id)`.
    pub fn generate(bounds: ImageBounds, target: TargetRegion, n_distractors: usize, seed: u64, task_id: &str) -> Self {
        let mut r = rng::stream(seed, task_id, "distractors", 0);
        let distractors = (0..n_distractors)
            .map(|_| Point::new(r.random_range(0.0..bounds.width as f64), r.random_range(0.0..bounds.height as f64)))
            .collect();
        Self { bounds, target, distractors, seed }
    }

    pub fn target_center(&self) -> Point {
        self.target.center()
    }

    pub fn nearest_distractor(&self) -> Option<Point> {
        let c = self.target_center();
        self.distractors.iter().copied().min_by(|a, b| a.distance(&c).total_cmp(&b.distance(&c)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimKind {
    Oracle,
    Noisy,
    Fixating,
    OobEmitter,
    Drifting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimPredictorSpec {
    pub kind: SimKind,
    /// Gaussian noise std-dev in crop-local pixels (`noisy`).
    #[serde(default)]
    pub sigma: f64,
    #[serde(default)]
    pub fixation_probability: f64,
    #[serde(default)]
    pub oob_probability: f64,
    /// Bias growth per call in crop-local pixels (`drifting`).
    #[serde(default = "default_drift")]
    pub drift_per_call: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_drift() -> f64 {
    40.0
}

impl SimPredictorSpec {
    pub fn oracle() -> Self {
        Self::of_kind(SimKind::Oracle)
    }

    pub fn noisy(sigma: f64) -> Self {
        Self { sigma, ..Self::of_kind(SimKind::Noisy) }
    }

    pub fn fixating(probability: f64) -> Self {
        Self { fixation_probability: probability, ..Self::of_kind(SimKind::Fixating) }
    }

    pub fn oob_emitter(probability: f64) -> Self {
        Self { oob_probability: probability, ..Self::of_kind(SimKind::OobEmitter) }
    }

    pub fn drifting(per_call: f64) -> Self {
        Self { drift_per_call: per_call, ..Self::of_kind(SimKind::Drifting) }
    }

    fn of_kind(kind: SimKind) -> Self {
        Self {
            kind,
            sigma: 0.0,
            fixation_probability: 0.0,
            oob_probability: 0.0,
            drift_per_call: default_drift(),
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), String> {
        let prob_ok = |p: f64| (0.0..=1.0).contains(&p);
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(format!("sigma must be >= 0, got {}", self.sigma));
        }
        if !prob_ok(self.fixation_probability) || !prob_ok(self.oob_probability) {
            return Err("probabilities must lie in [0, 1]".into());
        }
        if !self.drift_per_call.is_finite() {
            return Err("drift_per_call must be finite".into());
        }
        Ok(())
    }
}

/// One simulated prediction in the crop-local frame.
///
/// `run_seed` is mixed with the predictor's own seed; the stream for a call is
/// keyed on task id, stage and call index, so the result does not depend on
/// execution order.
pub fn sim_predict(spec: &SimPredictorSpec, world: &SimulatedWorld, req: &PredictRequest<'_>, run_seed: u64) -> Point {
    let base_seed = rng::splitmix64(run_seed) ^ spec.seed;
    let mut r = rng::stream(base_seed, req.task_id, req.stage.label(), req.call_index as u64);
    let oracle = req.global_to_local(world.target_center());
    match spec.kind {
        SimKind::Oracle => oracle,
        SimKind::Noisy => {
            if spec.sigma == 0.0 {
                return oracle;
            }
            let n = Normal::new(0.0, spec.sigma).expect("validated sigma");
            Point::new(oracle.x + n.sample(&mut r), oracle.y + n.sample(&mut r))
        }
        SimKind::Fixating => {
            if r.random_bool(spec.fixation_probability) {
                world.nearest_distractor().map(|d| req.global_to_local(d)).unwrap_or(oracle)
            } else {
                oracle
            }
        }
        SimKind::OobEmitter => {
            if r.random_bool(spec.oob_probability) {
                outside_point(&mut r, req.extent())
            } else {
                oracle
            }
        }
        SimKind::Drifting => {
            // Direction is fixed per task; magnitude grows with every call.
            let mut dir = rng::stream(base_seed, req.task_id, "drift-direction", 0);
            let theta = dir.random_range(0.0..std::f64::consts::TAU);
            let k = (req.call_index + 1) as f64 * spec.drift_per_call;
            Point::new(oracle.x + k * theta.cos(), oracle.y + k * theta.sin())
        }
    }
}

fn beyond(r: &mut impl Rng, len: f64) -> f64 {
    1.0 + r.random::<f64>() * (len / 2.0).max(1.0)
}

fn outside_point(r: &mut impl Rng, (w, h): (f64, f64)) -> Point {
    let along_x = r.random_range(0.0..=w);
    let along_y = r.random_range(0.0..=h);
    match r.random_range(0..4u8) {
        0 => Point::new(-beyond(r, w), along_y),
        1 => Point::new(w + beyond(r, w), along_y),
        2 => Point::new(along_x, -beyond(r, h)),
        _ => Point::new(along_x, h + beyond(r, h)),
    }
}

/// A simulated predictor bound to one task's world.
#[derive(Debug, Clone)]
pub struct SimPredictor {
    pub spec: SimPredictorSpec,
    pub world: SimulatedWorld,
    pub run_seed: u64,
}

impl SimPredictor {
    pub fn new(spec: SimPredictorSpec, world: SimulatedWorld, run_seed: u64) -> Self {
        Self { spec, world, run_seed }
    }
}

impl Predictor for SimPredictor {
    fn info(&self) -> PredictorInfo {
        let name =
            serde_json::to_value(self.spec.kind).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
        PredictorInfo { name: format!("sim:{name}"), supports_concurrency: true }
    }

    fn predict(&self, req: &PredictRequest<'_>) -> Result<Point, PredictError> {
        Ok(sim_predict(&self.spec, &self.world, req, self.run_seed))
    }
}
