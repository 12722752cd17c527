//! The three-stage grounding pipeline.
//!
//! * Stage 0 (optional): a refusal agent judges whether the instruction can
//!   be executed on the screenshot at all.
//! * Stage 1: bidirectional ROI zoom finds a fixed-size region around the
//!   target.
//! * Stage 2: the region is cropped, upscaled, optionally paired with a
//!   rewritten instruction, and a grounding model picks the final point,
//!   which is mapped back to screen coordinates.

pub mod prompts;
pub mod refusal;
pub mod rewrite;

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::geometry::map_crop_to_global;
pub use prompts::{render_template, RefusalVariant, RewriteStrategy};
pub use refusal::{check_feasibility, parse_verdict, refusal_messages, Decision, FeasibilityVerdict};
pub use rewrite::{postprocess, rewrite_instruction, rewrite_messages, RewriteOutcome};

use crate::gbt::dataset::GroundingTask;
use crate::geometry::{Point, Rect};
use crate::imaging::{crop_grid, grid_rect, point_in_region, upscale_bicubic, ImagingError, Raster, TargetRegion};
use crate::predictors::{
    ChatClient, ChatError, ChatMessage, EndpointConfig, PredictRequest, Predictor, RemotePredictor, SimPredictor,
    SimPredictorSpec, SimulatedWorld, Stage,
};
use crate::rng;
use crate::zoom::{run_zoom, static_one_shot_roi, ZoomContext, ZoomMode, ZoomParams, ZoomTrace};

#[derive(Debug, Error)]
pub enum AgentError {
    #[error(transparent)]
    Chat(#[from] ChatError),
    #[error(transparent)]
    Imaging(#[from] ImagingError),
    #[error("the raw strategy makes no model call")]
    RawStrategy,
}

/// Anything that can answer a chat-completions request with text.
pub trait ChatBackend: Send + Sync {
    fn complete(&self, messages: &[ChatMessage]) -> Result<String, ChatError>;
}

impl ChatBackend for ChatClient {
    fn complete(&self, messages: &[ChatMessage]) -> Result<String, ChatError> {
        ChatClient::complete(self, messages)
    }
}

/// Where a grounding predictor comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "snake_case")]
pub enum PredictorConfig {
    Sim(SimPredictorSpec),
    Remote {
        endpoint: EndpointConfig,
        #[serde(default)]
        prompt: Option<String>,
    },
}

/// A refusal judge that answers from the task's feasibility label with
/// fixed error rates. Useful for exercising refusal metrics offline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatedJudge {
    /// Probability of refusing an infeasible task.
    pub refusal_accuracy: f64,
    /// Probability of refusing a feasible task.
    pub false_positive_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "snake_case")]
pub enum JudgeConfig {
    Remote { endpoint: EndpointConfig },
    Sim(SimulatedJudge),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RefusalConfig {
    pub enabled: bool,
    pub variant: RefusalVariant,
    /// Upscale factor for the screenshot sent to the judge.
    pub scaling: u32,
    /// Decision used when the judge's reply cannot be read.
    pub on_parse_failure: Decision,
    pub judge: Option<JudgeConfig>,
}

impl Default for RefusalConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            variant: RefusalVariant::V2,
            scaling: 1,
            on_parse_failure: Decision::Proceed,
            judge: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RewriteConfig {
    pub strategy: RewriteStrategy,
    pub endpoint: Option<EndpointConfig>,
}

impl Default for RewriteConfig {
    fn default() -> Self {
        Self { strategy: RewriteStrategy::Hybrid, endpoint: None }
    }
}

/// Missing fields take the values of an all-simulated oracle pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub refusal: RefusalConfig,
    pub zoom: ZoomParams,
    pub mode: ZoomMode,
    pub search: SearchMethod,
    pub rewrite: RewriteConfig,
    pub scale_factor: u32,
    pub stage1: PredictorConfig,
    pub stage2: PredictorConfig,
    /// Decoys scattered per task for simulated predictors.
    pub sim_distractors: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self::simulated(SimPredictorSpec::oracle(), SimPredictorSpec::oracle())
    }
}

/// How Stage 1 picks the ROI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMethod {
    /// Iterative zoom; the finalized ROI has side `zoom.s_min`.
    #[default]
    Zoom,
    /// One prediction on the full screenshot, then a `zoom.s_min` square
    /// around it.
    StaticOneShot,
}

fn default_mode() -> ZoomMode {
    ZoomMode::Bidirectional
}
fn default_scale() -> u32 {
    3
}
fn default_distractors() -> usize {
    8
}

impl PipelineConfig {
    /// Simulated Stage 1 and Stage 2, no refusal, raw instructions.
    pub fn simulated(stage1: SimPredictorSpec, stage2: SimPredictorSpec) -> Self {
        Self {
            refusal: RefusalConfig::default(),
            zoom: ZoomParams::default(),
            mode: default_mode(),
            search: SearchMethod::Zoom,
            rewrite: RewriteConfig { strategy: RewriteStrategy::Raw, endpoint: None },
            scale_factor: default_scale(),
            stage1: PredictorConfig::Sim(stage1),
            stage2: PredictorConfig::Sim(stage2),
            sim_distractors: default_distractors(),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        self.zoom.validate().map_err(|e| e.to_string())?;
        if !(1..=4).contains(&self.scale_factor) {
            return Err(format!("scale_factor must be 1..=4, got {}", self.scale_factor));
        }
        if self.refusal.enabled {
            if !(1..=4).contains(&self.refusal.scaling) {
                return Err(format!("refusal.scaling must be 1..=4, got {}", self.refusal.scaling));
            }
            match &self.refusal.judge {
                None => return Err("refusal is enabled but refusal.judge is not configured".into()),
                Some(JudgeConfig::Sim(j)) => {
                    let ok = |p: f64| (0.0..=1.0).contains(&p);
                    if !ok(j.refusal_accuracy) || !ok(j.false_positive_rate) {
                        return Err("simulated judge rates must lie in [0, 1]".into());
                    }
                }
                Some(JudgeConfig::Remote { .. }) => {}
            }
        }
        if self.rewrite.strategy != RewriteStrategy::Raw && self.rewrite.endpoint.is_none() {
            return Err(format!(
                "rewrite strategy {} needs rewrite.endpoint; use strategy = \"raw\" to skip rewriting",
                self.rewrite.strategy.name()
            ));
        }
        for (name, p) in [("stage1", &self.stage1), ("stage2", &self.stage2)] {
            if let PredictorConfig::Sim(s) = p {
                s.validate().map_err(|e| format!("{name}: {e}"))?;
            }
        }
        Ok(())
    }

    fn needs_pixels(&self) -> bool {
        let remote = |p: &PredictorConfig| matches!(p, PredictorConfig::Remote { .. });
        remote(&self.stage1)
            || remote(&self.stage2)
            || self.rewrite.strategy != RewriteStrategy::Raw
            || (self.refusal.enabled && matches!(self.refusal.judge, Some(JudgeConfig::Remote { .. })))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PipelineStage {
    Load,
    Refusal,
    Search,
    Rewrite,
    Ground,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageError {
    pub stage: PipelineStage,
    pub message: String,
}

/// Wall-clock milliseconds per stage. The stages are measured back to back,
/// so they add up to `total_ms`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub load_ms: f64,
    pub refusal_ms: f64,
    pub search_ms: f64,
    pub rewrite_ms: f64,
    pub ground_ms: f64,
    pub total_ms: f64,
}

impl StageTimings {
    pub fn stage_sum(&self) -> f64 {
        self.load_ms + self.refusal_ms + self.search_ms + self.rewrite_ms + self.ground_ms
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineResult {
    pub task_id: String,
    pub decision: Decision,
    #[serde(default)]
    pub rationale: Option<String>,
    /// False when the refusal reply was unreadable and the fallback applied.
    #[serde(default = "yes")]
    pub refusal_parsed: bool,
    #[serde(default)]
    pub trace: Option<ZoomTrace>,
    /// Stage 1 predictor calls made.
    #[serde(default)]
    pub search_calls: usize,
    #[serde(default)]
    pub instruction: Option<String>,
    #[serde(default)]
    pub rewrite_fell_back: bool,
    #[serde(default)]
    pub final_roi: Option<Rect>,
    #[serde(default)]
    pub final_point: Option<Point>,
    /// Crop-local Stage 2 answer before mapping and clamping.
    #[serde(default)]
    pub stage2_local: Option<Point>,
    #[serde(default)]
    pub correct: Option<bool>,
    #[serde(default)]
    pub error: Option<StageError>,
    pub timings: StageTimings,
}

fn yes() -> bool {
    true
}

impl PipelineResult {
    fn new(task_id: &str) -> Self {
        Self {
            task_id: task_id.to_owned(),
            decision: Decision::Proceed,
            rationale: None,
            refusal_parsed: true,
            trace: None,
            search_calls: 0,
            instruction: None,
            rewrite_fell_back: false,
            final_roi: None,
            final_point: None,
            stage2_local: None,
            correct: None,
            error: None,
            timings: StageTimings::default(),
        }
    }
}

enum Grounder {
    Sim(SimPredictorSpec),
    Remote(RemotePredictor),
}

enum Judge {
    Remote(ChatClient),
    Sim(SimulatedJudge),
}

/// A configured pipeline. Chat clients are built once and shared by all
/// tasks; `run` is safe to call from many threads.
pub struct Pipeline {
    config: PipelineConfig,
    run_seed: u64,
    stage1: Grounder,
    stage2: Grounder,
    judge: Option<Judge>,
    rewriter: Option<ChatClient>,
}

impl Pipeline {
    pub fn new(config: PipelineConfig, run_seed: u64) -> Result<Self, String> {
        config.validate()?;
        let grounder = |p: &PredictorConfig| match p {
            PredictorConfig::Sim(s) => Grounder::Sim(s.clone()),
            PredictorConfig::Remote { endpoint, prompt } => {
                Grounder::Remote(RemotePredictor::new(endpoint.clone(), prompt.clone()))
            }
        };
        let judge = match (&config.refusal.enabled, &config.refusal.judge) {
            (true, Some(JudgeConfig::Remote { endpoint })) => Some(Judge::Remote(ChatClient::new(endpoint.clone()))),
            (true, Some(JudgeConfig::Sim(j))) => Some(Judge::Sim(j.clone())),
            _ => None,
        };
        let rewriter = match config.rewrite.strategy {
            RewriteStrategy::Raw => None,
            _ => config.rewrite.endpoint.clone().map(ChatClient::new),
        };
        Ok(Self {
            stage1: grounder(&config.stage1),
            stage2: grounder(&config.stage2),
            judge,
            rewriter,
            config,
            run_seed,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    /// World used by simulated predictors for this task. Infeasible tasks
    /// without a target get a phantom target at the image center.
    pub fn world_for(&self, task: &GroundingTask) -> Option<SimulatedWorld> {
        let bounds = task.bounds()?;
        let target = task.target.clone().unwrap_or_else(|| {
            let c = Point::new(bounds.width as f64 / 2.0, bounds.height as f64 / 2.0);
            TargetRegion::Bbox(Rect::new(c.x - 0.5, c.y - 0.5, c.x + 0.5, c.y + 0.5).expect("unit box"))
        });
        Some(SimulatedWorld::generate(bounds, target, self.config.sim_distractors, self.run_seed, &task.id))
    }

    fn predictor<'a>(&'a self, g: &'a Grounder, world: &SimulatedWorld) -> Box<dyn Predictor + 'a> {
        match g {
            Grounder::Sim(spec) => Box::new(SimPredictor::new(spec.clone(), world.clone(), self.run_seed)),
            Grounder::Remote(r) => Box::new(r),
        }
    }

    /// Loads the task's screenshot if it has one. Tasks without an image are
    /// fine as long as every configured component works without pixels.
    pub fn load_image(&self, task: &GroundingTask) -> Result<Option<Raster>, String> {
        match &task.image_path {
            Some(path) => {
                let img = Raster::load_png(path).map_err(|e| e.to_string())?;
                if Some(img.bounds()) != task.bounds() {
                    return Err(format!(
                        "{}: image is {}x{} but metadata.resolution is {:?}",
                        path.display(),
                        img.width(),
                        img.height(),
                        task.metadata.resolution
                    ));
                }
                Ok(Some(img))
            }
            None if self.config.needs_pixels() => Err(format!("task {} has no image_path", task.id)),
            None => Ok(None),
        }
    }

    /// Runs all stages for one task. Stage failures are recorded in the
    /// result, never returned.
    pub fn run(&self, task: &GroundingTask) -> PipelineResult {
        let mut out = PipelineResult::new(&task.id);
        let mut clock = Clock::start();
        let fail = |out: &mut PipelineResult, stage, message: String| {
            out.error = Some(StageError { stage, message });
        };

        let image = match self.load_image(task) {
            Ok(img) => img,
            Err(e) => {
                fail(&mut out, PipelineStage::Load, e);
                out.timings.load_ms = clock.lap();
                out.timings.total_ms = clock.total();
                return out;
            }
        };
        let Some(world) = self.world_for(task) else {
            fail(&mut out, PipelineStage::Load, "invalid resolution".into());
            out.timings.total_ms = clock.total();
            return out;
        };
        out.timings.load_ms = clock.lap();

        if let Some(judge) = &self.judge {
            let verdict = match judge {
                Judge::Sim(j) => Ok(simulated_verdict(j, task, self.run_seed)),
                Judge::Remote(client) => match &image {
                    Some(img) => check_feasibility(
                        client,
                        img,
                        &task.instruction,
                        self.config.refusal.variant,
                        self.config.refusal.scaling,
                        self.config.refusal.on_parse_failure,
                    )
                    .map_err(|e| e.to_string()),
                    None => Err("refusal judge needs the screenshot".to_owned()),
                },
            };
            out.timings.refusal_ms = clock.lap();
            match verdict {
                Ok(v) => {
                    out.decision = v.decision;
                    out.rationale = v.rationale;
                    out.refusal_parsed = v.parsed;
                }
                Err(e) => {
                    fail(&mut out, PipelineStage::Refusal, e);
                    out.timings.total_ms = clock.total();
                    return out;
                }
            }
            if out.decision == Decision::Refuse {
                out.timings.total_ms = clock.total();
                return out;
            }
        }

        let bounds = world.bounds;
        let ctx = ZoomContext { task_id: &task.id, instruction: &task.instruction, bounds, image: image.as_ref() };
        let stage1 = self.predictor(&self.stage1, &world);
        let final_roi = match self.config.search {
            SearchMethod::Zoom => {
                let trace = run_zoom(&ctx, &stage1, &self.config.zoom, self.config.mode);
                out.timings.search_ms = clock.lap();
                let trace = match trace {
                    Ok(t) => t,
                    Err(e) => {
                        fail(&mut out, PipelineStage::Search, e.to_string());
                        out.timings.total_ms = clock.total();
                        return out;
                    }
                };
                let final_roi = trace.final_roi;
                let failure = trace.failure.clone();
                out.search_calls = trace.steps.len() + usize::from(failure.is_some());
                out.trace = Some(trace);
                if let Some(f) = failure {
                    fail(&mut out, PipelineStage::Search, f);
                    out.timings.total_ms = clock.total();
                    return out;
                }
                final_roi
            }
            SearchMethod::StaticOneShot => {
                let roi = static_one_shot_roi(&ctx, &stage1, self.config.zoom.s_min);
                out.timings.search_ms = clock.lap();
                out.search_calls = 1;
                match roi {
                    Ok(r) => r,
                    Err(e) => {
                        fail(&mut out, PipelineStage::Search, e.to_string());
                        out.timings.total_ms = clock.total();
                        return out;
                    }
                }
            }
        };
        out.final_roi = Some(final_roi);

        let crop = grid_rect(&final_roi, bounds).expect("finalized ROI lies inside the image");
        let scale = self.config.scale_factor;
        let pixels = match image.as_ref().map(|img| upscale_bicubic(&crop_grid(img, crop), scale)).transpose() {
            Ok(p) => p,
            Err(e) => {
                fail(&mut out, PipelineStage::Ground, e.to_string());
                out.timings.total_ms = clock.total();
                return out;
            }
        };

        let mut instruction = task.instruction.clone();
        if let (Some(client), Some(px)) = (&self.rewriter, &pixels) {
            match rewrite_instruction(client, px, &task.instruction, self.config.rewrite.strategy) {
                Ok(r) => {
                    instruction = r.instruction;
                    out.rewrite_fell_back = r.fell_back;
                }
                Err(e) => {
                    log::warn!("task {}: rewrite failed, keeping raw instruction: {e}", task.id);
                    out.rewrite_fell_back = true;
                }
            }
        }
        out.timings.rewrite_ms = clock.lap();

        let req = PredictRequest {
            task_id: &task.id,
            stage: Stage::Ground,
            call_index: 0,
            instruction: &instruction,
            crop,
            scale,
            image: pixels.as_ref(),
        };
        let stage2 = self.predictor(&self.stage2, &world);
        let answer = stage2.predict(&req);
        out.timings.ground_ms = clock.lap();
        out.instruction = Some(instruction);
        match answer {
            Ok(local) => {
                let crop_rect = crop.to_rect();
                let global = map_crop_to_global(local, &crop_rect, scale as f64);
                let p = Point::new(
                    global.x.clamp(crop_rect.x_min, crop_rect.x_max),
                    global.y.clamp(crop_rect.y_min, crop_rect.y_max),
                );
                out.stage2_local = Some(local);
                out.final_point = Some(p);
                if let Some(t) = &task.target {
                    out.correct = Some(point_in_region(p, t).unwrap_or(false));
                }
            }
            Err(e) => fail(&mut out, PipelineStage::Ground, e.to_string()),
        }
        out.timings.total_ms = clock.total();
        out
    }
}

fn simulated_verdict(judge: &SimulatedJudge, task: &GroundingTask, run_seed: u64) -> FeasibilityVerdict {
    let mut r = rng::stream(run_seed, &task.id, "refusal", 0);
    let p = if task.feasible { judge.false_positive_rate } else { judge.refusal_accuracy };
    let decision = if r.random_bool(p) { Decision::Refuse } else { Decision::Proceed };
    FeasibilityVerdict { decision, rationale: None, parsed: true }
}

/// Consecutive lap timer; laps partition the time since `start`.
struct Clock {
    start: Instant,
    last: Instant,
}

impl Clock {
    fn start() -> Self {
        let now = Instant::now();
        Self { start: now, last: now }
    }

    fn lap(&mut self) -> f64 {
        let now = Instant::now();
        let ms = (now - self.last).as_secs_f64() * 1e3;
        self.last = now;
        ms
    }

    fn total(&self) -> f64 {
        self.start.elapsed().as_secs_f64() * 1e3
    }
}

/// One-shot convenience: builds a [`Pipeline`] and runs a single task.
pub fn run_pipeline(task: &GroundingTask, config: &PipelineConfig, run_seed: u64) -> Result<PipelineResult, String> {
    Ok(Pipeline::new(config.clone(), run_seed)?.run(task))
}
