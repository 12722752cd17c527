//! The prediction interface shared by the zoom engine and Stage 2.
//!
//! A predictor answers `(instruction, crop) -> point` in the crop-local
//! frame: `(0, 0)` is the top-left pixel of the crop it was shown, after any
//! upscaling. The caller maps the point back to global coordinates.

mod chat;
mod parse;
mod remote;
mod replay;
mod sim;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Point;
use crate::imaging::{GridRect, Raster};

pub use chat::{ChatClient, ChatError, ChatMessage, ContentPart, EndpointConfig};
pub use parse::{extract_json_object, parse_point_from_text};
pub use remote::{RemotePredictor, DEFAULT_GROUNDING_PROMPT};
pub use replay::{replay_predict, Recorded, ReplayPredictor};
pub use sim::{sim_predict, SimKind, SimPredictor, SimPredictorSpec, SimulatedWorld};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PredictError {
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("could not parse a point from reply: {raw:?}")]
    Parse { raw: String },
    #[error("replay exhausted: call {index} but only {len} recorded predictions")]
    ReplayExhausted { index: usize, len: usize },
    #[error("predictor {0} needs crop pixels but none were provided")]
    MissingImage(String),
}

impl From<ChatError> for PredictError {
    fn from(e: ChatError) -> Self {
        PredictError::Transport(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Search,
    Ground,
}

impl Stage {
    pub fn label(self) -> &'static str {
        match self {
            Stage::Search => "stage1",
            Stage::Ground => "stage2",
        }
    }
}

/// One query: the instruction plus the crop the model is shown.
#[derive(Debug, Clone, Copy)]
pub struct PredictRequest<'a> {
    pub task_id: &'a str,
    pub stage: Stage,
    /// Zero-based index of this call within the task and stage.
    pub call_index: u32,
    pub instruction: &'a str,
    /// Global pixel rectangle the crop was cut from.
    pub crop: GridRect,
    /// Integer upscale applied to the crop before it was shown.
    pub scale: u32,
    /// Crop pixels after scaling; absent for pixel-less simulated tasks.
    pub image: Option<&'a Raster>,
}

impl PredictRequest<'_> {
    /// Crop-local extent `(width, height)` of what the model saw.
    pub fn extent(&self) -> (f64, f64) {
        ((self.crop.width() * self.scale) as f64, (self.crop.height() * self.scale) as f64)
    }

    pub fn global_to_local(&self, p: Point) -> Point {
        let s = self.scale as f64;
        Point::new((p.x - self.crop.x0 as f64) * s, (p.y - self.crop.y0 as f64) * s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictorInfo {
    pub name: String,
    pub supports_concurrency: bool,
}

pub trait Predictor: Send + Sync {
    fn info(&self) -> PredictorInfo;

    fn predict(&self, req: &PredictRequest<'_>) -> Result<Point, PredictError>;
}

impl<P: Predictor + ?Sized> Predictor for &P {
    fn info(&self) -> PredictorInfo {
        (**self).info()
    }

    fn predict(&self, req: &PredictRequest<'_>) -> Result<Point, PredictError> {
        (**self).predict(req)
    }
}

impl<P: Predictor + ?Sized> Predictor for Box<P> {
    fn info(&self) -> PredictorInfo {
        (**self).info()
    }

    fn predict(&self, req: &PredictRequest<'_>) -> Result<Point, PredictError> {
        (**self).predict(req)
    }
}

/// Wraps a closure as a predictor. Handy for tests and examples.
pub struct FnPredictor<F> {
    name: String,
    f: F,
}

impl<F> FnPredictor<F>
where
    F: Fn(&PredictRequest<'_>) -> Result<Point, PredictError> + Send + Sync,
{
    pub fn new(name: impl Into<String>, f: F) -> Self {
        Self { name: name.into(), f }
    }
}

impl<F> Predictor for FnPredictor<F>
where
    F: Fn(&PredictRequest<'_>) -> Result<Point, PredictError> + Send + Sync,
{
    fn info(&self) -> PredictorInfo {
        PredictorInfo { name: self.name.clone(), supports_concurrency: true }
    }

    fn predict(&self, req: &PredictRequest<'_>) -> Result<Point, PredictError> {
        (self.f)(req)
    }
}
