//! Replays recorded answers so a saved run can be re-executed offline.

use serde::{Deserialize, Serialize};

use super::{PredictError, PredictRequest, Predictor, PredictorInfo, Stage};
use crate::geometry::Point;
use crate::zoom::{Prediction, ZoomTrace};

/// One recorded answer in the crop-local frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Recorded {
    Point(Point),
    Unparsed { raw: String },
}

impl From<&Prediction> for Recorded {
    fn from(p: &Prediction) -> Self {
        match p {
            Prediction::InBounds { local, .. } | Prediction::OutOfBounds { local } => Recorded::Point(*local),
            Prediction::Unparsed { raw } => Recorded::Unparsed { raw: raw.clone() },
        }
    }
}

/// The `index`-th recorded answer.
pub fn replay_predict(answers: &[Recorded], index: usize) -> Result<Point, PredictError> {
    match answers.get(index) {
        Some(Recorded::Point(p)) => Ok(*p),
        Some(Recorded::Unparsed { raw }) => Err(PredictError::Parse { raw: raw.clone() }),
        None => Err(PredictError::ReplayExhausted { index, len: answers.len() }),
    }
}

/// Answers calls by their `call_index` from per-stage recordings.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReplayPredictor {
    pub search: Vec<Recorded>,
    pub ground: Vec<Recorded>,
}

impl ReplayPredictor {
    pub fn new(search: Vec<Recorded>, ground: Vec<Recorded>) -> Self {
        Self { search, ground }
    }

    /// Search-stage answers taken from a recorded zoom trace.
    pub fn from_trace(trace: &ZoomTrace) -> Self {
        Self { search: trace.steps.iter().map(|s| Recorded::from(&s.prediction)).collect(), ground: Vec::new() }
    }

    pub fn with_ground(mut self, ground: Vec<Recorded>) -> Self {
        self.ground = ground;
        self
    }
}

impl Predictor for ReplayPredictor {
    fn info(&self) -> PredictorInfo {
        PredictorInfo { name: "replay".into(), supports_concurrency: true }
    }

    fn predict(&self, req: &PredictRequest<'_>) -> Result<Point, PredictError> {
        let answers = match req.stage {
            Stage::Search => &self.search,
            Stage::Ground => &self.ground,
        };
        replay_predict(answers, req.call_index as usize)
    }
}
