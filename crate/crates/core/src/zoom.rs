//! Bidirectional ROI zoom: closed-loop search that narrows a region of
//! interest around a grounding model's predictions and widens it again when
//! the model loses the target.
//!
//! Starting from the full screenshot, each iteration crops the current ROI,
//! asks the predictor where the target is, and then
//!
//! * in-bounds prediction: record it and zoom in toward it, cutting the
//!   boundary farther from the prediction on each axis;
//! * out-of-bounds prediction: bump the cumulative error counter and zoom
//!   out uniformly, or, once the counter reaches `e_max`, zoom in
//!   symmetrically instead.
//!
//! The loop stops when the ROI's longer side drops to `s_min`, when the last
//! `n_stable` in-bounds predictions lie within `eps_stable` of the newest
//! one, or at the `max_iters` safety cap. The result is then normalized to
//! an `s_min` square so the next stage always sees crops of the same scale.
//!
//! The error counter never resets, so at most `e_max - 1` expansions happen
//! per run and every other step shrinks the ROI geometrically; see
//! [`step_bound`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    self, center_rect, center_square, get_area, is_inside, zoom_in_asymmetric, zoom_in_symmetric, zoom_out,
    GeometryError, ImageBounds, Point, Rect,
};
use crate::imaging::{crop_grid, grid_rect, GridRect, Raster};
use crate::predictors::{PredictError, PredictRequest, Predictor, Stage};

#[derive(Debug, Error)]
pub enum ZoomError {
    #[error("invalid zoom parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("image size does not match task bounds: image {image:?}, task {task:?}")]
    BoundsMismatch { image: ImageBounds, task: ImageBounds },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ZoomParams {
    pub delta_in: f64,
    pub delta_out: f64,
    pub e_max: u32,
    pub s_min: f64,
    pub n_stable: usize,
    pub eps_stable: f64,
    pub max_iters: u32,
}

impl Default for ZoomParams {
    fn default() -> Self {
        Self { delta_in: 0.10, delta_out: 0.05, e_max: 5, s_min: 1000.0, n_stable: 3, eps_stable: 50.0, max_iters: 100 }
    }
}

impl ZoomParams {
    pub fn validate(&self) -> Result<(), ZoomError> {
        let bad = |m: &str| Err(ZoomError::InvalidParams(m.to_owned()));
        // Above 0.5 the moved boundary can pass the prediction itself.
        if !(self.delta_in > 0.0 && self.delta_in <= 0.5) {
            return bad("delta_in must lie in (0, 0.5]");
        }
        if !(self.delta_out > 0.0 && self.delta_out < 1.0) {
            return bad("delta_out must lie in (0, 1)");
        }
        if self.e_max < 1 {
            return bad("e_max must be >= 1");
        }
        if !(self.s_min.is_finite() && self.s_min > 0.0) {
            return bad("s_min must be positive");
        }
        if self.n_stable < 2 {
            return bad("n_stable must be >= 2");
        }
        if self.eps_stable.is_nan() || self.eps_stable <= 0.0 {
            return bad("eps_stable must be positive");
        }
        if self.max_iters < self.e_max + 1 {
            return bad("max_iters must be >= e_max + 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZoomMode {
    /// Zoom in on hits, zoom out on misses until the error budget is spent.
    Bidirectional,
    /// Never expands: misses trigger a centered symmetric zoom-in.
    Unidirectional,
    /// Hits re-center a `(1 - delta_in)`-scaled ROI on the prediction
    /// instead of the asymmetric cut.
    SymmetricBaseline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ZoomEvent {
    ZoomIn,
    ZoomOut,
    ForcedZoomIn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Termination {
    AreaThreshold,
    Converged,
    IterationCap,
}

/// What the predictor returned at one step. `local` is always the raw
/// crop-local answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Prediction {
    InBounds {
        local: Point,
        global: Point,
    },
    OutOfBounds {
        local: Point,
    },
    /// The model answered, but not with a point; handled as out-of-bounds.
    Unparsed {
        raw: String,
    },
}

impl Prediction {
    pub fn is_in_bounds(&self) -> bool {
        matches!(self, Prediction::InBounds { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoomStep {
    pub index: u32,
    pub roi_before: Rect,
    pub crop: GridRect,
    pub prediction: Prediction,
    pub event: ZoomEvent,
    pub roi_after: Rect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoomTrace {
    pub task_id: String,
    pub mode: ZoomMode,
    pub params: ZoomParams,
    pub bounds: ImageBounds,
    pub steps: Vec<ZoomStep>,
    /// In-bounds predictions in the global frame.
    pub history: Vec<Point>,
    pub error_count: u32,
    pub termination: Termination,
    /// Set when the predictor failed hard (transport); the run stopped there.
    #[serde(default)]
    pub failure: Option<String>,
    /// ROI when the loop exited.
    pub last_roi: Rect,
    /// `s_min`-sized ROI handed to the next stage.
    pub final_roi: Rect,
}

impl ZoomTrace {
    pub fn zoom_out_count(&self) -> usize {
        self.steps.iter().filter(|s| s.event == ZoomEvent::ZoomOut).count()
    }

    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }
}

/// Inputs describing the screenshot under search.
#[derive(Debug, Clone, Copy)]
pub struct ZoomContext<'a> {
    pub task_id: &'a str,
    pub instruction: &'a str,
    pub bounds: ImageBounds,
    /// Full screenshot pixels; predictors that only need geometry can run
    /// without them.
    pub image: Option<&'a Raster>,
}

impl ZoomContext<'_> {
    fn check(&self) -> Result<(), ZoomError> {
        match self.image {
            Some(img) if img.bounds() != self.bounds => {
                Err(ZoomError::BoundsMismatch { image: img.bounds(), task: self.bounds })
            }
            _ => Ok(()),
        }
    }

    fn request<'b>(&'b self, crop: GridRect, call_index: u32, image: Option<&'b Raster>) -> PredictRequest<'b> {
        PredictRequest {
            task_id: self.task_id,
            stage: Stage::Search,
            call_index,
            instruction: self.instruction,
            crop,
            scale: 1,
            image,
        }
    }
}

/// True when the newest of the last `n_stable` points is within
/// `eps_stable` of each of the other `n_stable - 1`.
pub fn search_converged(history: &[Point], n_stable: usize, eps_stable: f64) -> bool {
    if n_stable == 0 || history.len() < n_stable {
        return false;
    }
    let window = &history[history.len() - n_stable..];
    let (newest, rest) = window.split_last().expect("non-empty window");
    rest.iter().all(|p| newest.distance(p) <= eps_stable)
}

/// `s_min` square around the mean of the stable window when the search
/// converged, otherwise around the center of the last ROI.
pub fn finalize(
    roi: &Rect,
    history: &[Point],
    converged: bool,
    params: &ZoomParams,
    bounds: ImageBounds,
) -> Result<Rect, GeometryError> {
    let anchor = if converged && history.len() >= params.n_stable {
        Point::mean(&history[history.len() - params.n_stable..]).expect("non-empty window")
    } else {
        roi.center()
    };
    center_square(anchor, params.s_min, bounds)
}

/// ROI of `(1 - delta_in)` times the current size, centered on `p` and
/// shifted to stay inside the image.
fn recenter_on(roi: &Rect, p: Point, delta_in: f64, bounds: ImageBounds) -> Result<Rect, GeometryError> {
    let scale = 1.0 - delta_in;
    center_rect(p, scale * roi.width(), scale * roi.height(), bounds)
}

/// Runs one zoom search.
///
/// Hard predictor failures do not return an error: the trace stops with
/// `Termination::IterationCap` and `failure` set, so batch callers can keep
/// going.
pub fn run_zoom<P: Predictor + ?Sized>(
    ctx: &ZoomContext<'_>,
    predictor: &P,
    params: &ZoomParams,
    mode: ZoomMode,
) -> Result<ZoomTrace, ZoomError> {
    params.validate()?;
    ctx.check()?;
    let bounds = ctx.bounds;
    let mut roi = Rect::full(bounds);
    let mut steps: Vec<ZoomStep> = Vec::new();
    let mut history: Vec<Point> = Vec::new();
    let mut error_count = 0u32;
    let mut failure = None;
    let mut capped = false;

    while get_area(&roi) > params.s_min && !search_converged(&history, params.n_stable, params.eps_stable) {
        if steps.len() >= params.max_iters as usize {
            capped = true;
            break;
        }
        let crop = grid_rect(&roi, bounds).expect("ROI stays inside the image");
        let pixels = ctx.image.map(|img| crop_grid(img, crop));
        let index = steps.len() as u32;
        let req = ctx.request(crop, index, pixels.as_ref());

        let prediction = match predictor.predict(&req) {
            Ok(local) => {
                let global = geometry::map_crop_to_global(local, &crop.to_rect(), 1.0);
                if local.is_finite() && is_inside(global, &roi) {
                    Prediction::InBounds { local, global }
                } else {
                    Prediction::OutOfBounds { local }
                }
            }
            Err(PredictError::Parse { raw }) => Prediction::Unparsed { raw },
            Err(e) => {
                failure = Some(e.to_string());
                break;
            }
        };

        let (event, next) = match &prediction {
            Prediction::InBounds { global, .. } => {
                history.push(*global);
                let next = match mode {
                    ZoomMode::SymmetricBaseline => recenter_on(&roi, *global, params.delta_in, bounds)?,
                    _ => zoom_in_asymmetric(&roi, *global, params.delta_in)?,
                };
                (ZoomEvent::ZoomIn, next)
            }
            _ => {
                error_count += 1;
                if mode == ZoomMode::Unidirectional || error_count >= params.e_max {
                    (ZoomEvent::ForcedZoomIn, zoom_in_symmetric(&roi, params.delta_in)?)
                } else {
                    (ZoomEvent::ZoomOut, zoom_out(&roi, params.delta_out, bounds)?)
                }
            }
        };

        steps.push(ZoomStep { index, roi_before: roi, crop, prediction, event, roi_after: next });
        roi = next;
    }

    let converged = failure.is_none() && search_converged(&history, params.n_stable, params.eps_stable);
    let termination = if failure.is_some() || capped {
        Termination::IterationCap
    } else if converged {
        Termination::Converged
    } else {
        Termination::AreaThreshold
    };
    let final_roi = finalize(&roi, &history, converged, params, bounds)?;

    Ok(ZoomTrace {
        task_id: ctx.task_id.to_owned(),
        mode,
        params: params.clone(),
        bounds,
        steps,
        history,
        error_count,
        termination,
        failure,
        last_roi: roi,
        final_roi,
    })
}

/// Square ROI of side `size` centered on the predictor's single answer for
/// the full screenshot. Answers outside the image are clamped to its edge
/// first.
pub fn static_one_shot_roi<P: Predictor + ?Sized>(
    ctx: &ZoomContext<'_>,
    predictor: &P,
    size: f64,
) -> Result<Rect, StaticRoiError> {
    ctx.check().map_err(|e| StaticRoiError::Context(e.to_string()))?;
    let full = Rect::full(ctx.bounds);
    let crop = grid_rect(&full, ctx.bounds).expect("full image is a valid crop");
    let pixels = ctx.image.map(|img| crop_grid(img, crop));
    let local = predictor.predict(&ctx.request(crop, 0, pixels.as_ref()))?;
    if !local.is_finite() {
        return Err(StaticRoiError::Predict(PredictError::Parse { raw: format!("{local:?}") }));
    }
    let p = ctx.bounds.clamp_point(geometry::map_crop_to_global(local, &crop.to_rect(), 1.0));
    Ok(center_square(p, size, ctx.bounds)?)
}

#[derive(Debug, Error)]
pub enum StaticRoiError {
    #[error(transparent)]
    Predict(#[from] PredictError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("{0}")]
    Context(String),
}

/// Upper bound on the number of steps any run can take from an initial ROI
/// of size `d0`: at most `e_max - 1` expansions by `(1 + delta_out)`, every
/// other step shrinks by `(1 - delta_in)`.
pub fn step_bound(params: &ZoomParams, d0: f64) -> usize {
    if d0 <= params.s_min {
        return 0;
    }
    let expansions = params.e_max.saturating_sub(1) as i32;
    let peak = d0 * (1.0 + params.delta_out).powi(expansions);
    let shrinks = ((params.s_min / peak).ln() / (1.0 - params.delta_in).ln()).ceil().max(0.0);
    expansions as usize + shrinks as usize
}
