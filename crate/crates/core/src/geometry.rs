//! Rectangle and point arithmetic for ROI search.
//!
//! All rectangles live in the global (full screenshot) pixel frame and are
//! real-valued. Rounding to the pixel grid happens only when a raster is
//! actually cropped, see [`crate::imaging::crop`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("invalid rectangle [{0}, {1}, {2}, {3}]")]
    InvalidRect(f64, f64, f64, f64),
    #[error("point ({x}, {y}) is not inside the ROI")]
    PointOutside { x: f64, y: f64 },
    #[error("zoom factor {0} must lie in (0, 1)")]
    InvalidFactor(f64),
    #[error("square side must be positive, got {0}")]
    InvalidSide(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Arithmetic mean of a non-empty slice of points.
    pub fn mean(points: &[Point]) -> Option<Point> {
        if points.is_empty() {
            return None;
        }
        let n = points.len() as f64;
        let (sx, sy) = points.iter().fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
        Some(Point::new(sx / n, sy / n))
    }
}

/// Axis-aligned rectangle `[x_min, y_min, x_max, y_max]`.
///
/// Serialized as a four-element array, the same layout used by the
/// dataset and trace files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct Rect {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl TryFrom<[f64; 4]> for Rect {
    type Error = GeometryError;

    fn try_from(v: [f64; 4]) -> Result<Self, Self::Error> {
        Rect::new(v[0], v[1], v[2], v[3])
    }
}

impl From<Rect> for [f64; 4] {
    fn from(r: Rect) -> Self {
        [r.x_min, r.y_min, r.x_max, r.y_max]
    }
}

impl Rect {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self, GeometryError> {
        let finite = [x_min, y_min, x_max, y_max].iter().all(|v| v.is_finite());
        if !finite || x_min >= x_max || y_min >= y_max {
            return Err(GeometryError::InvalidRect(x_min, y_min, x_max, y_max));
        }
        Ok(Self { x_min, y_min, x_max, y_max })
    }

    pub fn full(bounds: ImageBounds) -> Self {
        Self { x_min: 0.0, y_min: 0.0, x_max: bounds.width as f64, y_max: bounds.height as f64 }
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn center(&self) -> Point {
        Point::new((self.x_min + self.x_max) / 2.0, (self.y_min + self.y_max) / 2.0)
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        other.x_min >= self.x_min && other.y_min >= self.y_min && other.x_max <= self.x_max && other.y_max <= self.y_max
    }

    pub fn intersects(&self, other: &Rect) -> bool {
        self.x_min <= other.x_max && other.x_min <= self.x_max && self.y_min <= other.y_max && other.y_min <= self.y_max
    }

    pub fn intersection(&self, other: &Rect) -> Option<Rect> {
        Rect::new(
            self.x_min.max(other.x_min),
            self.y_min.max(other.y_min),
            self.x_max.min(other.x_max),
            self.y_max.min(other.y_max),
        )
        .ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ImageBounds {
    pub width: u32,
    pub height: u32,
}

impl ImageBounds {
    pub fn new(width: u32, height: u32) -> Option<Self> {
        (width > 0 && height > 0).then_some(Self { width, height })
    }

    pub fn total_pixels(&self) -> u64 {
        self.width as u64 * self.height as u64
    }

    pub fn clamp_point(&self, p: Point) -> Point {
        Point::new(p.x.clamp(0.0, self.width as f64), p.y.clamp(0.0, self.height as f64))
    }
}

/// Size proxy: the longer side of the rectangle.
pub fn get_area(r: &Rect) -> f64 {
    r.width().max(r.height())
}

/// Boundary-inclusive membership.
pub fn is_inside(p: Point, r: &Rect) -> bool {
    r.x_min <= p.x && p.x <= r.x_max && r.y_min <= p.y && p.y <= r.y_max
}

fn check_factor(delta: f64) -> Result<(), GeometryError> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(GeometryError::InvalidFactor(delta))
    }
}

/// Moves the boundary farther from `p` toward it by `delta * len`, on each
/// axis. Ties move the max-coordinate boundary.
fn shrink_axis_toward(lo: f64, hi: f64, p: f64, delta: f64) -> (f64, f64) {
    let cut = delta * (hi - lo);
    if p - lo > hi - p {
        (lo + cut, hi)
    } else {
        (lo, hi - cut)
    }
}

/// Asymmetric zoom-in toward a prediction lying inside the ROI.
pub fn zoom_in_asymmetric(r: &Rect, p: Point, delta_in: f64) -> Result<Rect, GeometryError> {
    check_factor(delta_in)?;
    if !p.is_finite() || !is_inside(p, r) {
        return Err(GeometryError::PointOutside { x: p.x, y: p.y });
    }
    let (x_min, x_max) = shrink_axis_toward(r.x_min, r.x_max, p.x, delta_in);
    let (y_min, y_max) = shrink_axis_toward(r.y_min, r.y_max, p.y, delta_in);
    Rect::new(x_min, y_min, x_max, y_max)
}

/// Symmetric zoom-in about the ROI center; each side gives up `delta_in / 2`
/// of its axis length.
pub fn zoom_in_symmetric(r: &Rect, delta_in: f64) -> Result<Rect, GeometryError> {
    check_factor(delta_in)?;
    let dx = delta_in * r.width() / 2.0;
    let dy = delta_in * r.height() / 2.0;
    Rect::new(r.x_min + dx, r.y_min + dy, r.x_max - dx, r.y_max - dy)
}

/// Uniform expansion by `delta_out` per axis, each boundary clamped to the
/// image.
pub fn zoom_out(r: &Rect, delta_out: f64, bounds: ImageBounds) -> Result<Rect, GeometryError> {
    check_factor(delta_out)?;
    let dx = delta_out * r.width() / 2.0;
    let dy = delta_out * r.height() / 2.0;
    let (w, h) = (bounds.width as f64, bounds.height as f64);
    Rect::new((r.x_min - dx).max(0.0), (r.y_min - dy).max(0.0), (r.x_max + dx).min(w), (r.y_max + dy).min(h))
}

fn place_axis(center: f64, side: f64, extent: f64) -> (f64, f64) {
    if side >= extent {
        return (0.0, extent);
    }
    let lo = (center - side / 2.0).clamp(0.0, extent - side);
    (lo, lo + side)
}

/// `side`-sized square centered on `c`, translated (never shrunk) to fit
/// the image. An axis shorter than `side` spans the full image.
pub fn center_square(c: Point, side: f64, bounds: ImageBounds) -> Result<Rect, GeometryError> {
    center_rect(c, side, side, bounds)
}

/// `width` x `height` rectangle centered on `c`, placed like
/// [`center_square`].
pub fn center_rect(c: Point, width: f64, height: f64, bounds: ImageBounds) -> Result<Rect, GeometryError> {
    for side in [width, height] {
        if !(side.is_finite() && side > 0.0) {
            return Err(GeometryError::InvalidSide(side));
        }
    }
    let (x_min, x_max) = place_axis(c.x, width, bounds.width as f64);
    let (y_min, y_max) = place_axis(c.y, height, bounds.height as f64);
    Rect::new(x_min, y_min, x_max, y_max)
}

/// Maps a point in the (possibly upscaled) crop frame back to the full
/// screenshot: `crop.min + local / scale`.
pub fn map_crop_to_global(local: Point, crop: &Rect, scale: f64) -> Point {
    Point::new(crop.x_min + local.x / scale, crop.y_min + local.y / scale)
}
