//! Raster crops, bicubic upscaling and ground-truth region membership.

use std::io::Cursor;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{is_inside, ImageBounds, Point, Rect};

#[derive(Debug, Error)]
pub enum ImagingError {
    #[error("crop rectangle does not intersect the {width}x{height} image")]
    EmptyCrop { width: u32, height: u32 },
    #[error("pixel buffer holds {actual} bytes, expected {expected}")]
    BufferSize { expected: usize, actual: usize },
    #[error("unsupported upscale factor {0}")]
    BadFactor(u32),
    #[error("polygon needs at least 3 vertices, got {0}")]
    DegeneratePolygon(usize),
    #[error("failed to read image {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: image::ImageError,
    },
    #[error("png codec: {0}")]
    Codec(#[from] image::ImageError),
}

/// RGB8 pixel buffer, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl Raster {
    pub fn from_rgb(width: u32, height: u32, data: Vec<u8>) -> Result<Self, ImagingError> {
        let expected = width as usize * height as usize * 3;
        if data.len() != expected || width == 0 || height == 0 {
            return Err(ImagingError::BufferSize { expected, actual: data.len() });
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Self {
        let data = rgb.iter().copied().cycle().take(width as usize * height as usize * 3).collect();
        Self { width, height, data }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn bounds(&self) -> ImageBounds {
        ImageBounds { width: self.width, height: self.height }
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn load_png(path: &Path) -> Result<Self, ImagingError> {
        let img =
            image::open(path).map_err(|source| ImagingError::Read { path: path.display().to_string(), source })?;
        let rgb = img.to_rgb8();
        let (w, h) = rgb.dimensions();
        Self::from_rgb(w, h, rgb.into_raw())
    }

    pub fn encode_png(&self) -> Result<Vec<u8>, ImagingError> {
        let mut out = Cursor::new(Vec::new());
        image::write_buffer_with_format(
            &mut out,
            &self.data,
            self.width,
            self.height,
            image::ExtendedColorType::Rgb8,
            image::ImageFormat::Png,
        )?;
        Ok(out.into_inner())
    }

    pub fn decode_png(bytes: &[u8]) -> Result<Self, ImagingError> {
        let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)?;
        let rgb = img.to_rgb8();
        let (w, h) = rgb.dimensions();
        Self::from_rgb(w, h, rgb.into_raw())
    }
}

/// Integer pixel rectangle `[x0, x1) x [y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridRect {
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
}

impl GridRect {
    pub fn width(&self) -> u32 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> u32 {
        self.y1 - self.y0
    }

    pub fn to_rect(self) -> Rect {
        Rect { x_min: self.x0 as f64, y_min: self.y0 as f64, x_max: self.x1 as f64, y_max: self.y1 as f64 }
    }
}

/// Rounds `r` outward onto the pixel grid and intersects it with the image.
pub fn grid_rect(r: &Rect, bounds: ImageBounds) -> Result<GridRect, ImagingError> {
    let empty = || ImagingError::EmptyCrop { width: bounds.width, height: bounds.height };
    let (w, h) = (bounds.width as f64, bounds.height as f64);
    let x0 = r.x_min.floor().max(0.0);
    let y0 = r.y_min.floor().max(0.0);
    let x1 = r.x_max.ceil().min(w);
    let y1 = r.y_max.ceil().min(h);
    if !(x0 < x1 && y0 < y1) {
        return Err(empty());
    }
    Ok(GridRect { x0: x0 as u32, y0: y0 as u32, x1: x1 as u32, y1: y1 as u32 })
}

pub fn crop(img: &Raster, r: &Rect) -> Result<Raster, ImagingError> {
    let g = grid_rect(r, img.bounds())?;
    Ok(crop_grid(img, g))
}

pub fn crop_grid(img: &Raster, g: GridRect) -> Raster {
    let row_bytes = g.width() as usize * 3;
    let mut data = Vec::with_capacity(row_bytes * g.height() as usize);
    for y in g.y0..g.y1 {
        let start = (y as usize * img.width as usize + g.x0 as usize) * 3;
        data.extend_from_slice(&img.data[start..start + row_bytes]);
    }
    Raster { width: g.width(), height: g.height(), data }
}

/// Catmull-Rom cubic (a = -0.5).
fn catmull_rom(t: f64) -> f64 {
    const A: f64 = -0.5;
    let t = t.abs();
    if t <= 1.0 {
        ((A + 2.0) * t - (A + 3.0)) * t * t + 1.0
    } else if t < 2.0 {
        ((A * t - 5.0 * A) * t + 8.0 * A) * t - 4.0 * A
    } else {
        0.0
    }
}

/// Per output coordinate: the four clamped source indices and their weights.
fn axis_taps(src_len: u32, factor: u32) -> Vec<([usize; 4], [f64; 4])> {
    let last = src_len as i64 - 1;
    (0..src_len * factor)
        .map(|o| {
            let s = (o as f64 + 0.5) / factor as f64 - 0.5;
            let base = s.floor();
            let frac = s - base;
            let mut idx = [0usize; 4];
            let mut w = [0.0; 4];
            for k in 0..4 {
                let off = k as i64 - 1;
                idx[k] = (base as i64 + off).clamp(0, last) as usize;
                w[k] = catmull_rom(frac - off as f64);
            }
            (idx, w)
        })
        .collect()
}

/// Bicubic (Catmull-Rom) upscale by an integer factor in `1..=4`.
///
/// Pixel centers map as `src = (dst + 0.5) / factor - 0.5`, edges replicate.
pub fn upscale_bicubic(img: &Raster, factor: u32) -> Result<Raster, ImagingError> {
    if !(1..=4).contains(&factor) {
        return Err(ImagingError::BadFactor(factor));
    }
    if factor == 1 {
        return Ok(img.clone());
    }
    let (w, h) = (img.width as usize, img.height as usize);
    let (ow, oh) = (w * factor as usize, h * factor as usize);
    let xt = axis_taps(img.width, factor);
    let yt = axis_taps(img.height, factor);

    // Horizontal pass into f64 rows, then vertical pass with rounding.
    let mut horiz = vec![0.0f64; ow * h * 3];
    for y in 0..h {
        let row = &img.data[y * w * 3..(y + 1) * w * 3];
        let out = &mut horiz[y * ow * 3..(y + 1) * ow * 3];
        for (ox, (idx, wt)) in xt.iter().enumerate() {
            for c in 0..3 {
                out[ox * 3 + c] = (0..4).map(|k| wt[k] * row[idx[k] * 3 + c] as f64).sum();
            }
        }
    }
    let mut data = vec![0u8; ow * oh * 3];
    for (oy, (idx, wt)) in yt.iter().enumerate() {
        let out = &mut data[oy * ow * 3..(oy + 1) * ow * 3];
        for i in 0..ow * 3 {
            let v: f64 = (0..4).map(|k| wt[k] * horiz[idx[k] * ow * 3 + i]).sum();
            out[i] = v.round().clamp(0.0, 255.0) as u8;
        }
    }
    Ok(Raster { width: ow as u32, height: oh as u32, data })
}

/// Annotated ground-truth region of a target element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetRegion {
    Bbox(Rect),
    Polygon(#[serde(with = "point_pairs")] Vec<Point>),
}

/// Polygons are stored as `[[x, y], ...]`.
mod point_pairs {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::geometry::Point;

    pub fn serialize<S: Serializer>(v: &[Point], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|p| [p.x, p.y]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Point>, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(pairs.into_iter().map(|[x, y]| Point::new(x, y)).collect())
    }
}

impl TargetRegion {
    pub fn validate(&self) -> Result<(), ImagingError> {
        match self {
            TargetRegion::Bbox(_) => Ok(()),
            TargetRegion::Polygon(v) if v.len() < 3 => Err(ImagingError::DegeneratePolygon(v.len())),
            TargetRegion::Polygon(_) => Ok(()),
        }
    }

    /// Bbox center, or the area centroid of the polygon (vertex mean when
    /// the polygon has zero signed area).
    pub fn center(&self) -> Point {
        match self {
            TargetRegion::Bbox(r) => r.center(),
            TargetRegion::Polygon(v) => polygon_centroid(v),
        }
    }

    pub fn bounding_box(&self) -> Rect {
        match self {
            TargetRegion::Bbox(r) => *r,
            TargetRegion::Polygon(v) => {
                let fold = |f: fn(f64, f64) -> f64, init: f64, g: fn(&Point) -> f64| v.iter().map(g).fold(init, f);
                Rect {
                    x_min: fold(f64::min, f64::INFINITY, |p| p.x),
                    y_min: fold(f64::min, f64::INFINITY, |p| p.y),
                    x_max: fold(f64::max, f64::NEG_INFINITY, |p| p.x),
                    y_max: fold(f64::max, f64::NEG_INFINITY, |p| p.y),
                }
            }
        }
    }
}

fn polygon_centroid(v: &[Point]) -> Point {
    let n = v.len();
    let (mut a2, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (p, q) = (v[i], v[(i + 1) % n]);
        let cross = p.x * q.y - q.x * p.y;
        a2 += cross;
        cx += (p.x + q.x) * cross;
        cy += (p.y + q.y) * cross;
    }
    if a2.abs() < 1e-12 {
        return Point::mean(v).unwrap_or(Point::new(0.0, 0.0));
    }
    Point::new(cx / (3.0 * a2), cy / (3.0 * a2))
}

fn on_segment(p: Point, a: Point, b: Point) -> bool {
    let cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
    let scale = (b.x - a.x).abs().max((b.y - a.y).abs()).max(1.0);
    if cross.abs() > 1e-9 * scale {
        return false;
    }
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Bbox: inclusive bounds. Polygon: even-odd rule, points on an edge count
/// as inside.
pub fn point_in_region(p: Point, region: &TargetRegion) -> Result<bool, ImagingError> {
    region.validate()?;
    match region {
        TargetRegion::Bbox(r) => Ok(is_inside(p, r)),
        TargetRegion::Polygon(v) => {
            let n = v.len();
            let mut inside = false;
            for i in 0..n {
                let (a, b) = (v[i], v[(i + 1) % n]);
                if on_segment(p, a, b) {
                    return Ok(true);
                }
                if (a.y > p.y) != (b.y > p.y) {
                    let x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                    if p.x < x_cross {
                        inside = !inside;
                    }
                }
            }
            Ok(inside)
        }
    }
}
