//! Brute-force references for polygon membership and bicubic scaling.

use groundzoom::geometry::Point;
use groundzoom::imaging::{point_in_region, upscale_bicubic, Raster, TargetRegion};
use rand::Rng;

/// Winding number by summing signed angles; edge points count as inside.
pub fn winding_oracle(p: Point, poly: &[Point]) -> bool {
    let n = poly.len();
    let mut total = 0.0f64;
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        let (ax, ay, bx, by) = (a.x - p.x, a.y - p.y, b.x - p.x, b.y - p.y);
        let cross = ax * by - ay * bx;
        let dot = ax * bx + ay * by;
        let len = ((b.x - a.x).powi(2) + (b.y - a.y).powi(2)).sqrt();
        if cross.abs() <= 1e-9 * len.max(1.0) && dot <= 0.0 {
            return true;
        }
        total += cross.atan2(dot);
    }
    (total / std::f64::consts::TAU).round() != 0.0
}

/// Simple polygon: vertices at sorted random angles around a center.
pub fn star_polygon(r: &mut impl Rng) -> Vec<Point> {
    let n = r.random_range(3..=12);
    let (cx, cy) = (r.random_range(20.0..44.0), r.random_range(20.0..44.0));
    let mut angles: Vec<f64> = (0..n).map(|_| r.random_range(0.0..std::f64::consts::TAU)).collect();
    angles.sort_by(f64::total_cmp);
    angles.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
    if angles.len() < 3 {
        return vec![Point::new(cx - 10.0, cy - 10.0), Point::new(cx + 10.0, cy - 10.0), Point::new(cx, cy + 10.0)];
    }
    angles
        .into_iter()
        .map(|t| {
            let rad = r.random_range(3.0..20.0);
            Point::new(cx + rad * t.cos(), cy + rad * t.sin())
        })
        .collect()
}

/// Checks `point_in_region` against the winding oracle on `n_polygons`
/// random polygons, each probed on a half-pixel lattice, random points,
/// vertices and edge midpoints. Returns the number of points checked.
pub fn polygon_membership_agrees(r: &mut impl Rng, n_polygons: usize) -> Result<usize, String> {
    let mut checked = 0usize;
    for _ in 0..n_polygons {
        let poly = star_polygon(r);
        let region = TargetRegion::Polygon(poly.clone());
        let mut points: Vec<Point> =
            (0..64).flat_map(|y| (0..64).map(move |x| Point::new(x as f64 + 0.5, y as f64 + 0.5))).collect();
        points.extend((0..200).map(|_| Point::new(r.random_range(0.0..64.0), r.random_range(0.0..64.0))));
        points.extend(poly.iter().copied());
        points.extend(poly.windows(2).map(|w| Point::new((w[0].x + w[1].x) / 2.0, (w[0].y + w[1].y) / 2.0)));
        for p in points {
            let got = point_in_region(p, &region).map_err(|e| e.to_string())?;
            let want = winding_oracle(p, &poly);
            if got != want {
                // Only points within float noise of an edge may disagree.
                let near_edge = poly.iter().zip(poly.iter().cycle().skip(1)).any(|(a, b)| seg_dist(p, *a, *b) < 1e-7);
                if !near_edge {
                    return Err(format!("point {p:?} polygon {poly:?}: got {got}, oracle {want}"));
                }
            }
            checked += 1;
        }
    }
    Ok(checked)
}

pub fn seg_dist(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
    ((a.x + t * dx - p.x).powi(2) + (a.y + t * dy - p.y).powi(2)).sqrt()
}

pub fn random_raster(r: &mut impl Rng, w: u32, h: u32) -> Raster {
    let data = (0..w * h * 3).map(|_| r.random::<u8>()).collect();
    Raster::from_rgb(w, h, data).unwrap()
}

/// Catmull-Rom weight, written out from the kernel definition.
fn kernel(x: f64) -> f64 {
    let x = x.abs();
    if x < 1.0 {
        1.5 * x.powi(3) - 2.5 * x.powi(2) + 1.0
    } else if x < 2.0 {
        -0.5 * x.powi(3) + 2.5 * x.powi(2) - 4.0 * x + 2.0
    } else {
        0.0
    }
}

/// Direct 4x4 convolution per output pixel with replicated edges.
pub fn naive_bicubic(img: &Raster, f: u32) -> Vec<u8> {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let mut out = Vec::new();
    for oy in 0..h * f as i64 {
        for ox in 0..w * f as i64 {
            let sx = (ox as f64 + 0.5) / f as f64 - 0.5;
            let sy = (oy as f64 + 0.5) / f as f64 - 0.5;
            let (bx, by) = (sx.floor() as i64, sy.floor() as i64);
            for c in 0..3 {
                let mut acc = 0.0;
                for j in -1..=2 {
                    for i in -1..=2 {
                        let px = (bx + i).clamp(0, w - 1) as u32;
                        let py = (by + j).clamp(0, h - 1) as u32;
                        acc +=
                            kernel(sx - (bx + i) as f64) * kernel(sy - (by + j) as f64) * img.pixel(px, py)[c] as f64;
                    }
                }
                out.push(acc.round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    out
}

/// Largest intensity difference between `upscale_bicubic` and the naive
/// reference over `cases` random images and factors 1 to 4.
pub fn bicubic_worst_diff(r: &mut impl Rng, cases: usize) -> i32 {
    let mut worst = 0;
    for _ in 0..cases {
        let (w, h) = (r.random_range(1..24), r.random_range(1..24));
        let img = random_raster(r, w, h);
        for f in 1..=4 {
            let fast = upscale_bicubic(&img, f).unwrap();
            assert_eq!((fast.width(), fast.height()), (w * f, h * f));
            let slow = naive_bicubic(&img, f);
            let d = fast.data().iter().zip(&slow).map(|(a, b)| (*a as i32 - *b as i32).abs()).max().unwrap();
            worst = worst.max(d);
        }
    }
    worst
}
