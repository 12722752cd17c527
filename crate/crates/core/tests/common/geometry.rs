//! Strategies and checks for the rectangle operations.

use groundzoom::geometry::{
    center_square, get_area, is_inside, zoom_in_asymmetric, zoom_in_symmetric, zoom_out, ImageBounds, Point, Rect,
};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub const TOL: f64 = 1e-9;

type Check = Result<(), TestCaseError>;

pub fn bounds() -> impl Strategy<Value = ImageBounds> {
    (1u32..=6016, 1u32..=3384).prop_map(|(w, h)| ImageBounds::new(w, h).unwrap())
}

/// A rectangle inside `b`.
pub fn rect_in(b: ImageBounds) -> impl Strategy<Value = Rect> {
    let (w, h) = (b.width as f64, b.height as f64);
    (0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64).prop_filter_map("degenerate", move |(a, b, c, d)| {
        let (x0, x1) = (a.min(b) * w, a.max(b) * w);
        let (y0, y1) = (c.min(d) * h, c.max(d) * h);
        Rect::new(x0, y0, x1, y1).ok()
    })
}

pub fn bounds_and_rect() -> impl Strategy<Value = (ImageBounds, Rect)> {
    bounds().prop_flat_map(|b| (Just(b), rect_in(b)))
}

pub fn rect_and_point() -> impl Strategy<Value = (Rect, Point)> {
    bounds().prop_flat_map(rect_in).prop_flat_map(|r| {
        let px = prop_oneof![Just(r.x_min), Just(r.x_max), Just((r.x_min + r.x_max) / 2.0), r.x_min..=r.x_max];
        let py = prop_oneof![Just(r.y_min), Just(r.y_max), Just((r.y_min + r.y_max) / 2.0), r.y_min..=r.y_max];
        (Just(r), px, py).prop_map(|(r, x, y)| (r, Point::new(x, y)))
    })
}

pub fn delta() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.10), Just(0.20), Just(0.30), 0.001..0.999f64]
}

/// Integer-cornered rectangles, so the center is an exact tie.
pub fn int_rect() -> impl Strategy<Value = Rect> {
    (0u32..5000, 0u32..3000, 1u32..3000, 1u32..3000)
        .prop_map(|(x0, y0, w, h)| Rect::new(x0 as f64, y0 as f64, (x0 + w) as f64, (y0 + h) as f64).unwrap())
}

pub fn square_request() -> impl Strategy<Value = (ImageBounds, Point, f64)> {
    (bounds(), -500.0..6500.0f64, -500.0..4000.0f64, 1.0..7000.0f64)
        .prop_map(|(b, x, y, side)| (b, Point::new(x, y), side))
}

/// Per-axis reference: the boundary farther from `p` moves `d * len` toward
/// it; on a tie the max boundary moves.
pub fn oracle_axis(lo: f64, hi: f64, p: f64, d: f64) -> (f64, f64) {
    let shift = d * (hi - lo);
    if p - lo > hi - p {
        (lo + shift, hi)
    } else {
        (lo, hi - shift)
    }
}

pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL * (1.0 + a.abs().max(b.abs()))
}

pub fn contains(outer: &Rect, inner: &Rect) -> bool {
    inner.x_min >= outer.x_min - TOL
        && inner.y_min >= outer.y_min - TOL
        && inner.x_max <= outer.x_max + TOL
        && inner.y_max <= outer.y_max + TOL
}

pub fn check_asymmetric(r: Rect, p: Point, d: f64) -> Check {
    let z = zoom_in_asymmetric(&r, p, d).unwrap();
    let (x0, x1) = oracle_axis(r.x_min, r.x_max, p.x, d);
    let (y0, y1) = oracle_axis(r.y_min, r.y_max, p.y, d);
    prop_assert!(close(z.x_min, x0) && close(z.x_max, x1) && close(z.y_min, y0) && close(z.y_max, y1), "{z:?}");
    prop_assert!(contains(&r, &z));
    if d <= 0.5 {
        prop_assert!(is_inside(p, &z));
    }
    prop_assert!(close(z.width() / r.width(), 1.0 - d));
    prop_assert!(close(z.height() / r.height(), 1.0 - d));
    prop_assert!(close(get_area(&z), (1.0 - d) * get_area(&r)));
    Ok(())
}

pub fn check_rejects_outside(r: Rect, dx: f64, d: f64) -> Check {
    let p = Point::new(r.x_max + dx, r.y_min);
    prop_assert!(zoom_in_asymmetric(&r, p, d).is_err());
    Ok(())
}

pub fn check_tie(r: Rect, d: f64) -> Check {
    let z = zoom_in_asymmetric(&r, r.center(), d).unwrap();
    prop_assert_eq!(z.x_min, r.x_min);
    prop_assert_eq!(z.y_min, r.y_min);
    prop_assert!(z.x_max < r.x_max && z.y_max < r.y_max);
    Ok(())
}

pub fn check_symmetric(r: Rect, d: f64) -> Check {
    let z = zoom_in_symmetric(&r, d).unwrap();
    let (cz, cr) = (z.center(), r.center());
    prop_assert!(close(cz.x, cr.x) && close(cz.y, cr.y));
    prop_assert!(contains(&r, &z));
    prop_assert!(close(z.width() * z.height() / (r.width() * r.height()), (1.0 - d) * (1.0 - d)));
    prop_assert!(close(z.x_min - r.x_min, d * r.width() / 2.0));
    Ok(())
}

pub fn check_zoom_out(b: ImageBounds, r: Rect, d: f64) -> Check {
    let z = zoom_out(&r, d, b).unwrap();
    prop_assert!(contains(&Rect::full(b), &z));
    prop_assert!(contains(&z, &r));
    let (gx, gy) = (d * r.width() / 2.0, d * r.height() / 2.0);
    prop_assert!(close(z.x_min, (r.x_min - gx).max(0.0)));
    prop_assert!(close(z.x_max, (r.x_max + gx).min(b.width as f64)));
    prop_assert!(close(z.y_min, (r.y_min - gy).max(0.0)));
    prop_assert!(close(z.y_max, (r.y_max + gy).min(b.height as f64)));
    prop_assert!(get_area(&z) <= (b.width.max(b.height)) as f64 + TOL);
    let unclamped =
        r.x_min - gx >= 0.0 && r.y_min - gy >= 0.0 && r.x_max + gx <= b.width as f64 && r.y_max + gy <= b.height as f64;
    if unclamped {
        prop_assert!(close(get_area(&z), (1.0 + d) * get_area(&r)));
    }
    Ok(())
}

pub fn check_center_square(b: ImageBounds, c: Point, side: f64) -> Check {
    let s = center_square(c, side, b).unwrap();
    let (w, h) = (b.width as f64, b.height as f64);
    prop_assert!(contains(&Rect::full(b), &s));
    prop_assert!(close(s.width(), side.min(w)));
    prop_assert!(close(s.height(), side.min(h)));
    // Reference: center, then shift the smallest amount that fits.
    let place =
        |c: f64, len: f64, extent: f64| if len >= extent { 0.0 } else { (c - len / 2.0).clamp(0.0, extent - len) };
    prop_assert!(close(s.x_min, place(c.x, side, w)));
    prop_assert!(close(s.y_min, place(c.y, side, h)));
    Ok(())
}

pub fn check_inclusive(r: Rect, p: Point, eps: f64) -> Check {
    prop_assert!(is_inside(p, &r));
    prop_assert!(is_inside(Point::new(r.x_max, r.y_max), &r));
    prop_assert!(!is_inside(Point::new(r.x_min - eps, p.y), &r));
    prop_assert!(!is_inside(Point::new(p.x, r.y_max + eps), &r));
    Ok(())
}
