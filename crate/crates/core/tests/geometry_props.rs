//! Randomized checks of the rectangle operations against straightforward
//! re-implementations.

mod common;

use common::geometry::*;
use groundzoom::geometry::{
    center_square, get_area, zoom_in_asymmetric, zoom_in_symmetric, zoom_out, ImageBounds, Point, Rect,
};
use proptest::prelude::*;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 10_000, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn asymmetric_zoom_matches_reference((r, p) in rect_and_point(), d in delta()) {
        check_asymmetric(r, p, d)?;
    }

    #[test]
    fn asymmetric_zoom_rejects_outside_points((r, _) in rect_and_point(), dx in 0.001..500.0f64, d in delta()) {
        check_rejects_outside(r, dx, d)?;
    }

    #[test]
    fn asymmetric_tie_moves_max_boundary(r in int_rect(), d in delta()) {
        check_tie(r, d)?;
    }

    #[test]
    fn symmetric_zoom_keeps_center((r, _) in rect_and_point(), d in delta()) {
        check_symmetric(r, d)?;
    }

    #[test]
    fn zoom_out_clamps_to_image((b, r) in bounds_and_rect(), d in delta()) {
        check_zoom_out(b, r, d)?;
    }

    #[test]
    fn center_square_fits_and_translates((b, c, side) in square_request()) {
        check_center_square(b, c, side)?;
    }

    #[test]
    fn is_inside_is_boundary_inclusive((r, p) in rect_and_point(), eps in 1e-6..10.0f64) {
        check_inclusive(r, p, eps)?;
    }
}

#[test]
fn documented_examples() {
    let r = |a, b, c, d| Rect::new(a, b, c, d).unwrap();
    assert_eq!(get_area(&r(0.0, 0.0, 1920.0, 1080.0)), 1920.0);
    assert_eq!(get_area(&r(10.0, 20.0, 30.0, 520.0)), 500.0);
    assert_eq!(
        zoom_in_asymmetric(&r(0.0, 0.0, 2000.0, 1000.0), Point::new(1500.0, 250.0), 0.1).unwrap(),
        r(200.0, 0.0, 2000.0, 900.0)
    );
    assert_eq!(
        zoom_in_asymmetric(&r(0.0, 0.0, 100.0, 100.0), Point::new(50.0, 50.0), 0.1).unwrap(),
        r(0.0, 0.0, 90.0, 90.0)
    );
    assert_eq!(zoom_in_symmetric(&r(100.0, 100.0, 900.0, 900.0), 0.2).unwrap(), r(180.0, 180.0, 820.0, 820.0));
    let b = ImageBounds::new(1000, 1000).unwrap();
    assert_eq!(zoom_out(&r(0.0, 0.0, 500.0, 500.0), 0.05, b).unwrap(), r(0.0, 0.0, 512.5, 512.5));
    let b = ImageBounds::new(3840, 2160).unwrap();
    assert_eq!(center_square(Point::new(3500.0, 2100.0), 1000.0, b).unwrap(), r(2840.0, 1160.0, 3840.0, 2160.0));
}
