//! Pixel and membership checks against brute-force reference code.

mod common;

use common::imaging::*;
use groundzoom::geometry::{Point, Rect};
use groundzoom::imaging::{crop, grid_rect, point_in_region, upscale_bicubic, Raster, TargetRegion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn polygon_membership_matches_rasterized_oracle() {
    let mut r = ChaCha8Rng::seed_from_u64(2024);
    let checked = polygon_membership_agrees(&mut r, 1000).unwrap();
    assert!(checked > 4_000_000);
}

#[test]
fn bbox_membership_is_inclusive() {
    let region = TargetRegion::Bbox(Rect::new(10.0, 10.0, 20.0, 30.0).unwrap());
    assert!(point_in_region(Point::new(20.0, 30.0), &region).unwrap());
    assert!(point_in_region(Point::new(10.0, 15.0), &region).unwrap());
    assert!(!point_in_region(Point::new(9.999, 15.0), &region).unwrap());
}

#[test]
fn bicubic_matches_naive_reference() {
    let mut r = ChaCha8Rng::seed_from_u64(7);
    assert!(bicubic_worst_diff(&mut r, 40) <= 1);
}

#[test]
fn bicubic_preserves_flat_images() {
    let img = Raster::filled(7, 5, [12, 200, 99]);
    let up = upscale_bicubic(&img, 3).unwrap();
    assert!(up.data().chunks(3).all(|p| p == [12, 200, 99]));
    assert!(upscale_bicubic(&img, 5).is_err());
    assert!(upscale_bicubic(&img, 0).is_err());
}

#[test]
fn crop_copies_the_grid_rect_exactly() {
    let mut r = ChaCha8Rng::seed_from_u64(3);
    let img = random_raster(&mut r, 50, 40);
    for _ in 0..500 {
        let (x0, y0) = (r.random_range(-10.0..45.0), r.random_range(-10.0..35.0));
        let rect = Rect::new(x0, y0, x0 + r.random_range(0.2..30.0), y0 + r.random_range(0.2..30.0)).unwrap();
        let Ok(g) = grid_rect(&rect, img.bounds()) else { continue };
        // Grid rect: floor of the min corner, ceil of the max corner, clipped.
        assert_eq!(g.x0, rect.x_min.floor().max(0.0) as u32);
        assert_eq!(g.y1, (rect.y_max.ceil() as u32).min(40));
        let c = crop(&img, &rect).unwrap();
        for y in 0..c.height() {
            for x in 0..c.width() {
                assert_eq!(c.pixel(x, y), img.pixel(g.x0 + x, g.y0 + y));
            }
        }
    }
}
