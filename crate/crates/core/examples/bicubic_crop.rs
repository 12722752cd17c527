//! Cropping on the pixel grid, bicubic upscaling and mapping a point in the
//! upscaled crop back to screen coordinates.

use groundzoom::geometry::{map_crop_to_global, Point, Rect};
use groundzoom::imaging::{crop_grid, grid_rect, upscale_bicubic, Raster};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // A horizontal gradient with a dark 4x4 marker at (100, 60).
    let (w, h) = (320u32, 200u32);
    let mut data = Vec::with_capacity((w * h * 3) as usize);
    for y in 0..h {
        for x in 0..w {
            let v = if (100..104).contains(&x) && (60..64).contains(&y) { 0 } else { (x * 255 / (w - 1)) as u8 };
            data.extend([v, v, 255 - v]);
        }
    }
    let img = Raster::from_rgb(w, h, data)?;

    let roi = Rect::new(80.4, 40.6, 140.2, 90.9)?;
    let grid = grid_rect(&roi, img.bounds())?;
    let crop = crop_grid(&img, grid);
    let big = upscale_bicubic(&crop, 3)?;
    println!("roi {roi:?} -> grid {grid:?}");
    println!("crop {}x{} -> upscaled {}x{}", crop.width(), crop.height(), big.width(), big.height());

    // The marker's top-left corner as a model would report it in the upscaled crop.
    let local = Point::new(((100 - grid.x0) * 3) as f64, ((60 - grid.y0) * 3) as f64);
    let global = map_crop_to_global(local, &grid.to_rect(), 3.0);
    println!("local {local:?} -> global {global:?}");
    println!("pixel there: {:?}", img.pixel(global.x as u32, global.y as u32));

    let out = std::env::temp_dir().join("groundzoom-upscaled.png");
    std::fs::write(&out, big.encode_png()?)?;
    println!("wrote {}", out.display());
    Ok(())
}
