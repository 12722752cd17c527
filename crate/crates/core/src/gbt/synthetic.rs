//! Synthetic benchmark tasks for desk-scale experiments.
//!
//! Screen sizes are drawn from a table of real desktop resolutions, weighted
//! toward the common ones. Targets are small widgets placed uniformly at
//! random, so a good share of them sit near screen edges.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::dataset::{GroundingTask, TaskMetadata};
use crate::geometry::{Point, Rect};
use crate::imaging::{Raster, TargetRegion};
use crate::rng;

/// `(width, height, weight)`.
pub const RESOLUTIONS: &[(u32, u32, u32)] = &[
    (1920, 1080, 19),
    (2160, 1440, 99),
    (2560, 1440, 514),
    (2560, 1600, 7),
    (2560, 1664, 48),
    (2880, 1800, 82),
    (2992, 1870, 8),
    (3456, 2160, 50),
    (3456, 2234, 161),
    (3840, 1080, 181),
    (5120, 1440, 61),
    (3840, 2160, 270),
    (5120, 2880, 70),
    (6016, 3384, 11),
];

const APPLICATIONS: &[(&str, &str)] = &[
    ("vscode", "dev"),
    ("pycharm", "dev"),
    ("photoshop", "creative"),
    ("blender", "creative"),
    ("excel", "office"),
    ("word", "office"),
    ("autocad", "cad"),
    ("solidworks", "cad"),
    ("matlab", "scientific"),
    ("terminal", "os"),
];

const VERBS: &[&str] = &["Click", "Open", "Select", "Toggle", "Press"];
const WIDGETS: &[&str] =
    &["save button", "layer panel", "zoom control", "export menu", "settings icon", "search field"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticOptions {
    pub n_tasks: usize,
    pub seed: u64,
    /// Share of tasks marked infeasible (no target).
    pub infeasible_fraction: f64,
    /// Share of feasible targets given as polygons instead of boxes.
    pub polygon_fraction: f64,
    /// Target width range in pixels.
    pub target_width: (f64, f64),
    /// Target height range in pixels.
    pub target_height: (f64, f64),
}

impl Default for SyntheticOptions {
    fn default() -> Self {
        Self {
            n_tasks: 500,
            seed: 0,
            infeasible_fraction: 0.0,
            polygon_fraction: 0.2,
            target_width: (16.0, 96.0),
            target_height: (12.0, 48.0),
        }
    }
}

pub fn generate_tasks(opts: &SyntheticOptions) -> Vec<GroundingTask> {
    let weights = WeightedIndex::new(RESOLUTIONS.iter().map(|r| r.2)).expect("positive weights");
    (0..opts.n_tasks)
        .map(|i| {
            let id = format!("syn-{i:05}");
            let mut r = rng::stream(opts.seed, &id, "synthetic", 0);
            let (w, h, _) = RESOLUTIONS[weights.sample(&mut r)];
            let (app, group) = APPLICATIONS[r.random_range(0..APPLICATIONS.len())];
            let widget = WIDGETS[r.random_range(0..WIDGETS.len())];
            let verb = VERBS[r.random_range(0..VERBS.len())];
            let feasible = !r.random_bool(opts.infeasible_fraction);
            let target = feasible.then(|| random_target(&mut r, w, h, opts));
            let instruction = if feasible {
                format!("{verb} the {widget} in {app}")
            } else {
                format!("{verb} the {widget} in {app} (not present on this screen)")
            };
            GroundingTask {
                id,
                image_path: None,
                instruction,
                target,
                feasible,
                metadata: TaskMetadata { application: app.into(), resolution: (w, h), group: group.into() },
            }
        })
        .collect()
}

fn random_target(r: &mut impl Rng, w: u32, h: u32, opts: &SyntheticOptions) -> TargetRegion {
    let tw = r.random_range(opts.target_width.0..=opts.target_width.1).min(w as f64);
    let th = r.random_range(opts.target_height.0..=opts.target_height.1).min(h as f64);
    let x0 = r.random_range(0.0..=(w as f64 - tw));
    let y0 = r.random_range(0.0..=(h as f64 - th));
    let bbox = Rect::new(x0, y0, x0 + tw, y0 + th).expect("positive size");
    if r.random_bool(opts.polygon_fraction) {
        // A box with one corner cut off, as a polygon annotation.
        let cut = tw.min(th) / 3.0;
        TargetRegion::Polygon(vec![
            Point::new(x0, y0),
            Point::new(x0 + tw - cut, y0),
            Point::new(x0 + tw, y0 + cut),
            Point::new(x0 + tw, y0 + th),
            Point::new(x0, y0 + th),
        ])
    } else {
        TargetRegion::Bbox(bbox)
    }
}

/// Draws a flat mock screenshot: light background, grey decoy widgets and
/// the target's bounding box in a saturated color.
pub fn render_screenshot(task: &GroundingTask, n_decoys: usize, seed: u64) -> Raster {
    let (w, h) = task.metadata.resolution;
    let mut data = vec![236u8; w as usize * h as usize * 3];
    let mut fill = |rect: &Rect, rgb: [u8; 3]| {
        let x0 = rect.x_min.floor().max(0.0) as usize;
        let y0 = rect.y_min.floor().max(0.0) as usize;
        let x1 = (rect.x_max.ceil() as usize).min(w as usize);
        let y1 = (rect.y_max.ceil() as usize).min(h as usize);
        for y in y0..y1 {
            for x in x0..x1 {
                let i = (y * w as usize + x) * 3;
                data[i..i + 3].copy_from_slice(&rgb);
            }
        }
    };
    let mut r = rng::stream(seed, &task.id, "screenshot", 0);
    for _ in 0..n_decoys {
        let x = r.random_range(0.0..(w as f64 - 40.0).max(1.0));
        let y = r.random_range(0.0..(h as f64 - 24.0).max(1.0));
        fill(&Rect::new(x, y, x + 40.0, y + 24.0).expect("positive size"), [150, 150, 150]);
    }
    if let Some(t) = &task.target {
        fill(&t.bounding_box(), [20, 110, 230]);
    }
    Raster::from_rgb(w, h, data).expect("buffer sized from resolution")
}
