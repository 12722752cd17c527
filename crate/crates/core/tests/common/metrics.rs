//! Random result sets and a brute-force recount of the aggregate metrics.

use std::collections::BTreeMap;

use groundzoom::gbt::{composite_score, CoreMetrics, Membership, MetricsReport, ResolutionCluster, TaskOutcome};
use groundzoom::geometry::{Point, Rect};
use groundzoom::imaging::TargetRegion;
use rand::Rng;

pub const RESOLUTIONS: [(u32, u32, ResolutionCluster); 14] = [
    (1920, 1080, ResolutionCluster::Standard),
    (2160, 1440, ResolutionCluster::Standard),
    (2560, 1440, ResolutionCluster::Standard),
    (2560, 1600, ResolutionCluster::Standard),
    (2560, 1664, ResolutionCluster::Standard),
    (2880, 1800, ResolutionCluster::HighRes),
    (2992, 1870, ResolutionCluster::HighRes),
    (3456, 2160, ResolutionCluster::HighRes),
    (3456, 2234, ResolutionCluster::HighRes),
    (3840, 1080, ResolutionCluster::UltraWide),
    (5120, 1440, ResolutionCluster::UltraWide),
    (3840, 2160, ResolutionCluster::Extreme),
    (5120, 2880, ResolutionCluster::Extreme),
    (6016, 3384, ResolutionCluster::Extreme),
];

/// Centroid by fanning triangles from the first vertex.
pub fn centroid(region: &TargetRegion) -> Point {
    match region {
        TargetRegion::Bbox(r) => Point::new((r.x_min + r.x_max) / 2.0, (r.y_min + r.y_max) / 2.0),
        TargetRegion::Polygon(v) => {
            let (mut area, mut sx, mut sy) = (0.0, 0.0, 0.0);
            for i in 1..v.len() - 1 {
                let (a, b, c) = (v[0], v[i], v[i + 1]);
                let t = ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y)) / 2.0;
                area += t;
                sx += t * (a.x + b.x + c.x) / 3.0;
                sy += t * (a.y + b.y + c.y) / 3.0;
            }
            Point::new(sx / area, sy / area)
        }
    }
}

pub fn random_outcome(r: &mut impl Rng, i: usize) -> TaskOutcome {
    let (w, h, _) = RESOLUTIONS[r.random_range(0..RESOLUTIONS.len())];
    let feasible = r.random_bool(0.8);
    let target = (feasible || r.random_bool(0.3)).then(|| {
        let (x, y) = (r.random_range(0.0..w as f64 - 100.0), r.random_range(0.0..h as f64 - 60.0));
        let (tw, th) = (r.random_range(5.0..100.0), r.random_range(5.0..60.0));
        if r.random_bool(0.5) {
            TargetRegion::Bbox(Rect::new(x, y, x + tw, y + th).unwrap())
        } else {
            TargetRegion::Polygon(vec![
                Point::new(x, y),
                Point::new(x + tw, y + th * 0.2),
                Point::new(x + tw * 0.8, y + th),
                Point::new(x + tw * 0.1, y + th * 0.7),
            ])
        }
    });
    let errored = r.random_bool(0.05);
    let refused = r.random_bool(if feasible { 0.05 } else { 0.6 });
    let ran = !refused && !(errored && r.random_bool(0.5));
    let final_roi = ran.then(|| {
        let side = r.random_range(200.0..1500.0);
        let (x, y) = (r.random_range(0.0..w as f64 - 100.0), r.random_range(0.0..h as f64 - 100.0));
        Rect::new(x, y, (x + side).min(w as f64), (y + side).min(h as f64)).unwrap()
    });
    let final_point = final_roi.map(|_| Point::new(r.random_range(0.0..w as f64), r.random_range(0.0..h as f64)));
    TaskOutcome {
        task_id: format!("t{i}"),
        feasible,
        target,
        resolution: (w, h),
        group: ["dev", "cad", "office", ""][r.random_range(0..4)].into(),
        refused,
        errored,
        final_roi,
        final_point,
        steps: final_roi.map(|_| r.random_range(1..40)),
        correct: final_point.map(|_| r.random_bool(0.6)),
    }
}

pub fn frac(num: usize, den: usize) -> Option<f64> {
    if den == 0 {
        None
    } else {
        Some(num as f64 / den as f64)
    }
}

pub fn brute_force(outcomes: &[TaskOutcome], membership: Membership) -> CoreMetrics {
    let mut errors = 0;
    let (mut eligible, mut contained, mut contained_correct) = (0, 0, 0);
    let (mut feasible_ok, mut top1_hits) = (0, 0);
    let (mut step_sum, mut step_n) = (0usize, 0usize);
    let (mut infeasible_n, mut infeasible_refused, mut feasible_n, mut feasible_refused) = (0, 0, 0, 0);
    for o in outcomes {
        if o.errored {
            errors += 1;
            continue;
        }
        if let Some(s) = o.steps {
            step_sum += s;
            step_n += 1;
        }
        if o.feasible {
            feasible_n += 1;
            feasible_ok += 1;
            if o.refused {
                feasible_refused += 1;
            } else if o.correct == Some(true) {
                top1_hits += 1;
            }
        } else {
            infeasible_n += 1;
            if o.refused {
                infeasible_refused += 1;
            }
        }
        if !o.feasible || o.refused {
            continue;
        }
        let (Some(roi), Some(target)) = (o.final_roi, o.target.as_ref()) else { continue };
        eligible += 1;
        let inside = match membership {
            Membership::Center => {
                let c = centroid(target);
                roi.x_min <= c.x && c.x <= roi.x_max && roi.y_min <= c.y && c.y <= roi.y_max
            }
            Membership::AnyOverlap => {
                let xs: Vec<f64>;
                let ys: Vec<f64>;
                match target {
                    TargetRegion::Bbox(b) => {
                        xs = vec![b.x_min, b.x_max];
                        ys = vec![b.y_min, b.y_max];
                    }
                    TargetRegion::Polygon(v) => {
                        xs = v.iter().map(|p| p.x).collect();
                        ys = v.iter().map(|p| p.y).collect();
                    }
                }
                let lo = |v: &[f64]| v.iter().cloned().fold(f64::MAX, f64::min);
                let hi = |v: &[f64]| v.iter().cloned().fold(f64::MIN, f64::max);
                !(hi(&xs) < roi.x_min || lo(&xs) > roi.x_max || hi(&ys) < roi.y_min || lo(&ys) > roi.y_max)
            }
        };
        if inside {
            contained += 1;
            if o.correct == Some(true) {
                contained_correct += 1;
            }
        }
    }
    let containment = frac(contained, eligible);
    let conditional = frac(contained_correct, contained);
    CoreMetrics {
        n_tasks: outcomes.len(),
        n_errors: errors,
        n_contained: contained,
        containment_rate: containment,
        conditional_accuracy: conditional,
        composite_score: containment.zip(conditional).map(|(a, b)| a * b),
        top1_accuracy: frac(top1_hits, feasible_ok),
        avg_steps: (step_n > 0).then(|| step_sum as f64 / step_n as f64),
        pass_rate: if membership == Membership::Center { containment } else { None },
        refusal_accuracy: frac(infeasible_refused, infeasible_n),
        false_positive_rate: frac(feasible_refused, feasible_n),
    }
}

/// Compares every aggregate on `n_sets` random result sets with the recount,
/// including the per-group and per-cluster breakdowns and the composite
/// identity.
pub fn check_random_sets(r: &mut impl Rng, n_sets: usize) -> Result<(), String> {
    for set in 0..n_sets {
        let n = r.random_range(0..80);
        let outcomes: Vec<_> = (0..n).map(|i| random_outcome(r, i)).collect();
        for membership in [Membership::Center, Membership::AnyOverlap] {
            let got = CoreMetrics::compute(&outcomes, membership);
            let mut want = brute_force(&outcomes, membership);
            if membership == Membership::AnyOverlap {
                // Pass rate is always center-based.
                want.pass_rate = brute_force(&outcomes, Membership::Center).containment_rate;
            }
            if got != want {
                return Err(format!("set {set} {membership:?}: {got:?} != {want:?}"));
            }
            match (got.containment_rate, got.conditional_accuracy, got.composite_score) {
                (Some(a), Some(b), Some(c)) if c == composite_score(a, b) && c == a * b => {}
                (a, b, None) if a.is_none() || b.is_none() => {}
                other => return Err(format!("set {set}: composite identity broken {other:?}")),
            }
        }

        let report = MetricsReport::compute(&outcomes, Membership::Center);
        let mut groups: BTreeMap<String, Vec<TaskOutcome>> = BTreeMap::new();
        let mut clusters: BTreeMap<ResolutionCluster, Vec<TaskOutcome>> = BTreeMap::new();
        for o in &outcomes {
            if !o.group.is_empty() {
                groups.entry(o.group.clone()).or_default().push(o.clone());
            }
            let c = RESOLUTIONS.iter().find(|(w, h, _)| (*w, *h) == o.resolution).unwrap().2;
            clusters.entry(c).or_default().push(o.clone());
        }
        if report.by_group.keys().ne(groups.keys()) || report.by_resolution.len() != clusters.len() {
            return Err(format!("set {set}: breakdown keys differ"));
        }
        for (g, os) in &groups {
            if report.by_group[g] != brute_force(os, Membership::Center) {
                return Err(format!("set {set}: group {g} differs"));
            }
        }
        for (c, os) in &clusters {
            if report.by_resolution[c] != brute_force(os, Membership::Center) {
                return Err(format!("set {set}: cluster {c:?} differs"));
            }
        }
    }
    Ok(())
}
