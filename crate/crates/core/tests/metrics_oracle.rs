//! Aggregate metrics against a brute-force recount on random result sets.

mod common;

use common::metrics::*;
use groundzoom::gbt::{composite_score, resolution_cluster, CoreMetrics, Membership, TaskOutcome};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn resolution_table_clusters() {
    for (w, h, c) in RESOLUTIONS {
        assert_eq!(resolution_cluster(w, h), c, "{w}x{h}");
    }
}

#[test]
fn aggregates_match_brute_force_recount() {
    let mut r = ChaCha8Rng::seed_from_u64(99);
    check_random_sets(&mut r, 1000).unwrap();
}

#[test]
fn documented_counting_examples() {
    let base = |feasible: bool, refused: bool| TaskOutcome {
        task_id: String::new(),
        feasible,
        target: None,
        resolution: (1920, 1080),
        group: String::new(),
        refused,
        errored: false,
        final_roi: None,
        final_point: None,
        steps: None,
        correct: None,
    };
    // 37 of 54 infeasible refused.
    let mut set: Vec<_> = (0..54).map(|i| base(false, i < 37)).collect();
    set.extend((0..20).map(|i| base(true, i == 0)));
    let m = CoreMetrics::compute(&set, Membership::Center);
    assert_eq!((m.refusal_accuracy.unwrap() * 1000.0).round() / 10.0, 68.5);
    assert_eq!(m.false_positive_rate, Some(0.05));

    assert!((composite_score(0.897, 0.814) - 0.7302).abs() < 5e-5);
}
