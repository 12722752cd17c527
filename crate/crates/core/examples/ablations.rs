//! Paired ablations over three seeds: zoom direction, zoom symmetry and
//! pruning rate, each with a sign test on per-task containment.

use groundzoom::agents::PipelineConfig;
use groundzoom::gbt::{generate_tasks, run_ablation, AblationConfig, AblationKind, SyntheticOptions};
use groundzoom::predictors::SimPredictorSpec;

fn main() -> Result<(), String> {
    let tasks = generate_tasks(&SyntheticOptions { n_tasks: 300, seed: 9, ..Default::default() });
    let runs = [
        (AblationKind::BidirectionalVsUnidirectional, SimPredictorSpec::oob_emitter(0.3)),
        (AblationKind::AsymmetricVsSymmetric, SimPredictorSpec::noisy(300.0)),
        (AblationKind::PruningRates, SimPredictorSpec::noisy(300.0)),
    ];
    for (kind, stage1) in runs {
        let cfg = AblationConfig {
            kind,
            pipeline: PipelineConfig::simulated(stage1, SimPredictorSpec::oracle()),
            seeds: vec![0, 1, 2],
        };
        let r = run_ablation(&tasks, &cfg, 4)?;
        println!("{kind:?}");
        for arm in &r.arms {
            let m = &arm.metrics;
            println!(
                "  {:<16} containment {:.3}  steps {:.2}  pass {:.3}",
                arm.name,
                m.containment_rate.unwrap_or(0.0),
                m.avg_steps.unwrap_or(0.0),
                m.pass_rate.unwrap_or(0.0)
            );
        }
        for c in &r.comparisons {
            let t = &c.containment_sign_test;
            println!("  {} vs {}: {}/{} discordant, p = {:.2e}", c.reference, c.arm, t.a_only, t.b_only, t.p_value);
        }
    }
    Ok(())
}
