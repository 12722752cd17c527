//! The full pipeline on rendered screenshots: a simulated feasibility judge,
//! zoom search, crop + 3x bicubic upscale and a simulated Stage 2 model.

use groundzoom::agents::{JudgeConfig, Pipeline, PipelineConfig, RefusalConfig, SimulatedJudge};
use groundzoom::gbt::{generate_tasks, render_screenshot, SyntheticOptions};
use groundzoom::predictors::SimPredictorSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("groundzoom-e2e");
    std::fs::create_dir_all(&dir)?;
    let mut tasks =
        generate_tasks(&SyntheticOptions { n_tasks: 6, seed: 21, infeasible_fraction: 0.3, ..Default::default() });
    for t in &mut tasks {
        let path = dir.join(format!("{}.png", t.id));
        std::fs::write(&path, render_screenshot(t, 10, 21).encode_png()?)?;
        t.image_path = Some(path);
    }

    let mut config = PipelineConfig::simulated(SimPredictorSpec::noisy(120.0), SimPredictorSpec::noisy(4.0));
    config.refusal = RefusalConfig {
        enabled: true,
        judge: Some(JudgeConfig::Sim(SimulatedJudge { refusal_accuracy: 0.9, false_positive_rate: 0.05 })),
        ..Default::default()
    };
    let pipeline = Pipeline::new(config, 21)?;

    for t in &tasks {
        let r = pipeline.run(t);
        let ms = &r.timings;
        match (r.final_point, &r.error) {
            (_, Some(e)) => println!("{}: {:?} failed: {}", t.id, e.stage, e.message),
            (Some(p), None) => println!(
                "{}: ({:.0}, {:.0}) correct={:?} search={} calls  [{:.1} ms: search {:.1}, ground {:.1}]",
                t.id, p.x, p.y, r.correct, r.search_calls, ms.total_ms, ms.search_ms, ms.ground_ms
            ),
            (None, None) => println!("{}: refused (feasible={}) {}", t.id, t.feasible, r.rationale.unwrap_or_default()),
        }
    }
    Ok(())
}
