//! Containment against final ROI size for the one-shot baseline and for
//! bidirectional zoom, with a noisy grounding model.

use groundzoom::agents::{PipelineConfig, SearchMethod};
use groundzoom::gbt::{generate_tasks, run_sweep, sweep::default_sizes, SweepConfig, SyntheticOptions};
use groundzoom::predictors::SimPredictorSpec;

fn main() -> Result<(), String> {
    let tasks = generate_tasks(&SyntheticOptions { n_tasks: 300, seed: 3, ..Default::default() });
    let pipeline = PipelineConfig::simulated(SimPredictorSpec::noisy(300.0), SimPredictorSpec::oracle());

    println!("{:>6} {:>10} {:>10}", "size", "static", "zoom");
    let run = |method| {
        let cfg = SweepConfig { roi_sizes: default_sizes(), method, pipeline: pipeline.clone(), seed: 0 };
        run_sweep(&tasks, &cfg, 4)
    };
    let fixed = run(SearchMethod::StaticOneShot)?;
    let zoom = run(SearchMethod::Zoom)?;
    for (a, b) in fixed.rows.iter().zip(&zoom.rows) {
        println!(
            "{:>6} {:>9.1}% {:>9.1}%",
            a.roi_size,
            100.0 * a.metrics.containment_rate.unwrap_or(0.0),
            100.0 * b.metrics.containment_rate.unwrap_or(0.0)
        );
    }
    Ok(())
}
