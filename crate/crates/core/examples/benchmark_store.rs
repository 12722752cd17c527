//! Runs a benchmark into a result store and verifies it, the same way the
//! `groundzoom bench` and `groundzoom report` commands do.

use groundzoom::agents::PipelineConfig;
use groundzoom::predictors::SimPredictorSpec;
use groundzoom::runner::{cmd_bench, cmd_report, format_summary, prepare_synthetic, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::temp_dir().join("groundzoom-bench");
    let mut cfg = RunConfig {
        seed: 1,
        workers: 4,
        out: Some(out.clone()),
        pipeline: PipelineConfig::simulated(SimPredictorSpec::noisy(250.0), SimPredictorSpec::noisy(3.0)),
        ..Default::default()
    };
    prepare_synthetic(&mut cfg, 200)?;
    let run = cmd_bench(&cfg)?;
    print!("{}", format_summary(&run.store));

    let verified = cmd_report(&out)?;
    println!("report: OK, {} records re-checked in {}", verified.records.len(), out.display());
    Ok(())
}
