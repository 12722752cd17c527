//! Records a zoom search, then replays the recorded answers and checks the
//! replay lands on the same final ROI.

use groundzoom::geometry::{ImageBounds, Rect};
use groundzoom::imaging::TargetRegion;
use groundzoom::predictors::{ReplayPredictor, SimPredictor, SimPredictorSpec, SimulatedWorld};
use groundzoom::zoom::{run_zoom, ZoomContext, ZoomMode, ZoomParams, ZoomTrace};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bounds = ImageBounds::new(5120, 1440).unwrap();
    let target = TargetRegion::Bbox(Rect::new(60.0, 1380.0, 100.0, 1420.0)?);
    let world = SimulatedWorld::generate(bounds, target, 8, 5, "replay");
    let live = SimPredictor::new(SimPredictorSpec::oob_emitter(0.4), world, 5);
    let ctx = ZoomContext { task_id: "replay", instruction: "Open the start menu", bounds, image: None };
    let params = ZoomParams::default();

    let recorded = run_zoom(&ctx, &live, &params, ZoomMode::Bidirectional)?;
    let json = serde_json::to_string(&recorded)?;
    println!("recorded {} steps ({} bytes of JSON)", recorded.steps.len(), json.len());

    let restored: ZoomTrace = serde_json::from_str(&json)?;
    let replay = ReplayPredictor::from_trace(&restored);
    let again = run_zoom(&ctx, &replay, &params, ZoomMode::Bidirectional)?;

    assert_eq!(again.final_roi, recorded.final_roi);
    assert_eq!(again.steps, recorded.steps);
    println!("replay matches: final roi {:?}, {:?}", again.final_roi, again.termination);
    Ok(())
}
