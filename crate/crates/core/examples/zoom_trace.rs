//! Bidirectional ROI zoom on a 4K screen with a noisy grounding model,
//! printing every step of the trace.

use groundzoom::geometry::{ImageBounds, Rect};
use groundzoom::imaging::TargetRegion;
use groundzoom::predictors::{SimPredictor, SimPredictorSpec, SimulatedWorld};
use groundzoom::zoom::{run_zoom, step_bound, ZoomContext, ZoomMode, ZoomParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bounds = ImageBounds::new(3840, 2160).unwrap();
    let target = TargetRegion::Bbox(Rect::new(3700.0, 40.0, 3760.0, 70.0)?);
    let world = SimulatedWorld::generate(bounds, target, 8, 42, "demo");
    let predictor = SimPredictor::new(SimPredictorSpec::noisy(150.0), world.clone(), 42);

    let ctx = ZoomContext { task_id: "demo", instruction: "Click the close button", bounds, image: None };
    let params = ZoomParams::default();
    let trace = run_zoom(&ctx, &predictor, &params, ZoomMode::Bidirectional)?;

    for step in &trace.steps {
        let r = step.roi_before;
        println!(
            "#{:<2} roi [{:>6.0} {:>6.0} {:>6.0} {:>6.0}]  {:?} -> {:?}",
            step.index, r.x_min, r.y_min, r.x_max, r.y_max, step.prediction, step.event
        );
    }
    let f = trace.final_roi;
    println!("termination: {:?}, zoom-outs: {}", trace.termination, trace.zoom_out_count());
    println!("final roi: [{:.0} {:.0} {:.0} {:.0}]", f.x_min, f.y_min, f.x_max, f.y_max);
    println!("target center: {:?}", world.target_center());
    println!("step bound for this screen: {}", step_bound(&params, 3840.0));
    Ok(())
}
