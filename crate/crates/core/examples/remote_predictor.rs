//! Talks to an OpenAI-compatible chat-completions endpoint. A local stub
//! server stands in for the real model, so this runs offline; point
//! `EndpointConfig` at a real `base_url` to use a hosted model.

use groundzoom::geometry::{zoom_in_asymmetric, ImageBounds, Point, Rect};
use groundzoom::imaging::{grid_rect, Raster};
use groundzoom::predictors::{EndpointConfig, RemotePredictor};
use groundzoom::stub::{StubReply, StubServer};
use groundzoom::zoom::{run_zoom, ZoomContext, ZoomMode, ZoomParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bounds = ImageBounds::new(1920, 1080).unwrap();
    let target = Point::new(1450.0, 300.0);

    // Script a model that always finds the target, replying in crop-local
    // pixels and in the three shapes models tend to answer with.
    let mut roi = Rect::full(bounds);
    let mut replies = Vec::new();
    for i in 0..3 {
        let g = grid_rect(&roi, bounds)?;
        let (x, y) = (target.x - g.x0 as f64, target.y - g.y0 as f64);
        replies.push(StubReply::chat(&match i {
            0 => format!(r#"{{"x": {x}, "y": {y}}}"#),
            1 => format!("The button is at ({x}, {y})."),
            _ => format!("```json\n[{x}, {y}]\n```"),
        }));
        roi = zoom_in_asymmetric(&roi, target, 0.1)?;
    }
    let server = StubServer::start(replies)?;
    // For a hosted model also set `api_key_env` to the variable holding the key.
    let endpoint = EndpointConfig::new(server.base_url(), "grounding-model");
    let predictor = RemotePredictor::new(endpoint, None);

    let screenshot = Raster::filled(1920, 1080, [240, 240, 240]);
    let ctx = ZoomContext { task_id: "remote", instruction: "Click Save", bounds, image: Some(&screenshot) };
    let params = ZoomParams { s_min: 600.0, ..Default::default() };
    let trace = run_zoom(&ctx, &predictor, &params, ZoomMode::Bidirectional)?;

    for s in &trace.steps {
        println!("step {}: {:?}", s.index, s.prediction);
    }
    if let Some(f) = &trace.failure {
        println!("search stopped: {f}");
    }
    let Rect { x_min, y_min, x_max, y_max } = trace.final_roi;
    println!("{:?}: [{x_min:.0} {y_min:.0} {x_max:.0} {y_max:.0}]", trace.termination);

    let first = &server.requests()[0];
    let body = first.json();
    println!(
        "{} {} model={} parts={}",
        first.method,
        first.path,
        body["model"],
        body["messages"][0]["content"].as_array().map_or(0, Vec::len)
    );
    Ok(())
}
