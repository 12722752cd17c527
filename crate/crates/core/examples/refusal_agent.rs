//! Feasibility checks with the three refusal prompt variants, then refusal
//! accuracy and false-positive rate over a small labelled batch.

use groundzoom::agents::{check_feasibility, Decision, RefusalVariant};
use groundzoom::gbt::{refusal_metrics, TaskOutcome};
use groundzoom::imaging::Raster;
use groundzoom::predictors::{ChatClient, EndpointConfig};
use groundzoom::stub::{StubReply, StubServer};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let server = StubServer::start(vec![
        StubReply::chat(r#"{"answer": "yes"}"#),
        StubReply::chat(r#"{"reasoning": "There is no print dialog on screen.", "answer": "no"}"#),
        StubReply::chat("not sure"),
    ])?;
    let client = ChatClient::new(EndpointConfig::new(server.base_url(), "judge"));
    let screen = Raster::filled(800, 600, [250, 250, 250]);

    for variant in RefusalVariant::ALL {
        let v = check_feasibility(&client, &screen, "Print the document", variant, 1, Decision::Proceed)?;
        println!("{variant:?}: {:?} parsed={} rationale={:?}", v.decision, v.parsed, v.rationale);
    }

    // 10 infeasible tasks, 7 correctly refused; 20 feasible, 1 wrongly refused.
    let outcome = |feasible: bool, refused: bool| TaskOutcome {
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
    let mut batch: Vec<_> = (0..10).map(|i| outcome(false, i < 7)).collect();
    batch.extend((0..20).map(|i| outcome(true, i == 0)));
    let (acc, fpr) = refusal_metrics(&batch);
    println!("refusal accuracy {:.1}%, false positive rate {:.1}%", 100.0 * acc.unwrap(), 100.0 * fpr.unwrap());
    Ok(())
}
