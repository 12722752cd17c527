//! Stub-server scenarios and golden-file helpers for the wire format and
//! the bundled prompt texts. Set `UPDATE_GOLDEN=1` to rewrite wire captures
//! after an intended change.

use std::path::PathBuf;

use base64::Engine;
use groundzoom::agents::{check_feasibility, rewrite_instruction, Decision, RefusalVariant, RewriteStrategy};
use groundzoom::geometry::Point;
use groundzoom::imaging::{GridRect, Raster};
use groundzoom::predictors::{
    ChatClient, EndpointConfig, PredictError, PredictRequest, Predictor, RemotePredictor, Stage,
};
use groundzoom::stub::{CapturedRequest, StubReply, StubServer};
use serde_json::Value;
use sha2::{Digest, Sha256};

pub fn golden(name: &str) -> String {
    let path = golden_path(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

/// Swaps each embedded PNG for its size and a hash of the decoded pixels,
/// so captures do not depend on the encoder's compression choices.
pub fn normalize(v: &mut Value) {
    match v {
        Value::String(s) => {
            if let Some(b64) = s.strip_prefix("data:image/png;base64,") {
                let bytes = base64::engine::general_purpose::STANDARD.decode(b64).expect("valid base64");
                let img = Raster::decode_png(&bytes).expect("valid png");
                let digest = hex::encode(&Sha256::digest(img.data())[..8]);
                *s = format!("<png {}x{} rgb-sha256:{digest}>", img.width(), img.height());
            }
        }
        Value::Array(a) => a.iter_mut().for_each(normalize),
        Value::Object(o) => o.values_mut().for_each(normalize),
        _ => {}
    }
}

pub fn capture_text(req: &CapturedRequest) -> String {
    let mut body = req.json();
    normalize(&mut body);
    let wire = serde_json::json!({
        "method": req.method,
        "path": req.path,
        "content_type": req.header("content-type"),
        "authorization": req.header("authorization"),
        "body": body,
    });
    serde_json::to_string_pretty(&wire).unwrap() + "\n"
}

pub fn assert_golden(name: &str, actual: &str) {
    let path = golden_path(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "wire capture differs from {}", path.display());
}

/// Small deterministic test card.
pub fn card(w: u32, h: u32) -> Raster {
    let data = (0..w * h).flat_map(|i| [(i % 251) as u8, (i / w * 7 % 256) as u8, 128]).collect();
    Raster::from_rgb(w, h, data).unwrap()
}

pub fn endpoint(server: &StubServer, model: &str) -> EndpointConfig {
    EndpointConfig { backoff_ms: 1, ..EndpointConfig::new(server.base_url(), model) }
}

pub fn request<'a>(img: &'a Raster) -> PredictRequest<'a> {
    PredictRequest {
        task_id: "wire",
        stage: Stage::Ground,
        call_index: 0,
        instruction: "Click the gear icon",
        crop: GridRect { x0: 100, y0: 50, x1: 100 + img.width(), y1: 50 + img.height() },
        scale: 1,
        image: Some(img),
    }
}

pub fn http_predict_scenario() {
    let server = StubServer::start(vec![StubReply::chat("(123, 456)")]).unwrap();
    let mut ep = endpoint(&server, "grounder-1");
    ep.api_key_env = Some("GROUNDZOOM_WIRE_TEST_KEY".into());
    std::env::set_var("GROUNDZOOM_WIRE_TEST_KEY", "sk-test");
    let predictor = RemotePredictor::new(ep, None);
    let img = card(24, 16);
    let p = predictor.predict(&request(&img)).unwrap();
    assert_eq!(p, Point::new(123.0, 456.0));

    let reqs = server.requests();
    assert_eq!(reqs.len(), 1);
    let body = reqs[0].json();
    let content = body["messages"][0]["content"].as_array().unwrap();
    assert_eq!(body["messages"].as_array().unwrap().len(), 1);
    assert_eq!(content.len(), 2);
    assert_eq!(content[0]["type"], "text");
    assert_eq!(content[1]["type"], "image_url");
    assert_golden("wire_http_predict.json", &capture_text(&reqs[0]));
}

pub fn reply_grammar_scenario() {
    let replies = [
        ("click at {\"x\": 10, \"y\": 20}", Some((10.0, 20.0))),
        ("```json\n{\"x\": 400, \"y\": 200}\n```", Some((400.0, 200.0))),
        ("The element is at (12.5, 7).", Some((12.5, 7.0))),
        ("88, 99", Some((88.0, 99.0))),
        ("no target found", None),
    ];
    let server = StubServer::start(replies.iter().map(|(r, _)| StubReply::chat(r)).collect()).unwrap();
    let predictor = RemotePredictor::new(endpoint(&server, "grounder-1"), None);
    let img = card(8, 8);
    for (reply, want) in replies {
        let got = predictor.predict(&request(&img));
        match want {
            Some((x, y)) => assert_eq!(got.unwrap(), Point::new(x, y), "{reply}"),
            None => match got {
                Err(PredictError::Parse { raw, .. }) => assert_eq!(raw, reply),
                other => panic!("{reply}: expected parse error, got {other:?}"),
            },
        }
    }
}

pub fn refusal_scenario() {
    let server = StubServer::start(vec![
        StubReply::chat(r#"{"reasoning": "The dialog has no Print button.", "answer": "no"}"#),
        StubReply::chat("```json\n{\"answer\": \"Yes\"}\n```"),
        StubReply::chat("I cannot tell."),
    ])
    .unwrap();
    let client = ChatClient::new(endpoint(&server, "judge-1"));
    let img = card(20, 10);

    let v = check_feasibility(&client, &img, "Print the report", RefusalVariant::V2, 2, Decision::Proceed).unwrap();
    assert_eq!(v.decision, Decision::Refuse);
    assert_eq!(v.rationale.as_deref(), Some("The dialog has no Print button."));
    let v = check_feasibility(&client, &img, "Print the report", RefusalVariant::V2, 2, Decision::Proceed).unwrap();
    assert_eq!((v.decision, v.parsed), (Decision::Proceed, true));
    let v = check_feasibility(&client, &img, "Print the report", RefusalVariant::V2, 2, Decision::Refuse).unwrap();
    assert_eq!((v.decision, v.parsed), (Decision::Refuse, false));

    let reqs = server.requests();
    let body = reqs[0].json();
    assert_eq!(body["messages"][0]["role"], "system");
    assert_eq!(body["messages"][0]["content"][0]["text"].as_str().unwrap(), RefusalVariant::V2.template());
    assert_eq!(body["messages"][1]["content"][0]["text"], "Print the report");
    assert_golden("wire_refusal_v2.json", &capture_text(&reqs[0]));
}

pub fn rewrite_scenario() {
    let server = StubServer::start(vec![
        StubReply::chat("```json\n{\"clarified_instruction\": \"Click Share\", \"element_description\": \"arrow icon, top right\"}\n```"),
        StubReply::chat("not json"),
    ])
    .unwrap();
    let client = ChatClient::new(endpoint(&server, "rewriter-1"));
    let crop = card(30, 20);
    let out = rewrite_instruction(&client, &crop, "Share this", RewriteStrategy::StructuredOutput).unwrap();
    assert_eq!(out.instruction, "Click Share arrow icon, top right");
    assert!(!out.fell_back);
    let out = rewrite_instruction(&client, &crop, "Share this", RewriteStrategy::StructuredOutput).unwrap();
    assert_eq!(out.instruction, "Share this");
    assert!(out.fell_back);

    let reqs = server.requests();
    let body = reqs[0].json();
    let text = body["messages"][0]["content"][0]["text"].as_str().unwrap();
    let golden = std::fs::read_to_string(golden_path("rewrite_structured_output_share_this.txt")).unwrap();
    assert_eq!(text, golden);
    assert_golden("wire_rewrite_structured_output.json", &capture_text(&reqs[0]));
}

/// Every rewrite and refusal template against its golden text.
pub fn templates_scenario() {
    for s in RewriteStrategy::ALL {
        match s.render("Share this") {
            None => assert_eq!(s, RewriteStrategy::Raw),
            Some(text) => assert_eq!(text, golden(&format!("rewrite_{}_share_this.txt", s.name())), "{}", s.name()),
        }
    }

    for (v, name) in RefusalVariant::ALL.into_iter().zip(["v0", "v1", "v2"]) {
        assert_eq!(v.template(), golden(&format!("refusal_{name}_content.txt")), "{name}");
        assert!(!v.description().is_empty());
    }
    assert!(!RefusalVariant::V0.has_reasoning());
    assert!(RefusalVariant::V2.template().contains("\"reasoning\""));
}
