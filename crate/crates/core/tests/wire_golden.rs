//! Requests sent to a local stub server, compared with golden captures.

mod common;

use common::wire::*;
use groundzoom::geometry::Point;
use groundzoom::predictors::{PredictError, Predictor, RemotePredictor};
use groundzoom::stub::{StubReply, StubServer};

#[test]
fn http_predict_request_and_reply() {
    http_predict_scenario();
}

#[test]
fn http_predict_reply_grammar() {
    reply_grammar_scenario();
}

#[test]
fn refusal_request_and_verdicts() {
    refusal_scenario();
}

#[test]
fn rewrite_request_and_postprocessing() {
    rewrite_scenario();
}

#[test]
fn http_predict_retry_exhaustion() {
    let server = StubServer::start(vec![StubReply::status(500)]).unwrap();
    let mut ep = endpoint(&server, "grounder-1");
    ep.max_retries = 2;
    let predictor = RemotePredictor::new(ep, None);
    let img = card(8, 8);
    let err = predictor.predict(&request(&img)).unwrap_err();
    assert!(matches!(err, PredictError::Transport(_)), "{err:?}");
    assert_eq!(server.requests().len(), 3);
}

#[test]
fn transient_failure_then_success() {
    let server =
        StubServer::start(vec![StubReply::status(503), StubReply::status(429), StubReply::chat("(1, 2)")]).unwrap();
    let predictor = RemotePredictor::new(endpoint(&server, "grounder-1"), None);
    let img = card(8, 8);
    assert_eq!(predictor.predict(&request(&img)).unwrap(), Point::new(1.0, 2.0));
    assert_eq!(server.requests().len(), 3);
}

#[test]
fn client_errors_are_not_retried() {
    let server = StubServer::start(vec![StubReply::status(400)]).unwrap();
    let predictor = RemotePredictor::new(endpoint(&server, "grounder-1"), None);
    let img = card(8, 8);
    assert!(predictor.predict(&request(&img)).is_err());
    assert_eq!(server.requests().len(), 1);
}
