//! Reply grammar for point-valued model answers.

use std::sync::LazyLock;

use regex::Regex;
use serde_json::Value;

use super::PredictError;
use crate::geometry::Point;

const NUM: &str = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?";

static FENCED: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?s)```[A-Za-z]*\s*(.*?)```").expect("static regex"));
static BARE_OBJECT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\{[^{}]*\}").expect("static regex"));
static PAREN_PAIR: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(&format!(r"\(\s*({NUM})\s*,\s*({NUM})\s*\)")).expect("static regex"));
static BARE_PAIR: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(&format!(r"({NUM})\s*,\s*({NUM})")).expect("static regex"));

/// First JSON object in `text`: a fenced block's content if it parses,
/// otherwise the first brace-delimited object (no nesting) that does.
pub fn extract_json_object(text: &str) -> Option<serde_json::Map<String, Value>> {
    let fenced = FENCED.captures_iter(text).filter_map(|c| {
        let body = c.get(1)?.as_str().trim();
        match serde_json::from_str::<Value>(body) {
            Ok(Value::Object(m)) => Some(m),
            _ => None,
        }
    });
    let bare = BARE_OBJECT.find_iter(text).filter_map(|m| match serde_json::from_str::<Value>(m.as_str()) {
        Ok(Value::Object(m)) => Some(m),
        _ => None,
    });
    fenced.chain(bare).next()
}

fn json_point(text: &str) -> Option<Point> {
    let candidates = FENCED
        .captures_iter(text)
        .filter_map(|c| c.get(1).map(|m| m.as_str().trim().to_owned()))
        .chain(BARE_OBJECT.find_iter(text).map(|m| m.as_str().to_owned()));
    for c in candidates {
        if let Ok(Value::Object(m)) = serde_json::from_str::<Value>(&c) {
            if let (Some(x), Some(y)) = (m.get("x").and_then(Value::as_f64), m.get("y").and_then(Value::as_f64)) {
                return Some(Point::new(x, y));
            }
        }
    }
    None
}

fn pair(re: &Regex, text: &str) -> Option<Point> {
    let c = re.captures(text)?;
    let x = c.get(1)?.as_str().parse().ok()?;
    let y = c.get(2)?.as_str().parse().ok()?;
    Some(Point::new(x, y))
}

/// Accepts, in priority order: a fenced or bare JSON object with numeric
/// `x` and `y`; a parenthesized `(x, y)`; a bare `x, y`.
pub fn parse_point_from_text(reply: &str) -> Result<Point, PredictError> {
    json_point(reply)
        .or_else(|| pair(&PAREN_PAIR, reply))
        .or_else(|| pair(&BARE_PAIR, reply))
        .filter(Point::is_finite)
        .ok_or_else(|| PredictError::Parse { raw: reply.to_owned() })
}
