//! Instruction rewriting against the focused crop.

use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::prompts::RewriteStrategy;
use super::{AgentError, ChatBackend};
use crate::imaging::Raster;
use crate::predictors::{extract_json_object, ChatMessage, ContentPart};

static WRAPPING_FENCE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?s)^\s*```[A-Za-z]*[ \t]*\n?(.*?)\n?```\s*$").expect("static regex"));

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewriteOutcome {
    pub instruction: String,
    /// True when the reply was unusable and the raw instruction was kept.
    pub fell_back: bool,
}

pub fn rewrite_messages(
    crop: &Raster,
    raw_instruction: &str,
    strategy: RewriteStrategy,
) -> Result<Vec<ChatMessage>, AgentError> {
    let prompt = strategy.render(raw_instruction).ok_or(AgentError::RawStrategy)?;
    Ok(vec![ChatMessage::user(vec![ContentPart::text(prompt), ContentPart::png(crop)?])])
}

/// Turns a model reply into the instruction for Stage 2, or `None` when a
/// structured reply is missing either field.
pub fn postprocess(reply: &str, strategy: RewriteStrategy) -> Option<String> {
    if strategy.is_structured() {
        let obj = extract_json_object(reply)?;
        let clarified = obj.get("clarified_instruction")?.as_str()?.trim();
        let description = obj.get("element_description")?.as_str()?.trim();
        return Some(format!("{clarified} {description}"));
    }
    let text = match WRAPPING_FENCE.captures(reply) {
        Some(c) => c.get(1).map_or("", |m| m.as_str()),
        None => reply,
    };
    let text = text.trim();
    (!text.is_empty()).then(|| text.to_owned())
}

/// Rewrites `raw_instruction` with one model call. `Raw` makes no call.
pub fn rewrite_instruction<B: ChatBackend + ?Sized>(
    backend: &B,
    crop: &Raster,
    raw_instruction: &str,
    strategy: RewriteStrategy,
) -> Result<RewriteOutcome, AgentError> {
    if strategy == RewriteStrategy::Raw {
        return Ok(RewriteOutcome { instruction: raw_instruction.to_owned(), fell_back: false });
    }
    let reply = backend.complete(&rewrite_messages(crop, raw_instruction, strategy)?)?;
    Ok(match postprocess(&reply, strategy) {
        Some(instruction) => RewriteOutcome { instruction, fell_back: false },
        None => {
            log::warn!("unusable {} rewrite reply, keeping raw instruction: {reply:?}", strategy.name());
            RewriteOutcome { instruction: raw_instruction.to_owned(), fell_back: true }
        }
    })
}
