//! Stage 0: decide whether the instruction can be carried out on the
//! screenshot at all.

use serde::{Deserialize, Serialize};

use super::prompts::RefusalVariant;
use super::{AgentError, ChatBackend};
use crate::imaging::{upscale_bicubic, Raster};
use crate::predictors::{extract_json_object, ChatMessage, ContentPart};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Proceed,
    Refuse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityVerdict {
    pub decision: Decision,
    /// The `reasoning` field, when the variant asks for one.
    pub rationale: Option<String>,
    /// False when the reply could not be read and the fallback was used.
    pub parsed: bool,
}

/// Chat messages for one feasibility check: the variant text as the system
/// prompt, then the instruction and the (optionally upscaled) screenshot.
pub fn refusal_messages(
    image: &Raster,
    instruction: &str,
    variant: RefusalVariant,
    scaling: u32,
) -> Result<Vec<ChatMessage>, AgentError> {
    let scaled;
    let shown = if scaling > 1 {
        scaled = upscale_bicubic(image, scaling)?;
        &scaled
    } else {
        image
    };
    Ok(vec![
        ChatMessage::system(variant.template()),
        ChatMessage::user(vec![ContentPart::text(instruction), ContentPart::png(shown)?]),
    ])
}

/// Reads `answer` (and `reasoning`) from the first JSON object in the reply.
pub fn parse_verdict(reply: &str) -> Option<(Decision, Option<String>)> {
    let obj = extract_json_object(reply)?;
    let answer = obj.get("answer")?.as_str()?.trim().to_ascii_lowercase();
    let decision = match answer.trim_matches(|c: char| !c.is_ascii_alphabetic()) {
        "yes" => Decision::Proceed,
        "no" => Decision::Refuse,
        _ => return None,
    };
    let rationale = obj.get("reasoning").and_then(|r| r.as_str()).map(str::to_owned);
    Some((decision, rationale))
}

/// Sends one feasibility request. An unreadable reply yields `fallback`.
pub fn check_feasibility<B: ChatBackend + ?Sized>(
    backend: &B,
    image: &Raster,
    instruction: &str,
    variant: RefusalVariant,
    scaling: u32,
    fallback: Decision,
) -> Result<FeasibilityVerdict, AgentError> {
    let messages = refusal_messages(image, instruction, variant, scaling)?;
    let reply = backend.complete(&messages)?;
    Ok(match parse_verdict(&reply) {
        Some((decision, rationale)) => FeasibilityVerdict {
            decision,
            rationale: if variant.has_reasoning() { rationale } else { None },
            parsed: true,
        },
        None => {
            log::warn!("unreadable refusal reply, using {fallback:?}: {reply:?}");
            FeasibilityVerdict { decision: fallback, rationale: None, parsed: false }
        }
    })
}
