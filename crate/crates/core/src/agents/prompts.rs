//! Prompt templates for the refusal and rewrite agents, shipped as data
//! files under `prompts/`.
//!
//! Rewrite templates are stored as Python f-string bodies: `{raw_instruction}`
//! is the only placeholder and `{{` / `}}` are literal braces. Refusal
//! variants are stored as the original JSON objects with `description` and
//! `content` fields; `content` is the system prompt.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RefusalVariant {
    V0,
    V1,
    V2,
}

impl RefusalVariant {
    pub const ALL: [RefusalVariant; 3] = [RefusalVariant::V0, RefusalVariant::V1, RefusalVariant::V2];

    /// The variant file exactly as shipped.
    pub fn raw(self) -> &'static str {
        match self {
            RefusalVariant::V0 => include_str!("../../prompts/refusal/v0.json"),
            RefusalVariant::V1 => include_str!("../../prompts/refusal/v1.json"),
            RefusalVariant::V2 => include_str!("../../prompts/refusal/v2.json"),
        }
    }

    pub fn description(self) -> String {
        self.decode().description
    }

    /// The system prompt text.
    pub fn template(self) -> String {
        self.decode().content
    }

    /// V1 and V2 ask for a `reasoning` field alongside the answer.
    pub fn has_reasoning(self) -> bool {
        !matches!(self, RefusalVariant::V0)
    }

    fn decode(self) -> VariantFile {
        serde_json::from_str(self.raw()).expect("bundled refusal prompt is valid JSON")
    }
}

#[derive(Deserialize)]
struct VariantFile {
    description: String,
    content: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewriteStrategy {
    Raw,
    ContextInjection,
    SpatioVisual,
    Disambiguation,
    StructuredOutput,
    Hybrid,
}

impl RewriteStrategy {
    pub const ALL: [RewriteStrategy; 6] = [
        RewriteStrategy::Raw,
        RewriteStrategy::ContextInjection,
        RewriteStrategy::SpatioVisual,
        RewriteStrategy::Disambiguation,
        RewriteStrategy::StructuredOutput,
        RewriteStrategy::Hybrid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RewriteStrategy::Raw => "raw",
            RewriteStrategy::ContextInjection => "context_injection",
            RewriteStrategy::SpatioVisual => "spatio_visual",
            RewriteStrategy::Disambiguation => "disambiguation",
            RewriteStrategy::StructuredOutput => "structured_output",
            RewriteStrategy::Hybrid => "hybrid",
        }
    }

    /// Template source, or `None` for `Raw`.
    pub fn template(self) -> Option<&'static str> {
        Some(match self {
            RewriteStrategy::Raw => return None,
            RewriteStrategy::ContextInjection => include_str!("../../prompts/rewrite/context_injection.txt"),
            RewriteStrategy::SpatioVisual => include_str!("../../prompts/rewrite/spatio_visual.txt"),
            RewriteStrategy::Disambiguation => include_str!("../../prompts/rewrite/disambiguation.txt"),
            RewriteStrategy::StructuredOutput => include_str!("../../prompts/rewrite/structured_output.txt"),
            RewriteStrategy::Hybrid => include_str!("../../prompts/rewrite/hybrid.txt"),
        })
    }

    /// Strategies whose reply is a JSON object with `clarified_instruction`
    /// and `element_description`.
    pub fn is_structured(self) -> bool {
        matches!(self, RewriteStrategy::StructuredOutput | RewriteStrategy::Hybrid)
    }

    pub fn render(self, raw_instruction: &str) -> Option<String> {
        self.template().map(|t| render_template(t, raw_instruction))
    }
}

/// Substitutes `{raw_instruction}` and unescapes `{{` / `}}` in a single
/// left-to-right pass, so braces inside the instruction are left alone.
pub fn render_template(template: &str, raw_instruction: &str) -> String {
    const SLOT: &str = "{raw_instruction}";
    let mut out = String::with_capacity(template.len() + raw_instruction.len());
    let mut rest = template;
    while let Some(i) = rest.find(['{', '}']) {
        out.push_str(&rest[..i]);
        let tail = &rest[i..];
        if let Some(r) = tail.strip_prefix("{{") {
            out.push('{');
            rest = r;
        } else if let Some(r) = tail.strip_prefix("}}") {
            out.push('}');
            rest = r;
        } else if let Some(r) = tail.strip_prefix(SLOT) {
            out.push_str(raw_instruction);
            rest = r;
        } else {
            out.push_str(&tail[..1]);
            rest = &tail[1..];
        }
    }
    out.push_str(rest);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rendering_rules() {
        assert_eq!(render_template("a {{b}} {raw_instruction}!", "x{y}"), "a {b} x{y}!");
        assert_eq!(RewriteStrategy::Raw.render("x"), None);
    }

    #[test]
    fn every_template_has_the_slot() {
        for s in RewriteStrategy::ALL.into_iter().filter(|s| *s != RewriteStrategy::Raw) {
            let r = s.render("\u{1}").unwrap();
            assert!(r.contains('\u{1}'), "{}", s.name());
            assert!(!r.contains("{raw_instruction}"));
        }
    }

    #[test]
    fn refusal_variants_decode() {
        for v in RefusalVariant::ALL {
            let t = v.template();
            assert!(t.contains("\"answer\""));
            assert_eq!(t.contains("\"reasoning\""), v.has_reasoning());
            assert!(!v.description().is_empty());
        }
    }
}
