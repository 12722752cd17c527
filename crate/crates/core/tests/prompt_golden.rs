//! Bundled prompt texts against golden files.

mod common;

use common::wire::templates_scenario;
use groundzoom::agents::{render_template, RewriteStrategy};

#[test]
fn templates_byte_for_byte() {
    templates_scenario();
}

#[test]
fn rendering_is_single_pass() {
    // Braces in the instruction are not template syntax.
    let t = "A {{literal}} then {raw_instruction}.";
    assert_eq!(render_template(t, "{raw_instruction}"), "A {literal} then {raw_instruction}.");
    assert_eq!(render_template(t, "x {{y}}"), "A {literal} then x {{y}}.");
}

#[test]
fn structured_strategies_ask_for_json() {
    for s in RewriteStrategy::ALL.into_iter().filter(|s| s.is_structured()) {
        let t = s.render("Share this").unwrap();
        assert!(t.contains("clarified_instruction") && t.contains("element_description"), "{}", s.name());
    }
}
