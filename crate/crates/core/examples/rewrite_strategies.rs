//! Instruction rewriting: renders every strategy's prompt, then rewrites an
//! instruction through a stubbed model.

use groundzoom::agents::{rewrite_instruction, RewriteStrategy};
use groundzoom::imaging::Raster;
use groundzoom::predictors::{ChatClient, EndpointConfig};
use groundzoom::stub::{StubReply, StubServer};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let raw = "Share this";
    for s in RewriteStrategy::ALL {
        let Some(prompt) = s.render(raw) else {
            println!("{:<18} (instruction passed through unchanged)", s.name());
            continue;
        };
        let first = prompt.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
        println!("{:<18} {:>5} chars  {}", s.name(), prompt.len(), first.trim());
    }

    let server = StubServer::start(vec![
        StubReply::chat(
            r#"{"clarified_instruction": "Click the Share button", "element_description": "blue icon, top right of the toolbar"}"#,
        ),
        StubReply::chat("```\nClick the Share icon in the top toolbar\n```"),
        StubReply::chat("I would rather not answer in JSON."),
    ])?;
    let client = ChatClient::new(EndpointConfig::new(server.base_url(), "rewriter"));
    let crop = Raster::filled(600, 400, [230, 230, 230]);
    for s in [RewriteStrategy::StructuredOutput, RewriteStrategy::ContextInjection, RewriteStrategy::Hybrid] {
        let out = rewrite_instruction(&client, &crop, raw, s)?;
        println!("{}: {:?} (fell back: {})", s.name(), out.instruction, out.fell_back);
    }
    Ok(())
}
