//! Minimal blocking client for OpenAI-compatible chat completions with
//! image input.

use std::time::Duration;

use base64::Engine;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imaging::{ImagingError, Raster};

#[derive(Debug, Error)]
pub enum ChatError {
    #[error("endpoint returned HTTP {status} after {attempts} attempt(s): {body}")]
    Status { status: u16, attempts: u32, body: String },
    #[error("request failed after {attempts} attempt(s): {message}")]
    Io { attempts: u32, message: String },
    #[error("malformed response: {0}")]
    Response(String),
    #[error("API key variable {0} is not set")]
    MissingKey(String),
    #[error(transparent)]
    Image(#[from] ImagingError),
}

/// Where and how to reach a chat-completions endpoint. Only the name of the
/// API key variable is configured; the key itself is read from the
/// environment at request time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointConfig {
    /// Base URL up to and including the version segment, e.g.
    /// `https://api.openai.com/v1`.
    pub base_url: String,
    pub model: String,
    #[serde(default)]
    pub api_key_env: Option<String>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    #[serde(default = "default_backoff")]
    pub backoff_ms: u64,
    #[serde(default)]
    pub temperature: Option<f64>,
    #[serde(default)]
    pub max_tokens: Option<u32>,
}

fn default_timeout() -> u64 {
    60
}
fn default_retries() -> u32 {
    2
}
fn default_backoff() -> u64 {
    500
}

impl EndpointConfig {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into(),
            model: model.into(),
            api_key_env: None,
            timeout_secs: default_timeout(),
            max_retries: default_retries(),
            backoff_ms: default_backoff(),
            temperature: Some(0.0),
            max_tokens: None,
        }
    }

    pub fn completions_url(&self) -> String {
        format!("{}/chat/completions", self.base_url.trim_end_matches('/'))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ContentPart {
    Text { text: String },
    ImageUrl { image_url: ImageUrl },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageUrl {
    pub url: String,
}

impl ContentPart {
    pub fn text(t: impl Into<String>) -> Self {
        ContentPart::Text { text: t.into() }
    }

    /// Embeds the raster as a base64 PNG data URL.
    pub fn png(img: &Raster) -> Result<Self, ImagingError> {
        let b64 = base64::engine::general_purpose::STANDARD.encode(img.encode_png()?);
        Ok(ContentPart::ImageUrl { image_url: ImageUrl { url: format!("data:image/png;base64,{b64}") } })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: Vec<ContentPart>,
}

impl ChatMessage {
    pub fn system(text: impl Into<String>) -> Self {
        Self { role: "system".into(), content: vec![ContentPart::text(text)] }
    }

    pub fn user(content: Vec<ContentPart>) -> Self {
        Self { role: "user".into(), content }
    }
}

#[derive(Debug, Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: &'a [ChatMessage],
    #[serde(skip_serializing_if = "Option::is_none")]
    temperature: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_tokens: Option<u32>,
}

#[derive(Debug, Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Debug, Deserialize)]
struct Choice {
    message: ChoiceMessage,
}

#[derive(Debug, Deserialize)]
struct ChoiceMessage {
    #[serde(default)]
    content: Option<String>,
}

/// Blocking chat client. Holds no per-request state, so one client can be
/// shared by many worker threads.
#[derive(Debug, Clone)]
pub struct ChatClient {
    config: EndpointConfig,
    agent: ureq::Agent,
}

fn transient(status: u16) -> bool {
    status == 408 || status == 429 || status >= 500
}

impl ChatClient {
    pub fn new(config: EndpointConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        Self { config, agent }
    }

    pub fn config(&self) -> &EndpointConfig {
        &self.config
    }

    /// Serialized request body, exactly as sent on the wire.
    pub fn request_body(&self, messages: &[ChatMessage]) -> String {
        let req = ChatRequest {
            model: &self.config.model,
            messages,
            temperature: self.config.temperature,
            max_tokens: self.config.max_tokens,
        };
        serde_json::to_string(&req).expect("chat request serializes")
    }

    /// Sends one completion request and returns the first choice's text.
    /// Connection errors, 408, 429 and 5xx are retried up to `max_retries`
    /// times with exponential backoff.
    pub fn complete(&self, messages: &[ChatMessage]) -> Result<String, ChatError> {
        let key = match &self.config.api_key_env {
            Some(var) => Some(std::env::var(var).map_err(|_| ChatError::MissingKey(var.clone()))?),
            None => None,
        };
        let body = self.request_body(messages);
        let url = self.config.completions_url();
        let mut attempt = 0u32;
        loop {
            attempt += 1;
            let mut req = self.agent.post(&url).header("Content-Type", "application/json");
            if let Some(k) = &key {
                req = req.header("Authorization", &format!("Bearer {k}"));
            }
            let retry_err = match req.send(body.as_bytes()) {
                Ok(mut resp) => {
                    let status = resp.status().as_u16();
                    let text = resp.body_mut().read_to_string().map_err(|e| ChatError::Response(e.to_string()))?;
                    if (200..300).contains(&status) {
                        return parse_reply(&text);
                    }
                    let err = ChatError::Status { status, attempts: attempt, body: text };
                    if !transient(status) {
                        return Err(err);
                    }
                    err
                }
                Err(e) => ChatError::Io { attempts: attempt, message: e.to_string() },
            };
            if attempt > self.config.max_retries {
                return Err(retry_err);
            }
            log::warn!("chat request attempt {attempt} failed: {retry_err}; retrying");
            let wait = self.config.backoff_ms.saturating_mul(1u64 << (attempt - 1).min(16));
            std::thread::sleep(Duration::from_millis(wait));
        }
    }
}

fn parse_reply(text: &str) -> Result<String, ChatError> {
    let parsed: ChatResponse = serde_json::from_str(text).map_err(|e| ChatError::Response(e.to_string()))?;
    parsed
        .choices
        .into_iter()
        .next()
        .and_then(|c| c.message.content)
        .ok_or_else(|| ChatError::Response("no choices in response".into()))
}
