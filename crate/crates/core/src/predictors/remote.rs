use super::chat::{ChatClient, ChatMessage, ContentPart, EndpointConfig};
use super::parse::parse_point_from_text;
use super::{PredictError, PredictRequest, Predictor, PredictorInfo};
use crate::geometry::Point;

/// Default text sent alongside each crop. Placeholders: `{instruction}`,
/// `{width}`, `{height}` (pixel size of the image the model receives).
pub const DEFAULT_GROUNDING_PROMPT: &str = "{instruction}\n\
The screenshot is {width}x{height} pixels. Reply with the click point of the target UI element \
as pixel coordinates in this image, formatted as (x, y).";

/// Grounding model behind an OpenAI-compatible endpoint.
#[derive(Debug, Clone)]
pub struct RemotePredictor {
    client: ChatClient,
    prompt_template: String,
}

impl RemotePredictor {
    pub fn new(endpoint: EndpointConfig, prompt_template: Option<String>) -> Self {
        Self {
            client: ChatClient::new(endpoint),
            prompt_template: prompt_template.unwrap_or_else(|| DEFAULT_GROUNDING_PROMPT.to_owned()),
        }
    }

    pub fn render_prompt(&self, instruction: &str, width: u32, height: u32) -> String {
        self.prompt_template
            .replace("{width}", &width.to_string())
            .replace("{height}", &height.to_string())
            .replace("{instruction}", instruction)
    }

    pub fn messages(&self, req: &PredictRequest<'_>) -> Result<Vec<ChatMessage>, PredictError> {
        let img = req.image.ok_or_else(|| PredictError::MissingImage(self.client.config().model.clone()))?;
        let text = self.render_prompt(req.instruction, img.width(), img.height());
        let image = ContentPart::png(img).map_err(|e| PredictError::Transport(e.to_string()))?;
        Ok(vec![ChatMessage::user(vec![ContentPart::text(text), image])])
    }
}

impl Predictor for RemotePredictor {
    fn info(&self) -> PredictorInfo {
        PredictorInfo { name: format!("remote:{}", self.client.config().model), supports_concurrency: true }
    }

    fn predict(&self, req: &PredictRequest<'_>) -> Result<Point, PredictError> {
        let messages = self.messages(req)?;
        let reply = self.client.complete(&messages)?;
        parse_point_from_text(&reply)
    }
}
