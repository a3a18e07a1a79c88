//! HTTP model client: one POST per step carrying the prompt and the
//! base64-embedded screenshot, expecting the raw response text back.
//!
//! Request body:
//!
//! ```text
//! {"prompt": "<prompt text>", "image": "<base64 screenshot bytes>"}
//! ```
//!
//! The response body is used verbatim as the model's response text. An
//! optional `Authorization` header value comes from configuration, with an
//! environment override handled by the CLI. Retries are the client's own
//! budget; after it is exhausted the last failure kind is surfaced.

use std::time::Duration;

use base64::Engine as _;

use super::{ClientError, ModelClient, StepKey};

#[derive(Debug, Clone)]
pub struct EndpointConfig {
    pub url: String,
    /// Sent as the `Authorization` header when present.
    pub auth_header: Option<String>,
    pub timeout: Duration,
    pub retries: u32,
}

pub struct HttpEndpointClient {
    cfg: EndpointConfig,
    http: reqwest::blocking::Client,
}

impl HttpEndpointClient {
    pub fn new(cfg: EndpointConfig) -> Result<Self, ClientError> {
        let http = reqwest::blocking::Client::builder()
            .timeout(cfg.timeout)
            .build()
            .map_err(|e| ClientError::Transport(e.to_string()))?;
        Ok(HttpEndpointClient { cfg, http })
    }

    fn attempt(&self, body: &str) -> Result<String, ClientError> {
        let mut request = self
            .http
            .post(&self.cfg.url)
            .header(reqwest::header::CONTENT_TYPE, "application/json")
            .body(body.to_string());
        if let Some(auth) = &self.cfg.auth_header {
            request = request.header(reqwest::header::AUTHORIZATION, auth.clone());
        }
        let response = request.send().map_err(classify)?;
        if !response.status().is_success() {
            return Err(ClientError::Transport(format!(
                "endpoint returned {}",
                response.status()
            )));
        }
        response.text().map_err(classify)
    }
}

fn classify(e: reqwest::Error) -> ClientError {
    if e.is_timeout() {
        ClientError::Timeout
    } else {
        ClientError::Transport(e.to_string())
    }
}

impl ModelClient for HttpEndpointClient {
    fn complete(
        &self,
        _key: StepKey<'_>,
        prompt: &str,
        image: &[u8],
    ) -> Result<String, ClientError> {
        let body = serde_json::json!({
            "prompt": prompt,
            "image": base64::engine::general_purpose::STANDARD.encode(image),
        })
        .to_string();
        let mut last = ClientError::Transport("no attempts made".to_string());
        for _ in 0..=self.cfg.retries {
            match self.attempt(&body) {
                Ok(text) => return Ok(text),
                Err(e) => last = e,
            }
        }
        Err(last)
    }
}
