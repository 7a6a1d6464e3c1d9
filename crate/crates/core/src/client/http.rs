//! Minimal chat-completion HTTP provider.
//!
//! Sends one user message per request and takes the response's first text
//! candidate as the raw output. Transient failures (HTTP 429, 5xx, timeouts,
//! connection errors) are reported as retryable; other 4xx statuses fail
//! immediately with a body excerpt.

use super::{AttemptError, Provider, ProviderConfig, ProviderResponse};
use crate::prompt::RenderedPrompt;
use async_trait::async_trait;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::time::Duration;

const BODY_EXCERPT_LEN: usize = 200;

/// Chat-completion client for one configured endpoint + model.
///
/// `Debug` omits the bearer token so provider state can be logged safely.
pub struct HttpChatProvider {
    endpoint: String,
    model_name: String,
    bearer_token: Option<String>,
    temperature: f64,
    max_output_tokens: u32,
    http: reqwest::Client,
}

impl std::fmt::Debug for HttpChatProvider {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpChatProvider")
            .field("endpoint", &self.endpoint)
            .field("model_name", &self.model_name)
            .field("has_token", &self.bearer_token.is_some())
            .field("temperature", &self.temperature)
            .field("max_output_tokens", &self.max_output_tokens)
            .finish()
    }
}

impl HttpChatProvider {
    /// Builds the provider, resolving the auth environment variable up front
    /// so a missing key fails before any network call.
    pub fn new(config: &ProviderConfig) -> Result<Self, AttemptError> {
        let endpoint = config.endpoint.clone().ok_or_else(|| AttemptError {
            message: "http_chat provider requires an endpoint".to_string(),
            transient: false,
        })?;
        let model_name = config.model_name.clone().ok_or_else(|| AttemptError {
            message: "http_chat provider requires a model_name".to_string(),
            transient: false,
        })?;
        let bearer_token = match &config.auth_env_var {
            Some(var) => Some(std::env::var(var).map_err(|_| AttemptError {
                message: format!("auth environment variable `{var}` is not set"),
                transient: false,
            })?),
            None => None,
        };
        let http = reqwest::Client::builder()
            .timeout(Duration::from_secs_f64(config.request_timeout_secs))
            .build()
            .map_err(|e| AttemptError {
                message: format!("building http client: {e}"),
                transient: false,
            })?;
        Ok(HttpChatProvider {
            endpoint,
            model_name,
            bearer_token,
            temperature: config.temperature,
            max_output_tokens: config.max_output_tokens,
            http,
        })
    }
}

/// First text candidate of a chat-completion response body; supports the
/// `choices[].message.content` shape with a `candidates[].content.parts[].text`
/// fallback.
fn extract_text(body: &Value) -> Option<String> {
    if let Some(content) = body
        .pointer("/choices/0/message/content")
        .and_then(Value::as_str)
    {
        return Some(content.to_string());
    }
    if let Some(parts) = body
        .pointer("/candidates/0/content/parts")
        .and_then(Value::as_array)
    {
        let text: String = parts
            .iter()
            .filter_map(|p| p.get("text").and_then(Value::as_str))
            .collect();
        if !text.is_empty() {
            return Some(text);
        }
    }
    None
}

fn excerpt(body: &str) -> String {
    let trimmed = body.trim();
    let cut = trimmed
        .char_indices()
        .nth(BODY_EXCERPT_LEN)
        .map(|(i, _)| i)
        .unwrap_or(trimmed.len());
    trimmed[..cut].to_string()
}

#[async_trait]
impl Provider for HttpChatProvider {
    fn name(&self) -> &'static str {
        "http_chat"
    }

    async fn complete_once(&self, prompt: &RenderedPrompt) -> Result<ProviderResponse, AttemptError> {
        let payload = json!({
            "model": self.model_name,
            "messages": [{"role": "user", "content": prompt.text}],
            "temperature": self.temperature,
            "max_tokens": self.max_output_tokens,
        });
        let mut request = self.http.post(&self.endpoint).json(&payload);
        if let Some(token) = &self.bearer_token {
            request = request.bearer_auth(token);
        }
        let response = request.send().await.map_err(|e| AttemptError {
            message: format!("request error: {e}"),
            transient: e.is_timeout() || e.is_connect(),
        })?;

        let status = response.status();
        let body = response.text().await.map_err(|e| AttemptError {
            message: format!("reading response body: {e}"),
            transient: e.is_timeout(),
        })?;
        if !status.is_success() {
            let transient = status.as_u16() == 429 || status.is_server_error();
            return Err(AttemptError {
                message: format!("HTTP {}: {}", status.as_u16(), excerpt(&body)),
                transient,
            });
        }

        let parsed: Value = serde_json::from_str(&body).map_err(|e| AttemptError {
            message: format!("response is not JSON ({e}): {}", excerpt(&body)),
            transient: false,
        })?;
        let raw_text = extract_text(&parsed).ok_or_else(|| AttemptError {
            message: format!("no text candidate in response: {}", excerpt(&body)),
            transient: false,
        })?;

        let mut meta = BTreeMap::new();
        for (key, pointer) in [
            ("finish_reason", "/choices/0/finish_reason"),
            ("model", "/model"),
        ] {
            if let Some(v) = parsed.pointer(pointer).and_then(Value::as_str) {
                meta.insert(key.to_string(), v.to_string());
            }
        }
        Ok(ProviderResponse { raw_text, meta })
    }
}
