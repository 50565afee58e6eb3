//! Minimal chat-completion client over the generic wire shape: a messages
//! array with a single user turn, temperature/top-p/max-token controls, and
//! an opaque `reasoning_effort` passthrough for providers that accept one.

use std::time::Duration;

use serde::Deserialize;
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("authentication rejected (HTTP {0}); aborting the run")]
    Auth(u16),
    #[error("transport failure after {attempts} attempts: {message}")]
    Transport { attempts: u32, message: String },
    #[error("malformed provider response: {0}")]
    BadResponse(String),
    #[error("invalid provider config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub initial_backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { max_attempts: 3, initial_backoff: Duration::from_millis(250) }
    }
}

/// Connection and sampling parameters for one provider.
#[derive(Debug, Clone, PartialEq)]
pub struct ProviderConfig {
    pub endpoint: String,
    pub model: String,
    /// Name of the environment variable holding the API key, if any.
    pub api_key_env: Option<String>,
    pub max_output_tokens: u32,
    pub temperature: f64,
    pub top_p: f64,
    /// Passed through verbatim when set (provider-specific).
    pub reasoning_effort: Option<String>,
    pub max_concurrency: usize,
    pub timeout: Duration,
    pub retry: RetryPolicy,
}

impl ProviderConfig {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        ProviderConfig {
            endpoint: endpoint.into(),
            model: model.into(),
            api_key_env: None,
            max_output_tokens: 25_000,
            temperature: 0.6,
            top_p: 0.7,
            reasoning_effort: None,
            max_concurrency: 1,
            timeout: Duration::from_secs(300),
            retry: RetryPolicy::default(),
        }
    }

    pub fn validate(&self) -> Result<(), ClientError> {
        if self.max_concurrency == 0 {
            return Err(ClientError::Config("max_concurrency must be at least 1".into()));
        }
        if self.timeout.is_zero() {
            return Err(ClientError::Config("timeout must be positive".into()));
        }
        if self.retry.max_attempts == 0 {
            return Err(ClientError::Config("retry.max_attempts must be at least 1".into()));
        }
        Ok(())
    }
}

/// One completed exchange.
#[derive(Debug, Clone)]
pub struct ChatResponse {
    pub content: String,
    /// Provider-reported completion tokens; 0 when usage is absent.
    pub output_tokens: u64,
}

#[derive(Debug, Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
    #[serde(default)]
    usage: Option<WireUsage>,
}

#[derive(Debug, Deserialize)]
struct WireChoice {
    message: WireMessage,
}

#[derive(Debug, Deserialize)]
struct WireMessage {
    content: String,
}

#[derive(Debug, Deserialize)]
struct WireUsage {
    #[serde(default)]
    completion_tokens: Option<u64>,
    #[serde(default)]
    output_tokens: Option<u64>,
}

pub struct ChatClient {
    cfg: ProviderConfig,
    api_key: Option<String>,
    http: reqwest::blocking::Client,
}

impl ChatClient {
    pub fn new(cfg: ProviderConfig) -> Result<Self, ClientError> {
        cfg.validate()?;
        let api_key = match &cfg.api_key_env {
            Some(var) => Some(std::env::var(var).map_err(|_| {
                ClientError::Config(format!("api key environment variable {var} is not set"))
            })?),
            None => None,
        };
        let http = reqwest::blocking::Client::builder()
            .timeout(cfg.timeout)
            .build()
            .map_err(|e| ClientError::Config(e.to_string()))?;
        Ok(ChatClient { cfg, api_key, http })
    }

    pub fn config(&self) -> &ProviderConfig {
        &self.cfg
    }

    /// Send one prompt as a single user turn, retrying transport failures
    /// with exponential backoff. Authentication rejections abort at once.
    pub fn complete(&self, prompt: &str) -> Result<ChatResponse, ClientError> {
        let mut body = json!({
            "model": self.cfg.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.cfg.temperature,
            "top_p": self.cfg.top_p,
            "max_tokens": self.cfg.max_output_tokens,
        });
        if let Some(effort) = &self.cfg.reasoning_effort {
            body["reasoning_effort"] = json!(effort);
        }

        let mut backoff = self.cfg.retry.initial_backoff;
        let mut last_error = String::new();
        for attempt in 1..=self.cfg.retry.max_attempts {
            if attempt > 1 {
                std::thread::sleep(backoff);
                backoff *= 2;
            }
            let mut request = self.http.post(&self.cfg.endpoint).json(&body);
            if let Some(key) = &self.api_key {
                request = request.bearer_auth(key);
            }
            match request.send() {
                Err(e) => last_error = e.to_string(),
                Ok(resp) => {
                    let status = resp.status();
                    if status.as_u16() == 401 || status.as_u16() == 403 {
                        return Err(ClientError::Auth(status.as_u16()));
                    }
                    if status.is_server_error() || status.as_u16() == 429 {
                        last_error = format!("HTTP {status}");
                        continue;
                    }
                    if !status.is_success() {
                        return Err(ClientError::BadResponse(format!("HTTP {status}")));
                    }
                    let wire: WireResponse = resp
                        .json()
                        .map_err(|e| ClientError::BadResponse(e.to_string()))?;
                    let choice = wire
                        .choices
                        .into_iter()
                        .next()
                        .ok_or_else(|| ClientError::BadResponse("no choices".into()))?;
                    let output_tokens = wire
                        .usage
                        .and_then(|u| u.completion_tokens.or(u.output_tokens))
                        .unwrap_or(0);
                    return Ok(ChatResponse { content: choice.message.content, output_tokens });
                }
            }
        }
        Err(ClientError::Transport {
            attempts: self.cfg.retry.max_attempts,
            message: last_error,
        })
    }
}
