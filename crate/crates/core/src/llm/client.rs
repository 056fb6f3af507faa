//! Blocking client for OpenAI-style `/chat/completions` endpoints.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::thread;
use std::time::Duration;

use log::{debug, warn};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LlmClientConfig {
    /// Full URL of the chat-completions route.
    pub endpoint_url: String,
    pub model_name: String,
    /// Environment variable holding the bearer token.
    pub api_key_env_var: String,
    #[serde(with = "secs")]
    pub timeout: Duration,
    pub max_retries: u32,
    pub temperature: f64,
    /// Delay before the first retry; doubles on each further retry.
    #[serde(with = "secs")]
    pub initial_backoff: Duration,
}

impl Default for LlmClientConfig {
    fn default() -> Self {
        Self {
            endpoint_url: "https://api.openai.com/v1/chat/completions".into(),
            model_name: "gpt-4o-mini".into(),
            api_key_env_var: "OPENAI_API_KEY".into(),
            timeout: Duration::from_secs(30),
            max_retries: 3,
            temperature: 0.0,
            initial_backoff: Duration::from_millis(500),
        }
    }
}

mod secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let v = f64::deserialize(d)?;
        Duration::try_from_secs_f64(v).map_err(serde::de::Error::custom)
    }
}

const MAX_BACKOFF: Duration = Duration::from_secs(30);

enum Failure {
    Retryable(String),
    Fatal(String),
}

pub struct LlmClient {
    config: LlmClientConfig,
    api_key: String,
    agent: ureq::Agent,
    calls: AtomicUsize,
}

impl std::fmt::Debug for LlmClient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LlmClient")
            .field("config", &self.config)
            .field("calls", &self.calls)
            .finish_non_exhaustive()
    }
}

impl LlmClient {
    /// Reads the API key from the configured environment variable.
    pub fn from_env(config: LlmClientConfig) -> Result<Self> {
        let api_key = std::env::var(&config.api_key_env_var).map_err(|_| {
            Error::Config(format!("API key variable `{}` is not set", config.api_key_env_var))
        })?;
        Ok(Self::with_key(config, api_key))
    }

    pub fn with_key(config: LlmClientConfig, api_key: impl Into<String>) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            config,
            api_key: api_key.into(),
            agent,
            calls: AtomicUsize::new(0),
        }
    }

    pub fn config(&self) -> &LlmClientConfig {
        &self.config
    }

    /// Number of completed `complete` calls, successful or not.
    pub fn call_count(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }

    /// Sends `prompt` as a single user message and returns the assistant text.
    pub fn complete(&self, prompt: &str) -> Result<String> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        let body = json!({
            "model": self.config.model_name,
            "temperature": self.config.temperature,
            "messages": [{ "role": "user", "content": prompt }],
        });

        let mut backoff = self.config.initial_backoff;
        let mut attempt = 0;
        loop {
            attempt += 1;
            match self.attempt(&body) {
                Ok(text) => return Ok(text),
                Err(Failure::Fatal(detail)) => {
                    return Err(Error::Transport { attempts: attempt, detail });
                }
                Err(Failure::Retryable(detail)) => {
                    if attempt > self.config.max_retries {
                        return Err(Error::Transport { attempts: attempt, detail });
                    }
                    warn!("LLM request attempt {attempt} failed ({detail}); retrying in {backoff:?}");
                    thread::sleep(backoff);
                    backoff = (backoff * 2).min(MAX_BACKOFF);
                }
            }
        }
    }

    fn attempt(&self, body: &Value) -> std::result::Result<String, Failure> {
        let mut response = self
            .agent
            .post(&self.config.endpoint_url)
            .header("Authorization", &format!("Bearer {}", self.api_key))
            .send_json(body)
            .map_err(|e| Failure::Retryable(e.to_string()))?;
        let status = response.status().as_u16();
        let text = response
            .body_mut()
            .read_to_string()
            .map_err(|e| Failure::Retryable(format!("reading body: {e}")))?;
        debug!("LLM endpoint answered HTTP {status} with {} bytes", text.len());

        if status == 429 || status >= 500 {
            return Err(Failure::Retryable(format!("HTTP {status}: {}", truncate(&text))));
        }
        if !(200..300).contains(&status) {
            return Err(Failure::Fatal(format!("HTTP {status}: {}", truncate(&text))));
        }
        if text.trim().is_empty() {
            return Err(Failure::Retryable("empty response body".into()));
        }
        extract_content(&text).map_err(Failure::Fatal)
    }
}

fn truncate(s: &str) -> &str {
    match s.char_indices().nth(200) {
        Some((i, _)) => &s[..i],
        None => s,
    }
}

/// Pulls `choices[0].message.content` out of a completion response.
pub fn extract_content(body: &str) -> std::result::Result<String, String> {
    let value: Value = serde_json::from_str(body).map_err(|e| format!("malformed response JSON: {e}"))?;
    let content = value
        .pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .ok_or_else(|| "response has no choices[0].message.content".to_string())?;
    if content.trim().is_empty() {
        return Err("empty assistant message".into());
    }
    Ok(content.to_string())
}

/// One-shot convenience over [`LlmClient::from_env`] and
/// [`LlmClient::complete`].
pub fn query_llm(cfg: &LlmClientConfig, prompt: &str) -> Result<String> {
    LlmClient::from_env(cfg.clone())?.complete(prompt)
}
