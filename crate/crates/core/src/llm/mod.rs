//! Chat-completion backends (live HTTP, mock, replay), the response cache,
//! and model-based symbol conversion.

mod cache;
mod live;
mod mock;
mod prompt;

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use cache::{CacheStats, ResponseCache};
pub use live::LiveBackend;
pub use mock::MockBackend;
pub use prompt::{convert_with_model, kind_for_task, ConversionPrompt};

pub use crate::problem::{ChatMessage, Role};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_tokens: Option<u32>,
}

impl CompletionRequest {
    /// Temperature 0, no token cap.
    pub fn new(model: impl Into<String>, messages: Vec<ChatMessage>) -> Self {
        CompletionRequest {
            model: model.into(),
            messages,
            temperature: 0.0,
            max_tokens: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.model.is_empty() {
            return Err(Error::arg("request has no model identifier"));
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(Error::arg(format!("temperature {} must be >= 0", self.temperature)));
        }
        if self.max_tokens == Some(0) {
            return Err(Error::arg("max_tokens must be positive"));
        }
        if !self.messages.iter().any(|m| m.role == Role::User) {
            return Err(Error::arg("request has no user message"));
        }
        if self.messages.iter().any(|m| m.content.is_empty()) {
            return Err(Error::arg("request has a message with empty content"));
        }
        Ok(())
    }

    pub fn last_user_text(&self) -> &str {
        self.messages
            .iter()
            .rev()
            .find(|m| m.role == Role::User)
            .map(|m| m.content.as_str())
            .unwrap_or_default()
    }
}

#[derive(Serialize)]
struct KeyMaterial<'a> {
    model: &'a str,
    messages: Vec<(&'a str, &'a str)>,
    temperature_bits: u64,
    max_tokens: Option<u32>,
}

/// Hex SHA-256 over a fixed-order encoding of the request content.
pub fn cache_key(request: &CompletionRequest) -> String {
    let material = KeyMaterial {
        model: &request.model,
        messages: request
            .messages
            .iter()
            .map(|m| (m.role.as_str(), m.content.as_str()))
            .collect(),
        // -0.0 and 0.0 are the same request
        temperature_bits: (request.temperature + 0.0).to_bits(),
        max_tokens: request.max_tokens,
    };
    let bytes = serde_json::to_vec(&material).expect("key material serializes");
    hex::encode(Sha256::digest(&bytes))
}

pub enum Backend {
    Live(LiveBackend),
    Mock(MockBackend),
    Replay { cache: ResponseCache, strict: bool },
}

impl fmt::Debug for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind())
    }
}

impl Backend {
    pub fn replay(cache: ResponseCache, strict: bool) -> Self {
        Backend::Replay { cache, strict }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Backend::Live(_) => "live",
            Backend::Mock(_) => "mock",
            Backend::Replay { .. } => "replay",
        }
    }

    pub fn cache(&self) -> Option<&ResponseCache> {
        match self {
            Backend::Live(live) => live.cache(),
            Backend::Mock(mock) => mock.cache(),
            Backend::Replay { cache, .. } => Some(cache),
        }
    }

    pub fn is_strict_replay(&self) -> bool {
        matches!(self, Backend::Replay { strict: true, .. })
    }

    pub fn complete(&self, request: &CompletionRequest) -> Result<String> {
        request.validate()?;
        match self {
            Backend::Live(live) => live.complete(request),
            Backend::Mock(mock) => mock.complete(request),
            Backend::Replay { cache, .. } => {
                let key = cache_key(request);
                match cache.get(&key)? {
                    Some(text) => Ok(text),
                    None => Err(Error::CacheMiss(key)),
                }
            }
        }
    }
}

/// Send one request through a backend and return the assistant text.
pub fn complete(request: &CompletionRequest, backend: &Backend) -> Result<String> {
    backend.complete(request)
}
