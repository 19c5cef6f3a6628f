use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{cache_key, CompletionRequest, ResponseCache};
use crate::error::{Error, Result};
use crate::problem::ChatMessage;

/// OpenAI-style chat-completions client with bounded retries and an
/// optional read-through/write-through response cache.
pub struct LiveBackend {
    endpoint: String,
    token: String,
    agent: ureq::Agent,
    cache: Option<ResponseCache>,
    max_attempts: u32,
    backoff: Duration,
}

impl fmt::Debug for LiveBackend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LiveBackend")
            .field("endpoint", &self.endpoint)
            .field("max_attempts", &self.max_attempts)
            .finish_non_exhaustive()
    }
}

#[derive(Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    messages: &'a [ChatMessage],
    temperature: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_tokens: Option<u32>,
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireMessage,
}

#[derive(Deserialize)]
struct WireMessage {
    #[serde(default)]
    content: Option<String>,
}

enum Attempt {
    Done(String),
    Retry(Error),
    Fail(Error),
}

impl LiveBackend {
    pub fn new(endpoint: impl Into<String>, token: impl Into<String>) -> Result<Self> {
        let endpoint = endpoint.into();
        let token = token.into();
        if endpoint.is_empty() {
            return Err(Error::Config("live backend needs an endpoint URL".into()));
        }
        if token.is_empty() {
            return Err(Error::Config("live backend needs an auth token".into()));
        }
        let config = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(180)))
            .build();
        Ok(LiveBackend {
            endpoint,
            token,
            agent: ureq::Agent::new_with_config(config),
            cache: None,
            max_attempts: 3,
            backoff: Duration::from_secs(1),
        })
    }

    /// Reads the bearer token from the named environment variable.
    pub fn from_env(endpoint: impl Into<String>, token_var: &str) -> Result<Self> {
        let token = std::env::var(token_var)
            .map_err(|_| Error::Config(format!("environment variable {token_var} is not set")))?;
        Self::new(endpoint, token)
    }

    pub fn with_cache(mut self, cache: ResponseCache) -> Self {
        self.cache = Some(cache);
        self
    }

    /// Initial backoff, doubled after each failed attempt.
    pub fn with_backoff(mut self, backoff: Duration) -> Self {
        self.backoff = backoff;
        self
    }

    pub fn with_max_attempts(mut self, attempts: u32) -> Self {
        self.max_attempts = attempts.max(1);
        self
    }

    pub fn cache(&self) -> Option<&ResponseCache> {
        self.cache.as_ref()
    }

    pub(super) fn complete(&self, request: &CompletionRequest) -> Result<String> {
        let key = cache_key(request);
        if let Some(cache) = &self.cache {
            if let Some(hit) = cache.get(&key)? {
                return Ok(hit);
            }
        }
        let mut delay = self.backoff;
        let mut attempt = 1;
        let text = loop {
            match self.attempt(request) {
                Attempt::Done(text) => break text,
                Attempt::Fail(e) => return Err(e),
                Attempt::Retry(e) if attempt >= self.max_attempts => return Err(e),
                Attempt::Retry(_) => {
                    std::thread::sleep(delay);
                    delay *= 2;
                    attempt += 1;
                }
            }
        };
        if text.is_empty() {
            return Err(Error::EmptyResponse);
        }
        if let Some(cache) = &self.cache {
            cache.put(&key, request, &text)?;
        }
        Ok(text)
    }

    fn attempt(&self, request: &CompletionRequest) -> Attempt {
        let body = WireRequest {
            model: &request.model,
            messages: &request.messages,
            temperature: request.temperature,
            max_tokens: request.max_tokens,
        };
        let response = self
            .agent
            .post(&self.endpoint)
            .header("Authorization", &format!("Bearer {}", self.token))
            .send_json(&body);
        let mut response = match response {
            Ok(r) => r,
            Err(e) => {
                return Attempt::Retry(Error::Backend {
                    status: None,
                    message: e.to_string(),
                })
            }
        };
        let status = response.status().as_u16();
        if !(200..300).contains(&status) {
            let detail = response.body_mut().read_to_string().unwrap_or_default();
            let err = Error::Backend {
                status: Some(status),
                message: detail.chars().take(500).collect(),
            };
            return if status == 429 || status >= 500 {
                Attempt::Retry(err)
            } else {
                Attempt::Fail(err)
            };
        }
        match response.body_mut().read_json::<WireResponse>() {
            Ok(parsed) => match parsed.choices.into_iter().next() {
                Some(choice) => Attempt::Done(choice.message.content.unwrap_or_default()),
                None => Attempt::Fail(Error::Backend {
                    status: Some(status),
                    message: "response has no choices".into(),
                }),
            },
            Err(e) => Attempt::Fail(Error::Backend {
                status: Some(status),
                message: format!("malformed response body: {e}"),
            }),
        }
    }
}
