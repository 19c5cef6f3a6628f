use std::collections::HashMap;
use std::path::Path;
use std::sync::RwLock;

use super::{cache_key, CompletionRequest, ResponseCache};
use crate::error::{Error, Result};

/// Answers from a fixture map keyed by the last user message.
///
/// With a cache attached it behaves like a live backend: cached replies are
/// served first and fresh replies are written through.
#[derive(Debug, Default)]
pub struct MockBackend {
    fixtures: RwLock<HashMap<String, String>>,
    cache: Option<ResponseCache>,
}

impl MockBackend {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I, K, V>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        let mock = Self::new();
        for (k, v) in pairs {
            mock.insert(k, v);
        }
        mock
    }

    /// Loads a JSON object mapping prompt text to reply text.
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let map: HashMap<String, String> = serde_json::from_str(&text)?;
        Ok(Self::from_pairs(map))
    }

    pub fn with_cache(mut self, cache: ResponseCache) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn cache(&self) -> Option<&ResponseCache> {
        self.cache.as_ref()
    }

    /// Registers a reply. An existing entry for the same prompt is kept.
    pub fn insert(&self, prompt: impl Into<String>, reply: impl Into<String>) -> bool {
        let mut map = self.fixtures.write().unwrap_or_else(|p| p.into_inner());
        let prompt = prompt.into();
        if map.contains_key(&prompt) {
            return false;
        }
        map.insert(prompt, reply.into());
        true
    }

    pub fn len(&self) -> usize {
        self.fixtures.read().unwrap_or_else(|p| p.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub(super) fn complete(&self, request: &CompletionRequest) -> Result<String> {
        let key = self.cache.as_ref().map(|_| cache_key(request));
        if let (Some(cache), Some(key)) = (&self.cache, &key) {
            if let Some(hit) = cache.get(key)? {
                return Ok(hit);
            }
        }
        let prompt = request.last_user_text();
        let reply = self
            .fixtures
            .read()
            .unwrap_or_else(|p| p.into_inner())
            .get(prompt)
            .cloned()
            .ok_or_else(|| Error::MockMiss(prompt.chars().take(80).collect()))?;
        if reply.is_empty() {
            return Err(Error::EmptyResponse);
        }
        if let (Some(cache), Some(key)) = (&self.cache, &key) {
            cache.put(key, request, &reply)?;
        }
        Ok(reply)
    }
}
