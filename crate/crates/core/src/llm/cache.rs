use std::fs;
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use serde::Serialize;

use super::CompletionRequest;
use crate::error::{Error, Result};

/// Hit/miss counters for one cache handle.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CacheStats {
    pub hits: u64,
    pub misses: u64,
}

impl CacheStats {
    pub fn hit_rate(&self) -> Option<f64> {
        let total = self.hits + self.misses;
        (total > 0).then(|| self.hits as f64 / total as f64)
    }
}

#[derive(Serialize)]
struct Sidecar<'a> {
    key: &'a str,
    model: &'a str,
    temperature: f64,
    max_tokens: Option<u32>,
    messages: &'a [crate::problem::ChatMessage],
    response_bytes: usize,
}

/// One file per request digest: `<key>.txt` holds the raw assistant text and
/// `<key>.json` the request metadata. The first stored response for a key is
/// kept; later writes for the same key are discarded.
#[derive(Debug)]
pub struct ResponseCache {
    dir: PathBuf,
    writer: Mutex<()>,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl ResponseCache {
    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(ResponseCache {
            dir,
            writer: Mutex::new(()),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn body_path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.txt"))
    }

    pub fn get(&self, key: &str) -> Result<Option<String>> {
        let path = self.body_path(key);
        match fs::read_to_string(&path) {
            Ok(text) => {
                self.hits.fetch_add(1, Ordering::Relaxed);
                Ok(Some(text))
            }
            Err(e) if e.kind() == ErrorKind::NotFound => {
                self.misses.fetch_add(1, Ordering::Relaxed);
                Ok(None)
            }
            Err(e) => Err(Error::io(path, e)),
        }
    }

    /// Stores a response unless one already exists. Returns whether it was stored.
    pub fn put(&self, key: &str, request: &CompletionRequest, text: &str) -> Result<bool> {
        let _guard = self.writer.lock().unwrap_or_else(|p| p.into_inner());
        let body = self.body_path(key);
        if body.exists() {
            return Ok(false);
        }
        let sidecar = Sidecar {
            key,
            model: &request.model,
            temperature: request.temperature,
            max_tokens: request.max_tokens,
            messages: &request.messages,
            response_bytes: text.len(),
        };
        let meta_path = self.dir.join(format!("{key}.json"));
        let meta = serde_json::to_vec_pretty(&sidecar)?;
        fs::write(&meta_path, meta).map_err(|e| Error::io(&meta_path, e))?;

        // write-then-link so readers never see a partial body and other
        // processes sharing the directory cannot overwrite the first entry
        let tmp = self.dir.join(format!(".{key}.{}.tmp", std::process::id()));
        let mut file = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        file.write_all(text.as_bytes()).map_err(|e| Error::io(&tmp, e))?;
        file.sync_all().map_err(|e| Error::io(&tmp, e))?;
        drop(file);
        let stored = match fs::hard_link(&tmp, &body) {
            Ok(()) => true,
            Err(e) if e.kind() == ErrorKind::AlreadyExists => false,
            Err(e) => {
                let _ = fs::remove_file(&tmp);
                return Err(Error::io(&body, e));
            }
        };
        let _ = fs::remove_file(&tmp);
        Ok(stored)
    }

    pub fn stats(&self) -> CacheStats {
        CacheStats {
            hits: self.hits.load(Ordering::Relaxed),
            misses: self.misses.load(Ordering::Relaxed),
        }
    }

    /// Number of cached responses on disk.
    pub fn len(&self) -> Result<usize> {
        let entries = fs::read_dir(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        Ok(entries
            .filter_map(|e| e.ok())
            .filter(|e| {
                let name = e.file_name();
                let name = name.to_string_lossy();
                name.ends_with(".txt") && !name.starts_with('.')
            })
            .count())
    }

    pub fn is_empty(&self) -> Result<bool> {
        Ok(self.len()? == 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::ChatMessage;

    #[test]
    fn first_write_wins() {
        let dir = tempfile::tempdir().unwrap();
        let cache = ResponseCache::open(dir.path()).unwrap();
        let req = CompletionRequest::new("m", vec![ChatMessage::user("q").unwrap()]);
        assert_eq!(cache.get("k").unwrap(), None);
        assert!(cache.put("k", &req, "first").unwrap());
        assert!(!cache.put("k", &req, "second").unwrap());
        assert_eq!(cache.get("k").unwrap().as_deref(), Some("first"));
        assert_eq!(cache.stats(), CacheStats { hits: 1, misses: 1 });
        assert_eq!(cache.len().unwrap(), 1);
        assert!(dir.path().join("k.json").exists());
    }

    #[test]
    fn concurrent_writers_keep_one_entry() {
        let dir = tempfile::tempdir().unwrap();
        let cache = ResponseCache::open(dir.path()).unwrap();
        let req = CompletionRequest::new("m", vec![ChatMessage::user("q").unwrap()]);
        let stored: usize = std::thread::scope(|s| {
            let handles: Vec<_> = (0..8)
                .map(|i| {
                    let cache = &cache;
                    let req = &req;
                    s.spawn(move || cache.put("k", req, &format!("reply {i}")).unwrap() as usize)
                })
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).sum()
        });
        assert_eq!(stored, 1);
        assert!(cache.get("k").unwrap().unwrap().starts_with("reply "));
    }
}
