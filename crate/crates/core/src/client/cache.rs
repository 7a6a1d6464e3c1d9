//! Persistent response cache: append-only JSONL on disk, hash map in memory.
//!
//! One cache file exists per (provider kind, model) pair. Loading tolerates a
//! truncated final line — the tail of a crashed append — by discarding it;
//! malformed interior lines mean real corruption and fail the load.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::{BTreeMap, HashMap};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("cache io at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupt cache line {line} in {path}")]
    Corrupt { path: PathBuf, line: usize },
}

/// One persisted response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub key: String,
    pub raw_text: String,
    /// Provider-reported odds and ends (finish reason, upstream model id, …).
    pub meta: BTreeMap<String, String>,
    /// RFC 3339 creation timestamp; informational only.
    pub created_at: String,
}

/// Digest addressing one completion: equal inputs always map to the same
/// entry, and any change to model, prompt text, temperature or token cap
/// changes the key.
pub fn cache_key(
    model_name: &str,
    prompt_content_hash: &str,
    temperature: f64,
    max_output_tokens: u32,
) -> String {
    let mut hasher = Sha256::new();
    for part in [
        model_name,
        prompt_content_hash,
        &temperature.to_string(),
        &max_output_tokens.to_string(),
    ] {
        hasher.update(part.as_bytes());
        hasher.update([0u8]);
    }
    hex::encode(hasher.finalize())
}

/// Thread-safe cache handle: concurrent lookups, serialized appends.
#[derive(Debug)]
pub struct ResponseCache {
    path: PathBuf,
    index: RwLock<HashMap<String, CacheEntry>>,
    writer: Mutex<File>,
}

impl ResponseCache {
    /// Opens (creating if needed) the cache file for a provider/model pair
    /// under `dir` and builds the in-memory index.
    pub fn open(dir: &Path, provider_kind: &str, model_name: &str) -> Result<Self, CacheError> {
        let file_name = format!(
            "{}-{}.jsonl",
            sanitize(provider_kind),
            sanitize(model_name)
        );
        Self::open_file(&dir.join(file_name))
    }

    pub fn open_file(path: &Path) -> Result<Self, CacheError> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|source| CacheError::Io {
                path: parent.to_path_buf(),
                source,
            })?;
        }
        let io_err = |source| CacheError::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut index = HashMap::new();
        if path.exists() {
            let reader = BufReader::new(File::open(path).map_err(io_err)?);
            let lines: Vec<String> = reader
                .lines()
                .collect::<Result<_, _>>()
                .map_err(io_err)?;
            let last = lines.len();
            for (i, line) in lines.iter().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str::<CacheEntry>(line) {
                    Ok(entry) => {
                        index.insert(entry.key.clone(), entry);
                    }
                    // A torn final line is an interrupted append; drop it.
                    Err(_) if i + 1 == last => {}
                    Err(_) => {
                        return Err(CacheError::Corrupt {
                            path: path.to_path_buf(),
                            line: i + 1,
                        })
                    }
                }
            }
        }
        let writer = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(io_err)?;
        Ok(ResponseCache {
            path: path.to_path_buf(),
            index: RwLock::new(index),
            writer: Mutex::new(writer),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.index.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, key: &str) -> Option<CacheEntry> {
        self.index.read().unwrap().get(key).cloned()
    }

    /// Appends the entry to disk and publishes it to the index.
    pub fn put(
        &self,
        key: &str,
        raw_text: &str,
        meta: BTreeMap<String, String>,
    ) -> Result<(), CacheError> {
        let entry = CacheEntry {
            key: key.to_string(),
            raw_text: raw_text.to_string(),
            meta,
            created_at: chrono::Utc::now().to_rfc3339(),
        };
        let line = serde_json::to_string(&entry).expect("cache entry serializes");
        {
            let mut file = self.writer.lock().unwrap();
            file.write_all(line.as_bytes())
                .and_then(|_| file.write_all(b"\n"))
                .and_then(|_| file.flush())
                .map_err(|source| CacheError::Io {
                    path: self.path.clone(),
                    source,
                })?;
        }
        self.index.write().unwrap().insert(key.to_string(), entry);
        Ok(())
    }
}

fn sanitize(part: &str) -> String {
    let cleaned: String = part
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '-' })
        .collect();
    if cleaned.is_empty() {
        "default".to_string()
    } else {
        cleaned
    }
}
