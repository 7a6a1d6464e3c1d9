//! Prompt dispatch: providers, retries, response caching and bounded
//! concurrency.
//!
//! [`Client`] owns the policy; [`Provider`] implementations perform exactly
//! one completion attempt. The client consults the cache first, retries
//! transient failures with exponential backoff (delays `base`, `2×base`,
//! `4×base`, …), persists successes, and dispatches batches with at most
//! `concurrency_limit` requests in flight while preserving input order.

mod cache;
mod http;
mod mock;

pub use cache::{cache_key, CacheEntry, CacheError, ResponseCache};
pub use http::HttpChatProvider;
pub use mock::{mock_answer, mock_emotions, MockLexicon, MOCK_LEXICON};

use crate::prompt::RenderedPrompt;
use async_trait::async_trait;
use futures::StreamExt;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};
use thiserror::Error;

/// Provider implementations selectable in config.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    HttpChat,
    MockLexicon,
}

/// Request parameters for one provider/model pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderConfig {
    pub kind: ProviderKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_name: Option<String>,
    /// Name of the environment variable holding the API key. The key itself
    /// never appears in config or snapshots.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auth_env_var: Option<String>,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_max_output_tokens")]
    pub max_output_tokens: u32,
    #[serde(default = "default_request_timeout_secs")]
    pub request_timeout_secs: f64,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    #[serde(default = "default_base_backoff_secs")]
    pub base_backoff_secs: f64,
}

fn default_max_output_tokens() -> u32 {
    256
}
fn default_request_timeout_secs() -> f64 {
    30.0
}
fn default_max_retries() -> u32 {
    3
}
fn default_base_backoff_secs() -> f64 {
    0.5
}

impl ProviderConfig {
    pub fn mock_lexicon() -> Self {
        ProviderConfig {
            kind: ProviderKind::MockLexicon,
            endpoint: None,
            model_name: None,
            auth_env_var: None,
            temperature: 0.0,
            max_output_tokens: default_max_output_tokens(),
            request_timeout_secs: default_request_timeout_secs(),
            max_retries: default_max_retries(),
            base_backoff_secs: default_base_backoff_secs(),
        }
    }

    pub fn http_chat(endpoint: &str, model_name: &str) -> Self {
        ProviderConfig {
            kind: ProviderKind::HttpChat,
            endpoint: Some(endpoint.to_string()),
            model_name: Some(model_name.to_string()),
            ..Self::mock_lexicon()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.kind == ProviderKind::HttpChat {
            if self.endpoint.is_none() {
                return Err("http_chat provider requires `endpoint`".to_string());
            }
            if self.model_name.is_none() {
                return Err("http_chat provider requires `model_name`".to_string());
            }
        }
        if self.temperature < 0.0 || !self.temperature.is_finite() {
            return Err(format!("temperature must be ≥ 0, got {}", self.temperature));
        }
        if self.max_output_tokens == 0 {
            return Err("max_output_tokens must be positive".to_string());
        }
        if !self.request_timeout_secs.is_finite() || self.request_timeout_secs <= 0.0 {
            return Err("request_timeout_secs must be positive".to_string());
        }
        if self.base_backoff_secs < 0.0 || !self.base_backoff_secs.is_finite() {
            return Err("base_backoff_secs must be ≥ 0".to_string());
        }
        Ok(())
    }

    /// Model identity used for cache addressing.
    pub fn cache_model_name(&self) -> &str {
        self.model_name.as_deref().unwrap_or("mock_lexicon")
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            ProviderKind::HttpChat => "http_chat",
            ProviderKind::MockLexicon => "mock_lexicon",
        }
    }
}

/// One completed (or replayed) prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletionResult {
    pub raw_text: String,
    pub latency_ms: u64,
    /// Provider attempts spent; 0 for cache hits.
    pub attempt_count: u32,
    pub from_cache: bool,
    pub provider_meta: BTreeMap<String, String>,
}

/// Failure of a single provider attempt.
#[derive(Debug, Clone)]
pub struct AttemptError {
    pub message: String,
    /// Transient failures (429, 5xx, timeout, connect) are retried.
    pub transient: bool,
}

/// Raw output of a successful provider attempt.
#[derive(Debug, Clone)]
pub struct ProviderResponse {
    pub raw_text: String,
    pub meta: BTreeMap<String, String>,
}

/// One completion attempt against some backend. Implementations must be
/// shareable across concurrent calls.
#[async_trait]
pub trait Provider: Send + Sync {
    fn name(&self) -> &str;
    async fn complete_once(&self, prompt: &RenderedPrompt)
        -> Result<ProviderResponse, AttemptError>;
}

#[derive(Debug, Error)]
pub enum CompletionError {
    #[error("provider setup: {0}")]
    Setup(String),
    #[error("fatal provider error on attempt {attempt}: {message}")]
    Fatal { attempt: u32, message: String },
    #[error("retries exhausted after {attempts} attempts; last error: {last}")]
    RetriesExhausted {
        attempts: u32,
        last: String,
        /// One line per failed attempt, oldest first.
        history: Vec<String>,
    },
    #[error(transparent)]
    Cache(#[from] CacheError),
}

/// Counters observed across one client's lifetime.
#[derive(Debug, Default)]
pub struct DispatchStats {
    provider_calls: AtomicU64,
    cache_hits: AtomicU64,
    in_flight: AtomicU64,
    peak_in_flight: AtomicU64,
}

impl DispatchStats {
    /// Provider attempts actually dispatched (cache hits excluded).
    pub fn provider_calls(&self) -> u64 {
        self.provider_calls.load(Ordering::SeqCst)
    }

    pub fn cache_hits(&self) -> u64 {
        self.cache_hits.load(Ordering::SeqCst)
    }

    /// Highest number of provider attempts open at the same instant.
    pub fn peak_in_flight(&self) -> u64 {
        self.peak_in_flight.load(Ordering::SeqCst)
    }
}

/// Decrements the in-flight gauge even on unwind.
struct InFlightGuard<'a>(&'a DispatchStats);

impl<'a> InFlightGuard<'a> {
    fn enter(stats: &'a DispatchStats) -> Self {
        let open = stats.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
        stats.peak_in_flight.fetch_max(open, Ordering::SeqCst);
        InFlightGuard(stats)
    }
}

impl Drop for InFlightGuard<'_> {
    fn drop(&mut self) {
        self.0.in_flight.fetch_sub(1, Ordering::SeqCst);
    }
}

/// Cache-aware, retrying dispatcher over one provider.
pub struct Client {
    config: ProviderConfig,
    provider: Arc<dyn Provider>,
    cache: Option<Arc<ResponseCache>>,
    stats: Arc<DispatchStats>,
}

impl Client {
    /// Builds the provider named by `config`. For `http_chat` this resolves
    /// the auth environment variable, so a missing key fails here — before
    /// any network call.
    pub fn from_config(
        config: &ProviderConfig,
        cache: Option<ResponseCache>,
    ) -> Result<Self, CompletionError> {
        config.validate().map_err(CompletionError::Setup)?;
        let provider: Arc<dyn Provider> = match config.kind {
            ProviderKind::MockLexicon => Arc::new(MockLexicon::new()),
            ProviderKind::HttpChat => Arc::new(
                HttpChatProvider::new(config).map_err(|e| CompletionError::Setup(e.message))?,
            ),
        };
        Ok(Self::with_provider(config.clone(), provider, cache))
    }

    /// Uses a caller-supplied provider (test doubles, pre-warmed mocks).
    pub fn with_provider(
        config: ProviderConfig,
        provider: Arc<dyn Provider>,
        cache: Option<ResponseCache>,
    ) -> Self {
        Client {
            config,
            provider,
            cache: cache.map(Arc::new),
            stats: Arc::new(DispatchStats::default()),
        }
    }

    pub fn stats(&self) -> &DispatchStats {
        &self.stats
    }

    pub fn config(&self) -> &ProviderConfig {
        &self.config
    }

    fn key_for(&self, prompt: &RenderedPrompt) -> String {
        cache_key(
            self.config.cache_model_name(),
            &prompt.content_hash,
            self.config.temperature,
            self.config.max_output_tokens,
        )
    }

    /// Completes one prompt: cache first, then up to `max_retries + 1`
    /// provider attempts with exponential backoff on transient failures.
    pub async fn complete(
        &self,
        prompt: &RenderedPrompt,
    ) -> Result<CompletionResult, CompletionError> {
        let key = self.key_for(prompt);
        if let Some(cache) = &self.cache {
            if let Some(entry) = cache.get(&key) {
                self.stats.cache_hits.fetch_add(1, Ordering::SeqCst);
                return Ok(CompletionResult {
                    raw_text: entry.raw_text,
                    latency_ms: 0,
                    attempt_count: 0,
                    from_cache: true,
                    provider_meta: entry.meta,
                });
            }
        }

        let started = Instant::now();
        let max_attempts = self.config.max_retries + 1;
        let mut history = Vec::new();
        for attempt in 1..=max_attempts {
            let outcome = {
                let _guard = InFlightGuard::enter(&self.stats);
                let outcome = self.provider.complete_once(prompt).await;
                self.stats.provider_calls.fetch_add(1, Ordering::SeqCst);
                outcome
            };
            match outcome {
                Ok(response) => {
                    if let Some(cache) = &self.cache {
                        cache.put(&key, &response.raw_text, response.meta.clone())?;
                    }
                    return Ok(CompletionResult {
                        raw_text: response.raw_text,
                        latency_ms: started.elapsed().as_millis() as u64,
                        attempt_count: attempt,
                        from_cache: false,
                        provider_meta: response.meta,
                    });
                }
                Err(error) if error.transient && attempt < max_attempts => {
                    history.push(format!("attempt {attempt}: {}", error.message));
                    let delay = self.config.base_backoff_secs * 2f64.powi(attempt as i32 - 1);
                    tokio::time::sleep(Duration::from_secs_f64(delay)).await;
                }
                Err(error) if error.transient => {
                    history.push(format!("attempt {attempt}: {}", error.message));
                    return Err(CompletionError::RetriesExhausted {
                        attempts: max_attempts,
                        last: error.message,
                        history,
                    });
                }
                Err(error) => {
                    return Err(CompletionError::Fatal {
                        attempt,
                        message: error.message,
                    });
                }
            }
        }
        unreachable!("retry loop always returns")
    }

    /// Completes a batch with at most `concurrency_limit` prompts in flight.
    /// Results come back in input order; a failed slot carries its error and
    /// never aborts the rest.
    pub async fn run_batch(
        &self,
        prompts: &[RenderedPrompt],
        concurrency_limit: usize,
    ) -> Vec<Result<CompletionResult, CompletionError>> {
        assert!(concurrency_limit >= 1, "concurrency_limit must be ≥ 1");
        futures::stream::iter(prompts.iter().map(|p| self.complete(p)))
            .buffered(concurrency_limit)
            .collect()
            .await
    }
}
