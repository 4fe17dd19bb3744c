//! Text-generation backends: a uniform trait over hosted chat-completions
//! endpoints and deterministic local fixtures, with retry, backoff, and
//! rate limiting driven by a pluggable clock.

use std::collections::{HashMap, VecDeque};
use std::sync::{Arc, Mutex};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prompt::{PromptText, Role};

/// Default completion budget for one interactive agent turn.
pub const DEFAULT_TURN_MAX_TOKENS: u32 = 512;
/// Default completion budget for whole scripts and judge calls.
pub const DEFAULT_BULK_MAX_TOKENS: u32 = 4096;

/// Time source. Production uses [`SystemClock`]; tests use [`VirtualClock`]
/// so rate-limit and backoff behaviour is deterministic.
pub trait Clock: Send + Sync {
    fn now_ms(&self) -> u64;
    fn sleep_ms(&self, ms: u64);
}

/// Wall clock (milliseconds since the Unix epoch, real sleeps).
#[derive(Debug, Default)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now_ms(&self) -> u64 {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis() as u64)
            .unwrap_or(0)
    }

    fn sleep_ms(&self, ms: u64) {
        std::thread::sleep(Duration::from_millis(ms));
    }
}

/// Deterministic clock starting at 0; `sleep_ms` just advances it.
#[derive(Debug, Default)]
pub struct VirtualClock {
    now: Mutex<u64>,
}

impl VirtualClock {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn advance(&self, ms: u64) {
        *self.now.lock().unwrap() += ms;
    }
}

impl Clock for VirtualClock {
    fn now_ms(&self) -> u64 {
        *self.now.lock().unwrap()
    }

    fn sleep_ms(&self, ms: u64) {
        self.advance(ms);
    }
}

/// One generation request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRequest {
    pub segments: PromptText,
    pub temperature: f64,
    pub max_output_tokens: u32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stop_sequences: Vec<String>,
}

impl GenerationRequest {
    pub fn new(segments: PromptText, temperature: f64, max_output_tokens: u32) -> Self {
        assert!((0.0..=2.0).contains(&temperature), "temperature out of range: {temperature}");
        assert!(max_output_tokens >= 1, "max_output_tokens must be >= 1");
        GenerationRequest { segments, temperature, max_output_tokens, stop_sequences: Vec::new() }
    }
}

/// Token accounting reported by the provider, when available.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub prompt_tokens: Option<u64>,
    pub completion_tokens: Option<u64>,
}

/// One completed generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Completion {
    pub text: String,
    pub usage: Usage,
    pub latency_ms: u64,
}

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("auth: {0}")]
    Auth(String),
    #[error("timed out after {0} ms")]
    Timeout(u64),
    #[error("exhausted after {attempts} attempts: {last_error}")]
    Exhausted { attempts: u32, last_error: String },
    #[error("fixture exhausted: {0}")]
    FixtureExhausted(String),
    #[error("http {status}: {message}")]
    Http { status: u16, message: String },
    #[error("bad fixture file: {0}")]
    BadFixture(String),
}

/// A text-generation backend safe for concurrent calls.
pub trait TextBackend: Send + Sync {
    fn complete(&self, request: &GenerationRequest) -> Result<Completion, BackendError>;
    fn model_name(&self) -> &str;
}

impl<T: TextBackend + ?Sized> TextBackend for std::sync::Arc<T> {
    fn complete(&self, request: &GenerationRequest) -> Result<Completion, BackendError> {
        (**self).complete(request)
    }

    fn model_name(&self) -> &str {
        (**self).model_name()
    }
}

enum FixtureSource {
    Sequence { replies: Mutex<VecDeque<String>>, total: usize },
    Map(HashMap<String, String>),
}

/// Deterministic backend for tests and offline runs.
///
/// Sequence mode pops canned replies in order (one stream per backend
/// instance); map mode looks replies up by the SHA-256 of the prompt text.
/// Exhaustion and unknown prompts are errors, never silent defaults.
pub struct FixtureBackend {
    source: FixtureSource,
    model: String,
}

impl FixtureBackend {
    pub fn sequence(replies: Vec<String>, model: impl Into<String>) -> Self {
        let total = replies.len();
        FixtureBackend {
            source: FixtureSource::Sequence { replies: Mutex::new(replies.into()), total },
            model: model.into(),
        }
    }

    pub fn map(entries: HashMap<String, String>, model: impl Into<String>) -> Self {
        FixtureBackend { source: FixtureSource::Map(entries), model: model.into() }
    }

    /// Builds from a fixture JSON value: an array of strings is sequence
    /// mode, an object of `prompt-sha256 -> reply` is map mode.
    pub fn from_value(value: &serde_json::Value, model: impl Into<String>) -> Result<Self, BackendError> {
        match value {
            serde_json::Value::Array(items) => {
                let replies: Result<Vec<String>, BackendError> = items
                    .iter()
                    .map(|v| {
                        v.as_str().map(str::to_string).ok_or_else(|| {
                            BackendError::BadFixture("sequence entries must be strings".into())
                        })
                    })
                    .collect();
                Ok(Self::sequence(replies?, model))
            }
            serde_json::Value::Object(map) => {
                let mut entries = HashMap::new();
                for (k, v) in map {
                    let reply = v.as_str().ok_or_else(|| {
                        BackendError::BadFixture("map entries must be strings".into())
                    })?;
                    entries.insert(k.clone(), reply.to_string());
                }
                Ok(Self::map(entries, model))
            }
            _ => Err(BackendError::BadFixture(
                "fixture must be a JSON array (sequence) or object (map)".into(),
            )),
        }
    }

    pub fn from_file(path: &std::path::Path, model: impl Into<String>) -> Result<Self, BackendError> {
        let raw = std::fs::read_to_string(path)
            .map_err(|e| BackendError::BadFixture(format!("{}: {e}", path.display())))?;
        let value: serde_json::Value = serde_json::from_str(&raw)
            .map_err(|e| BackendError::BadFixture(format!("{}: {e}", path.display())))?;
        Self::from_value(&value, model)
    }
}

impl TextBackend for FixtureBackend {
    fn complete(&self, request: &GenerationRequest) -> Result<Completion, BackendError> {
        let text = match &self.source {
            FixtureSource::Sequence { replies, total } => {
                replies.lock().unwrap().pop_front().ok_or_else(|| {
                    BackendError::FixtureExhausted(format!("all {total} canned replies consumed"))
                })?
            }
            FixtureSource::Map(entries) => {
                let key = request.segments.sha256();
                entries
                    .get(&key)
                    .cloned()
                    .ok_or_else(|| BackendError::FixtureExhausted(format!("no reply for prompt {key}")))?
            }
        };
        Ok(Completion { text, usage: Usage::default(), latency_ms: 0 })
    }

    fn model_name(&self) -> &str {
        &self.model
    }
}

/// Deterministic exponential backoff: `initial_ms * multiplier^attempt`,
/// capped at `max_ms`. No jitter, so schedules are reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackoffPolicy {
    pub initial_ms: u64,
    pub multiplier: f64,
    pub max_ms: u64,
}

impl Default for BackoffPolicy {
    fn default() -> Self {
        BackoffPolicy { initial_ms: 500, multiplier: 2.0, max_ms: 30_000 }
    }
}

impl BackoffPolicy {
    /// Delay before retry number `retry` (0-based).
    pub fn delay_ms(&self, retry: u32) -> u64 {
        let raw = self.initial_ms as f64 * self.multiplier.powi(retry as i32);
        (raw as u64).min(self.max_ms)
    }
}

/// Connection settings for one hosted chat-completions endpoint.
///
/// `api_key_env` names the environment variable holding the bearer token; an
/// empty string means the endpoint needs no auth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendProfile {
    pub endpoint: String,
    pub model: String,
    #[serde(default)]
    pub api_key_env: String,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    #[serde(default)]
    pub backoff: BackoffPolicy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_limit_per_min: Option<u32>,
}

fn default_timeout_ms() -> u64 {
    60_000
}

fn default_max_retries() -> u32 {
    3
}

/// Sliding-window rate limiter: at most `limit_per_min` acquisitions in any
/// rolling 60-second window. Safe under concurrent callers.
pub struct RateLimiter {
    limit_per_min: u32,
    issued: Mutex<VecDeque<u64>>,
}

const WINDOW_MS: u64 = 60_000;

impl RateLimiter {
    pub fn new(limit_per_min: u32) -> Self {
        assert!(limit_per_min >= 1, "rate limit must be >= 1");
        RateLimiter { limit_per_min, issued: Mutex::new(VecDeque::new()) }
    }

    /// Blocks (via the clock) until a request slot is free, then claims it.
    pub fn acquire(&self, clock: &dyn Clock) {
        loop {
            let wait_ms = {
                let now = clock.now_ms();
                let mut issued = self.issued.lock().unwrap();
                while issued.front().is_some_and(|&t| t + WINDOW_MS <= now) {
                    issued.pop_front();
                }
                if issued.len() < self.limit_per_min as usize {
                    issued.push_back(now);
                    return;
                }
                issued.front().map(|&t| t + WINDOW_MS - now).unwrap_or(1)
            };
            clock.sleep_ms(wait_ms.max(1));
        }
    }
}

/// Chat-completions HTTP backend with retry on 429/5xx/transport errors.
pub struct HttpBackend {
    profile: BackendProfile,
    client: reqwest::blocking::Client,
    limiter: Option<RateLimiter>,
    clock: Arc<dyn Clock>,
}

impl HttpBackend {
    pub fn new(profile: BackendProfile, clock: Arc<dyn Clock>) -> Self {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_millis(profile.timeout_ms))
            .build()
            .expect("reqwest client construction cannot fail with these options");
        let limiter = profile.rate_limit_per_min.map(RateLimiter::new);
        HttpBackend { profile, client, limiter, clock }
    }

    fn request_body(&self, request: &GenerationRequest) -> serde_json::Value {
        let messages: Vec<serde_json::Value> = request
            .segments
            .segments
            .iter()
            .map(|(role, text)| {
                let role = match role {
                    Role::System => "system",
                    Role::User => "user",
                };
                serde_json::json!({"role": role, "content": text})
            })
            .collect();
        let mut body = serde_json::json!({
            "model": self.profile.model,
            "messages": messages,
            "temperature": request.temperature,
            "max_tokens": request.max_output_tokens,
        });
        if !request.stop_sequences.is_empty() {
            body["stop"] = serde_json::json!(request.stop_sequences);
        }
        body
    }

    fn api_key(&self) -> Result<Option<String>, BackendError> {
        if self.profile.api_key_env.is_empty() {
            return Ok(None);
        }
        match std::env::var(&self.profile.api_key_env) {
            Ok(key) if !key.is_empty() => Ok(Some(key)),
            _ => Err(BackendError::Auth(format!(
                "environment variable {} is not set",
                self.profile.api_key_env
            ))),
        }
    }
}

impl TextBackend for HttpBackend {
    fn complete(&self, request: &GenerationRequest) -> Result<Completion, BackendError> {
        let api_key = self.api_key()?;
        let url = format!("{}/chat/completions", self.profile.endpoint.trim_end_matches('/'));
        let body = self.request_body(request);

        let mut last_error = String::new();
        let mut last_was_timeout = false;
        let attempts = self.profile.max_retries + 1;
        for attempt in 0..attempts {
            if attempt > 0 {
                self.clock.sleep_ms(self.profile.backoff.delay_ms(attempt - 1));
            }
            if let Some(limiter) = &self.limiter {
                limiter.acquire(self.clock.as_ref());
            }
            let started = self.clock.now_ms();
            let mut builder = self.client.post(&url).json(&body);
            if let Some(key) = &api_key {
                builder = builder.bearer_auth(key);
            }
            match builder.send() {
                Err(e) => {
                    last_was_timeout = e.is_timeout();
                    last_error = format!("transport: {e}");
                }
                Ok(response) => {
                    let status = response.status();
                    if status.as_u16() == 401 || status.as_u16() == 403 {
                        return Err(BackendError::Auth(format!("endpoint returned {status}")));
                    }
                    if status.as_u16() == 429 || status.is_server_error() {
                        last_was_timeout = false;
                        last_error = format!("retryable status {status}");
                    } else if !status.is_success() {
                        let message = response.text().unwrap_or_default();
                        return Err(BackendError::Http { status: status.as_u16(), message });
                    } else {
                        let latency_ms = self.clock.now_ms().saturating_sub(started);
                        let value: serde_json::Value = response.json().map_err(|e| {
                            BackendError::Http {
                                status: status.as_u16(),
                                message: format!("malformed response body: {e}"),
                            }
                        })?;
                        let text = value["choices"][0]["message"]["content"]
                            .as_str()
                            .ok_or_else(|| BackendError::Http {
                                status: status.as_u16(),
                                message: "response missing choices[0].message.content".into(),
                            })?
                            .to_string();
                        let usage = Usage {
                            prompt_tokens: value["usage"]["prompt_tokens"].as_u64(),
                            completion_tokens: value["usage"]["completion_tokens"].as_u64(),
                        };
                        return Ok(Completion { text, usage, latency_ms });
                    }
                }
            }
        }
        if last_was_timeout {
            return Err(BackendError::Timeout(self.profile.timeout_ms));
        }
        Err(BackendError::Exhausted { attempts, last_error })
    }

    fn model_name(&self) -> &str {
        &self.profile.model
    }
}
