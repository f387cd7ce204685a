//! Generation-model clients: a fixture-backed stub and an HTTP client.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Duration;

use base64::Engine;
use sha2::{Digest, Sha256};

pub const API_KEY_ENV: &str = "GUIFORGE_GEN_API_KEY";

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ClientError {
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("no recorded response for request {0}")]
    MissingFixture(String),
    #[error("client configuration: {0}")]
    Config(String),
}

impl ClientError {
    pub fn is_transport(&self) -> bool {
        matches!(self, ClientError::Transport(_))
    }
}

pub trait GenerationClient: Send + Sync {
    /// Sends a prompt with PNG image payloads and returns the raw response text.
    fn request(&self, prompt: &str, images: &[Vec<u8>]) -> Result<String, ClientError>;
}

/// Stable key of a request: digest over the prompt and every image's digest.
pub fn request_digest(prompt: &str, images: &[Vec<u8>]) -> String {
    let mut h = Sha256::new();
    h.update((prompt.len() as u64).to_le_bytes());
    h.update(prompt.as_bytes());
    for img in images {
        h.update(Sha256::digest(img));
    }
    hex::encode(h.finalize())
}

/// Replays recorded responses keyed by [`request_digest`].
///
/// A fixture directory holds `<digest>.txt` files and optionally
/// `fallback.txt`, returned for requests with no recording.
#[derive(Debug, Clone, Default)]
pub struct StubClient {
    responses: BTreeMap<String, String>,
    fallback: Option<String>,
}

impl StubClient {
    pub fn new(responses: BTreeMap<String, String>, fallback: Option<String>) -> Self {
        StubClient { responses, fallback }
    }

    pub fn from_dir(dir: &Path) -> Result<Self, ClientError> {
        let entries = std::fs::read_dir(dir).map_err(|e| ClientError::Config(format!("{}: {e}", dir.display())))?;
        let mut responses = BTreeMap::new();
        let mut fallback = None;
        for entry in entries {
            let path = entry.map_err(|e| ClientError::Config(e.to_string()))?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("txt") {
                continue;
            }
            let stem = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or_default()
                .to_string();
            let text =
                std::fs::read_to_string(&path).map_err(|e| ClientError::Config(format!("{}: {e}", path.display())))?;
            if stem == "fallback" {
                fallback = Some(text);
            } else {
                responses.insert(stem, text);
            }
        }
        Ok(StubClient { responses, fallback })
    }

    pub fn insert(&mut self, digest: String, response: String) {
        self.responses.insert(digest, response);
    }
}

impl GenerationClient for StubClient {
    fn request(&self, prompt: &str, images: &[Vec<u8>]) -> Result<String, ClientError> {
        let key = request_digest(prompt, images);
        self.responses
            .get(&key)
            .or(self.fallback.as_ref())
            .cloned()
            .ok_or(ClientError::MissingFixture(key))
    }
}

/// Posts `{"prompt": ..., "images": [base64 PNG, ...]}` with a bearer token
/// and treats the response body as opaque text.
#[derive(Debug, Clone)]
pub struct HttpClient {
    endpoint: String,
    api_key: String,
    http: reqwest::blocking::Client,
}

impl HttpClient {
    pub fn new(
        endpoint: impl Into<String>,
        api_key: impl Into<String>,
        timeout: Duration,
    ) -> Result<Self, ClientError> {
        let http = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| ClientError::Config(e.to_string()))?;
        Ok(HttpClient {
            endpoint: endpoint.into(),
            api_key: api_key.into(),
            http,
        })
    }

    /// Reads the bearer token from `GUIFORGE_GEN_API_KEY`.
    pub fn from_env(endpoint: impl Into<String>, timeout: Duration) -> Result<Self, ClientError> {
        let key = std::env::var(API_KEY_ENV).map_err(|_| ClientError::Config(format!("{API_KEY_ENV} is not set")))?;
        HttpClient::new(endpoint, key, timeout)
    }
}

impl GenerationClient for HttpClient {
    fn request(&self, prompt: &str, images: &[Vec<u8>]) -> Result<String, ClientError> {
        let engine = base64::engine::general_purpose::STANDARD;
        let body = serde_json::json!({
            "prompt": prompt,
            "images": images.iter().map(|i| engine.encode(i)).collect::<Vec<_>>(),
        });
        let resp = self
            .http
            .post(&self.endpoint)
            .bearer_auth(&self.api_key)
            .json(&body)
            .send()
            .map_err(|e| ClientError::Transport(e.to_string()))?;
        let status = resp.status();
        let text = resp.text().map_err(|e| ClientError::Transport(e.to_string()))?;
        if !status.is_success() {
            return Err(ClientError::Transport(format!("HTTP {status}: {text}")));
        }
        Ok(text)
    }
}

/// Calls the client, retrying once when the transport fails.
pub fn request_with_retry(
    client: &dyn GenerationClient,
    prompt: &str,
    images: &[Vec<u8>],
) -> Result<String, ClientError> {
    match client.request(prompt, images) {
        Err(e) if e.is_transport() => {
            tracing::warn!(error = %e, "generation request failed, retrying once");
            client.request(prompt, images)
        }
        other => other,
    }
}
