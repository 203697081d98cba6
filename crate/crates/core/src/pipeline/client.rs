use std::collections::BTreeMap;
use std::path::Path;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use async_trait::async_trait;
use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine as _;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tokio::sync::Semaphore;

use super::AblationMode;
use crate::dsp::MelSpectrogram;
use crate::error::{Error, Result};
use crate::video::FrameImage;

/// A dense array serialized as little-endian bytes in base64.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorPayload {
    pub dtype: String,
    pub shape: Vec<usize>,
    pub data_b64: String,
}

impl TensorPayload {
    /// `[height, width, channels]`, `u8`.
    pub fn from_frame(frame: &FrameImage) -> Self {
        Self {
            dtype: "u8".into(),
            shape: vec![
                frame.height() as usize,
                frame.width() as usize,
                frame.channels() as usize,
            ],
            data_b64: B64.encode(frame.pixels()),
        }
    }

    /// `[mel_bins, frames]`, `f32`.
    pub fn from_spectrogram(spec: &MelSpectrogram) -> Self {
        let bytes: Vec<u8> = spec.values().iter().flat_map(|&v| (v as f32).to_le_bytes()).collect();
        Self {
            dtype: "f32".into(),
            shape: vec![spec.bin_count(), spec.frame_count()],
            data_b64: B64.encode(bytes),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MllmRequest {
    pub video_id: String,
    pub mode: AblationMode,
    pub prompt: String,
    pub frame_indices: Vec<usize>,
    pub frames: Vec<TensorPayload>,
    pub spectrograms: Vec<TensorPayload>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgeRequest {
    pub prompt: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextResponse {
    pub text: String,
}

/// Lowercase hex SHA-256 of the request's JSON serialization.
///
/// Struct fields serialize in declaration order, so the encoding is stable.
pub fn request_hash<T: Serialize>(request: &T) -> String {
    let bytes = serde_json::to_vec(request).expect("request types always serialize");
    format!("{:x}", Sha256::digest(bytes))
}

#[async_trait]
pub trait MllmClient: Send + Sync {
    async fn generate(&self, request: &MllmRequest) -> Result<String>;
}

#[async_trait]
pub trait LlmClient: Send + Sync {
    async fn complete(&self, request: &JudgeRequest) -> Result<String>;
}

/// Runs the multimodal model and returns its text verbatim.
pub async fn mllm_infer(client: &dyn MllmClient, request: &MllmRequest) -> Result<String> {
    let text = client.generate(request).await?;
    if text.trim().is_empty() {
        return Err(Error::ResponseEmpty);
    }
    Ok(text)
}

/// Canned transcripts keyed by request hash.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockFixtures {
    #[serde(default)]
    pub mllm: BTreeMap<String, String>,
    #[serde(default)]
    pub judge: BTreeMap<String, String>,
}

impl MockFixtures {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse("mock fixtures", e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::parse(path.display().to_string(), e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fixtures serialize") + "\n"
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CallLogEntry {
    pub kind: String,
    pub hash: String,
    pub video_id: Option<String>,
    pub mode: Option<AblationMode>,
    pub frames: usize,
    pub spectrograms: usize,
    pub hit: bool,
}

/// Deterministic client serving both stages from [`MockFixtures`].
#[derive(Debug, Default)]
pub struct MockClient {
    fixtures: MockFixtures,
    log: Mutex<Vec<CallLogEntry>>,
}

impl MockClient {
    pub fn new(fixtures: MockFixtures) -> Self {
        Self {
            fixtures,
            log: Mutex::new(Vec::new()),
        }
    }

    /// Every call made so far, sorted so concurrent runs log identically.
    pub fn call_log(&self) -> Vec<CallLogEntry> {
        let mut log = self.log.lock().expect("call log poisoned").clone();
        log.sort();
        log
    }

    fn record(&self, entry: CallLogEntry) {
        self.log.lock().expect("call log poisoned").push(entry);
    }
}

#[async_trait]
impl MllmClient for MockClient {
    async fn generate(&self, request: &MllmRequest) -> Result<String> {
        let hash = request_hash(request);
        let hit = self.fixtures.mllm.get(&hash).cloned();
        self.record(CallLogEntry {
            kind: "mllm".into(),
            hash: hash.clone(),
            video_id: Some(request.video_id.clone()),
            mode: Some(request.mode),
            frames: request.frames.len(),
            spectrograms: request.spectrograms.len(),
            hit: hit.is_some(),
        });
        hit.ok_or(Error::FixtureMissing { hash })
    }
}

#[async_trait]
impl LlmClient for MockClient {
    async fn complete(&self, request: &JudgeRequest) -> Result<String> {
        let hash = request_hash(request);
        let hit = self.fixtures.judge.get(&hash).cloned();
        self.record(CallLogEntry {
            kind: "judge".into(),
            hash: hash.clone(),
            video_id: None,
            mode: None,
            frames: 0,
            spectrograms: 0,
            hit: hit.is_some(),
        });
        hit.ok_or(Error::FixtureMissing { hash })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RemoteConfig {
    pub endpoint: String,
    /// Bearer token; skipped when echoing the config.
    #[serde(skip_serializing)]
    pub token: Option<String>,
    pub timeout_s: f64,
    pub max_attempts: u32,
    pub backoff_ms: u64,
    pub max_in_flight: usize,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        Self {
            endpoint: String::new(),
            token: None,
            timeout_s: 120.0,
            max_attempts: 4,
            backoff_ms: 500,
            max_in_flight: 4,
        }
    }
}

/// JSON-over-HTTP transport shared by the remote clients.
///
/// Connection failures, timeouts, HTTP 429 and 5xx are retried with
/// exponential backoff; other statuses fail at once.
#[derive(Debug, Clone)]
pub struct RemoteEndpoint {
    config: RemoteConfig,
    http: reqwest::Client,
    permits: Arc<Semaphore>,
}

impl RemoteEndpoint {
    pub fn new(config: RemoteConfig) -> Result<Self> {
        if config.endpoint.is_empty() {
            return Err(Error::invalid("remote endpoint URL is empty"));
        }
        if config.max_attempts == 0 || config.max_in_flight == 0 {
            return Err(Error::invalid("max_attempts and max_in_flight must be at least 1"));
        }
        if !(config.timeout_s.is_finite() && config.timeout_s > 0.0) {
            return Err(Error::invalid("timeout_s must be positive"));
        }
        let http = reqwest::Client::builder()
            .timeout(Duration::from_secs_f64(config.timeout_s))
            .build()
            .map_err(|e| Error::invalid(format!("HTTP client: {e}")))?;
        let permits = Arc::new(Semaphore::new(config.max_in_flight));
        Ok(Self { config, http, permits })
    }

    pub fn config(&self) -> &RemoteConfig {
        &self.config
    }

    pub async fn post_text<T: Serialize + Sync>(&self, body: &T) -> Result<String> {
        let _permit = self.permits.acquire().await.expect("semaphore never closed");
        let mut last = String::new();
        for attempt in 1..=self.config.max_attempts {
            if attempt > 1 {
                let delay = self.config.backoff_ms.saturating_mul(1 << (attempt - 2).min(16));
                tokio::time::sleep(Duration::from_millis(delay)).await;
            }
            let mut req = self.http.post(&self.config.endpoint).json(body);
            if let Some(token) = &self.config.token {
                req = req.bearer_auth(token);
            }
            match req.send().await {
                Ok(resp) => {
                    let status = resp.status();
                    if status.is_success() {
                        let parsed: TextResponse = resp.json().await.map_err(|e| Error::ClientUnavailable {
                            attempts: attempt,
                            message: format!("malformed response body: {e}"),
                        })?;
                        if parsed.text.trim().is_empty() {
                            return Err(Error::ResponseEmpty);
                        }
                        return Ok(parsed.text);
                    }
                    last = format!("HTTP {status}");
                    if !(status.is_server_error() || status == reqwest::StatusCode::TOO_MANY_REQUESTS) {
                        return Err(Error::ClientUnavailable {
                            attempts: attempt,
                            message: last,
                        });
                    }
                }
                Err(e) => last = e.to_string(),
            }
            tracing::warn!(endpoint = %self.config.endpoint, attempt, error = %last, "request failed");
        }
        Err(Error::ClientUnavailable {
            attempts: self.config.max_attempts,
            message: last,
        })
    }
}

/// POSTs [`MllmRequest`] JSON and expects `{"text": ...}` back.
#[derive(Debug, Clone)]
pub struct RemoteMllmClient(pub RemoteEndpoint);

#[async_trait]
impl MllmClient for RemoteMllmClient {
    async fn generate(&self, request: &MllmRequest) -> Result<String> {
        self.0.post_text(request).await
    }
}

/// POSTs `{"prompt": ...}` and expects `{"text": ...}` back.
#[derive(Debug, Clone)]
pub struct RemoteLlmClient(pub RemoteEndpoint);

#[async_trait]
impl LlmClient for RemoteLlmClient {
    async fn complete(&self, request: &JudgeRequest) -> Result<String> {
        self.0.post_text(request).await
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn request() -> MllmRequest {
        MllmRequest {
            video_id: "v1".into(),
            mode: AblationMode::Video,
            prompt: "describe".into(),
            frame_indices: vec![0, 1],
            frames: vec![TensorPayload::from_frame(&FrameImage::filled(2, 2, [1, 2, 3]))],
            spectrograms: vec![],
        }
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = request_hash(&request());
        assert_eq!(a, request_hash(&request()));
        assert_eq!(a.len(), 64);
        let mut other = request();
        other.prompt.push('!');
        assert_ne!(a, request_hash(&other));
    }

    #[test]
    fn hash_matches_independent_digest() {
        let req = JudgeRequest { prompt: "abc".into() };
        let direct = Sha256::digest(br#"{"prompt":"abc"}"#);
        let hex: String = direct.iter().map(|b| format!("{b:02x}")).collect();
        assert_eq!(request_hash(&req), hex);
    }

    #[test]
    fn frame_payload_shape() {
        let p = TensorPayload::from_frame(&FrameImage::filled(3, 2, [9, 9, 9]));
        assert_eq!(p.shape, vec![2, 3, 3]);
        assert_eq!(B64.decode(&p.data_b64).unwrap(), vec![9u8; 18]);
    }

    #[tokio::test]
    async fn mock_serves_and_logs() {
        let req = request();
        let mut fx = MockFixtures::default();
        fx.mllm.insert(request_hash(&req), "a person talking".into());
        let client = MockClient::new(fx);
        assert_eq!(mllm_infer(&client, &req).await.unwrap(), "a person talking");
        let mut missing = req.clone();
        missing.video_id = "v2".into();
        assert!(matches!(
            mllm_infer(&client, &missing).await,
            Err(Error::FixtureMissing { .. })
        ));
        let log = client.call_log();
        assert_eq!(log.len(), 2);
        assert_eq!(log.iter().filter(|e| e.hit).count(), 1);
    }

    #[tokio::test]
    async fn blank_fixture_is_empty_response() {
        let req = request();
        let mut fx = MockFixtures::default();
        fx.mllm.insert(request_hash(&req), "  \n".into());
        let client = MockClient::new(fx);
        assert!(matches!(mllm_infer(&client, &req).await, Err(Error::ResponseEmpty)));
    }

    #[test]
    fn token_not_echoed() {
        let cfg = RemoteConfig {
            token: Some("secret".into()),
            ..Default::default()
        };
        assert!(!serde_json::to_string(&cfg).unwrap().contains("secret"));
    }
}
