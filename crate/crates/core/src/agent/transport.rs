//! LLM transports: live HTTP, record (live plus fixture capture), replay
//! from fixtures, and a scripted in-process responder for tests.

use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Duration;

pub const ENV_API_KEY: &str = "FACTFLOW_API_KEY";
pub const ENV_ENDPOINT: &str = "FACTFLOW_LLM_ENDPOINT";
pub const ENV_MODEL: &str = "FACTFLOW_LLM_MODEL";
pub const DEFAULT_ENDPOINT: &str = "https://api.openai.com/v1/chat/completions";
pub const DEFAULT_MODEL: &str = "gpt-4o";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TransportError {
    #[error("fixture missing for request digest {digest}")]
    FixtureMissing { digest: String },
    #[error("transport configuration: {0}")]
    Config(String),
    #[error("LLM request failed after {attempts} attempt(s): {message}")]
    Request { attempts: u32, message: String },
    #[error("fixture store: {0}")]
    Io(String),
    #[error("scripted transport: {0}")]
    Script(String),
}

/// Hex SHA-256 of the prompt text; the key for fixtures and the run log.
pub fn digest(prompt: &str) -> String {
    hex::encode(Sha256::digest(prompt.as_bytes()))
}

pub trait LlmTransport: Send + Sync {
    fn complete(&self, prompt: &str) -> Result<String, TransportError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransportMode {
    Live,
    Record,
    Replay,
}

impl std::str::FromStr for TransportMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "live" => Ok(TransportMode::Live),
            "record" => Ok(TransportMode::Record),
            "replay" => Ok(TransportMode::Replay),
            other => Err(format!("unknown transport {other:?}; use live, record or replay")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LiveConfig {
    pub endpoint: String,
    pub model: String,
    pub api_key: String,
    pub timeout: Duration,
    pub max_retries: u32,
}

impl LiveConfig {
    /// Reads the credential and optional endpoint/model overrides from the
    /// environment. The key is never read from files.
    pub fn from_env() -> Result<Self, TransportError> {
        let api_key = std::env::var(ENV_API_KEY).map_err(|_| {
            TransportError::Config(format!("{ENV_API_KEY} is not set; live and record modes need it"))
        })?;
        Ok(LiveConfig {
            endpoint: std::env::var(ENV_ENDPOINT).unwrap_or_else(|_| DEFAULT_ENDPOINT.into()),
            model: std::env::var(ENV_MODEL).unwrap_or_else(|_| DEFAULT_MODEL.into()),
            api_key,
            timeout: Duration::from_secs(120),
            max_retries: 3,
        })
    }
}

/// OpenAI-compatible chat-completions client (blocking).
pub struct LiveTransport {
    config: LiveConfig,
    client: reqwest::blocking::Client,
}

impl LiveTransport {
    pub fn new(config: LiveConfig) -> Result<Self, TransportError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| TransportError::Config(e.to_string()))?;
        Ok(LiveTransport { config, client })
    }

    fn attempt(&self, prompt: &str) -> Result<String, String> {
        let body = serde_json::json!({
            "model": self.config.model,
            "temperature": 0,
            "messages": [{"role": "user", "content": prompt}],
        });
        let resp = self
            .client
            .post(&self.config.endpoint)
            .bearer_auth(&self.config.api_key)
            .json(&body)
            .send()
            .map_err(|e| e.to_string())?;
        let status = resp.status();
        let json: serde_json::Value = resp.json().map_err(|e| e.to_string())?;
        if !status.is_success() {
            return Err(format!("HTTP {status}: {json}"));
        }
        json.pointer("/choices/0/message/content")
            .and_then(|c| c.as_str())
            .map(str::to_string)
            .ok_or_else(|| "response has no choices[0].message.content".into())
    }
}

impl LlmTransport for LiveTransport {
    fn complete(&self, prompt: &str) -> Result<String, TransportError> {
        let attempts = self.config.max_retries.max(1);
        let mut last = String::new();
        for i in 0..attempts {
            match self.attempt(prompt) {
                Ok(text) => return Ok(text),
                Err(e) => last = e,
            }
            if i + 1 < attempts {
                std::thread::sleep(Duration::from_millis(500 << i));
            }
        }
        Err(TransportError::Request {
            attempts,
            message: last,
        })
    }
}

fn fixture_path(dir: &Path, digest: &str) -> PathBuf {
    dir.join(format!("{digest}.txt"))
}

/// Answers from `<dir>/<digest>.txt`; never touches the network.
pub struct ReplayTransport {
    dir: PathBuf,
}

impl ReplayTransport {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        ReplayTransport { dir: dir.into() }
    }
}

impl LlmTransport for ReplayTransport {
    fn complete(&self, prompt: &str) -> Result<String, TransportError> {
        let d = digest(prompt);
        match std::fs::read_to_string(fixture_path(&self.dir, &d)) {
            Ok(text) => Ok(text),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                Err(TransportError::FixtureMissing { digest: d })
            }
            Err(e) => Err(TransportError::Io(e.to_string())),
        }
    }
}

/// Forwards to `inner` and stores every response under its request digest.
/// The prompt itself is stored alongside as `<digest>.prompt` for review.
pub struct RecordTransport {
    inner: Box<dyn LlmTransport>,
    dir: PathBuf,
}

impl RecordTransport {
    pub fn new(inner: Box<dyn LlmTransport>, dir: impl Into<PathBuf>) -> Result<Self, TransportError> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|e| TransportError::Io(e.to_string()))?;
        Ok(RecordTransport { inner, dir })
    }
}

impl LlmTransport for RecordTransport {
    fn complete(&self, prompt: &str) -> Result<String, TransportError> {
        let text = self.inner.complete(prompt)?;
        let d = digest(prompt);
        let io = |e: std::io::Error| TransportError::Io(e.to_string());
        std::fs::write(fixture_path(&self.dir, &d), &text).map_err(io)?;
        std::fs::write(self.dir.join(format!("{d}.prompt")), prompt).map_err(io)?;
        Ok(text)
    }
}

type Responder = Box<dyn Fn(&str, usize) -> Result<String, TransportError> + Send + Sync>;

/// Test double: a closure decides each response; every prompt is kept.
pub struct ScriptedTransport {
    respond: Responder,
    prompts: Mutex<Vec<String>>,
}

impl ScriptedTransport {
    /// `respond(prompt, call_index)`.
    pub fn new(
        respond: impl Fn(&str, usize) -> Result<String, TransportError> + Send + Sync + 'static,
    ) -> Self {
        ScriptedTransport {
            respond: Box::new(respond),
            prompts: Mutex::new(Vec::new()),
        }
    }

    /// Returns the given responses in order, then fails.
    pub fn sequence(responses: Vec<String>) -> Self {
        ScriptedTransport::new(move |_, i| {
            responses
                .get(i)
                .cloned()
                .ok_or_else(|| TransportError::Script(format!("no scripted response #{i}")))
        })
    }

    pub fn prompts(&self) -> Vec<String> {
        self.prompts.lock().unwrap().clone()
    }
}

impl LlmTransport for ScriptedTransport {
    fn complete(&self, prompt: &str) -> Result<String, TransportError> {
        let i = {
            let mut p = self.prompts.lock().unwrap();
            p.push(prompt.to_string());
            p.len() - 1
        };
        (self.respond)(prompt, i)
    }
}

/// Builds the transport for a CLI/server mode.
pub fn from_mode(mode: TransportMode, fixtures: &Path) -> Result<Box<dyn LlmTransport>, TransportError> {
    Ok(match mode {
        TransportMode::Replay => Box::new(ReplayTransport::new(fixtures)),
        TransportMode::Live => Box::new(LiveTransport::new(LiveConfig::from_env()?)?),
        TransportMode::Record => Box::new(RecordTransport::new(
            Box::new(LiveTransport::new(LiveConfig::from_env()?)?),
            fixtures,
        )?),
    })
}
