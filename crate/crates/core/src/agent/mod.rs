//! Worker abstraction: profiles, JSON envelopes, the block store, LLM
//! transports and the invoke-with-repair loop.

pub mod blocks;
pub mod profile;
pub mod schema;
pub mod transport;

pub use blocks::{BlockError, BlockStore};
pub use profile::{render_prompt, Example, ProfileError, WorkerProfile};
pub use schema::{Field, FieldType, Schema};
pub use transport::{
    digest, LiveConfig, LiveTransport, LlmTransport, RecordTransport, ReplayTransport,
    ScriptedTransport, TransportError, TransportMode,
};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value as Json;
use std::path::PathBuf;
use std::sync::Mutex;
use std::time::Instant;

pub const MAX_REPAIRS: u32 = 2;

/// Bundled knowledge-base assets referenced by worker profiles.
pub mod knowledge {
    const ASSETS: &[(&str, &str)] = &[
        ("fact_types", include_str!("../../assets/knowledge/fact_types.md")),
        (
            "fact_idea_exemplars",
            include_str!("../../assets/knowledge/fact_idea_exemplars.md"),
        ),
        (
            "nl2sql_exemplars",
            include_str!("../../assets/knowledge/nl2sql_exemplars.md"),
        ),
        ("sql_dialect", include_str!("../../assets/knowledge/sql_dialect.md")),
        (
            "chart_guidelines",
            include_str!("../../assets/knowledge/chart_guidelines.md"),
        ),
        (
            "writing_guidelines",
            include_str!("../../assets/knowledge/writing_guidelines.md"),
        ),
        (
            "story_structure",
            include_str!("../../assets/knowledge/story_structure.md"),
        ),
    ];

    pub fn get(id: &str) -> Option<&'static str> {
        ASSETS.iter().find(|(k, _)| *k == id).map(|(_, v)| *v)
    }

    pub fn ids() -> impl Iterator<Item = &'static str> {
        ASSETS.iter().map(|(k, _)| *k)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AgentError {
    #[error(transparent)]
    Payload(#[from] ProfileError),
    #[error("{worker}: {source}")]
    Transport {
        worker: String,
        source: TransportError,
    },
    #[error("{worker}: output still invalid after {repairs} repair(s): {}", .problems.join("; "))]
    InvalidOutput {
        worker: String,
        repairs: u32,
        problems: Vec<String>,
        raw: String,
    },
}

impl AgentError {
    pub fn fixture_missing(&self) -> Option<&str> {
        match self {
            AgentError::Transport {
                source: TransportError::FixtureMissing { digest },
                ..
            } => Some(digest),
            _ => None,
        }
    }
}

/// Message passed between workers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub id: uuid::Uuid,
    pub sender: String,
    pub recipient: String,
    pub created_at: DateTime<Utc>,
    pub payload: Json,
    #[serde(default)]
    pub block_refs: Vec<String>,
}

impl Envelope {
    pub fn new(sender: &str, recipient: &str, payload: Json, block_refs: Vec<String>) -> Self {
        Envelope {
            id: uuid::Uuid::new_v4(),
            sender: sender.into(),
            recipient: recipient.into(),
            created_at: Utc::now(),
            payload,
            block_refs,
        }
    }

    /// The payload fits the recipient's input schema and every block
    /// reference resolves in `store`.
    pub fn validate(&self, recipient: &WorkerProfile, store: &BlockStore) -> Result<(), Vec<String>> {
        let mut problems = Vec::new();
        if recipient.name != self.recipient {
            problems.push(format!(
                "envelope addressed to {:?} but validated against {:?}",
                self.recipient, recipient.name
            ));
        }
        if let Err(p) = recipient.input_schema.validate(&self.payload) {
            problems.extend(p);
        }
        for r in &self.block_refs {
            if !store.contains(r) {
                problems.push(format!("block reference {r} does not resolve"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(problems)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub worker: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub digest: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repair_count: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latency_ms: Option<u64>,
    pub outcome: String,
}

/// Append-only audit of invocations and worker-level events, kept in
/// memory and optionally mirrored to a JSON-lines file.
#[derive(Debug, Default)]
pub struct RunLog {
    path: Option<PathBuf>,
    entries: Mutex<Vec<LogEntry>>,
}

impl RunLog {
    pub fn in_memory() -> Self {
        RunLog::default()
    }

    pub fn to_file(path: impl Into<PathBuf>) -> Self {
        RunLog {
            path: Some(path.into()),
            entries: Mutex::new(Vec::new()),
        }
    }

    pub fn record(&self, entry: LogEntry) {
        if let Some(p) = &self.path {
            use std::io::Write;
            let line = serde_json::to_string(&entry).expect("log entries serialize");
            // the audit file is best-effort; the in-memory copy is authoritative
            if let Some(dir) = p.parent() {
                let _ = std::fs::create_dir_all(dir);
            }
            if let Ok(mut f) = std::fs::OpenOptions::new().create(true).append(true).open(p) {
                let _ = writeln!(f, "{line}");
            }
        }
        self.entries.lock().unwrap().push(entry);
    }

    pub fn event(&self, worker: &str, outcome: impl Into<String>) {
        self.record(LogEntry {
            worker: worker.into(),
            digest: None,
            repair_count: None,
            latency_ms: None,
            outcome: outcome.into(),
        });
    }

    pub fn entries(&self) -> Vec<LogEntry> {
        self.entries.lock().unwrap().clone()
    }
}

/// Pulls a JSON document out of free-form model text: the first fenced
/// block that parses, else the whole text, else the outermost braces.
pub fn extract_json(text: &str) -> Result<Json, String> {
    let mut rest = text;
    while let Some(start) = rest.find("```") {
        let after = &rest[start + 3..];
        let body_start = after.find('\n').map(|i| i + 1).unwrap_or(after.len());
        let body = &after[body_start..];
        let Some(end) = body.find("```") else { break };
        if let Ok(v) = serde_json::from_str(body[..end].trim()) {
            return Ok(v);
        }
        rest = &body[end + 3..];
    }
    if let Ok(v) = serde_json::from_str(text.trim()) {
        return Ok(v);
    }
    if let (Some(a), Some(b)) = (text.find('{'), text.rfind('}')) {
        if a < b {
            if let Ok(v) = serde_json::from_str(&text[a..=b]) {
                return Ok(v);
            }
        }
    }
    Err("response contains no parseable JSON object".into())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    pub output: Json,
    pub repair_count: u32,
    pub digest: String,
}

/// The transport and run log shared by every worker of a run.
pub struct Agent<'a> {
    pub transport: &'a dyn LlmTransport,
    pub log: &'a RunLog,
}

impl<'a> Agent<'a> {
    pub fn new(transport: &'a dyn LlmTransport, log: &'a RunLog) -> Self {
        Agent { transport, log }
    }

    /// Renders the prompt, calls the model and parses the reply; a reply
    /// that is not valid JSON for the output schema triggers up to
    /// `MAX_REPAIRS` re-prompts listing the problems.
    pub fn invoke(&self, profile: &WorkerProfile, payload: &Json) -> Result<Invocation, AgentError> {
        let base = render_prompt(profile, payload)?;
        let first_digest = digest(&base);
        let mut prompt = base.clone();
        let mut repairs = 0;
        loop {
            let d = digest(&prompt);
            let started = Instant::now();
            let raw = self.transport.complete(&prompt).map_err(|source| {
                self.log.record(LogEntry {
                    worker: profile.name.clone(),
                    digest: Some(d.clone()),
                    repair_count: Some(repairs),
                    latency_ms: None,
                    outcome: format!("transport error: {source}"),
                });
                AgentError::Transport {
                    worker: profile.name.clone(),
                    source,
                }
            })?;
            let latency = started.elapsed().as_millis() as u64;
            let problems = match extract_json(&raw) {
                Ok(v) => match profile.output_schema.validate(&v) {
                    Ok(()) => {
                        self.log.record(LogEntry {
                            worker: profile.name.clone(),
                            digest: Some(d),
                            repair_count: Some(repairs),
                            latency_ms: Some(latency),
                            outcome: "ok".into(),
                        });
                        return Ok(Invocation {
                            output: v,
                            repair_count: repairs,
                            digest: first_digest,
                        });
                    }
                    Err(p) => p,
                },
                Err(e) => vec![e],
            };
            self.log.record(LogEntry {
                worker: profile.name.clone(),
                digest: Some(d),
                repair_count: Some(repairs),
                latency_ms: Some(latency),
                outcome: format!("invalid output: {}", problems.join("; ")),
            });
            if repairs == MAX_REPAIRS {
                return Err(AgentError::InvalidOutput {
                    worker: profile.name.clone(),
                    repairs,
                    problems,
                    raw,
                });
            }
            repairs += 1;
            prompt = repair_prompt(&base, &raw, &problems);
        }
    }
}

/// Original prompt followed by the rejected reply and its problems.
pub fn repair_prompt(base: &str, raw: &str, problems: &[String]) -> String {
    let mut p = format!("{base}\n## Previous reply\n{}\n\n## Problems\n", raw.trim());
    for pr in problems {
        p.push_str("- ");
        p.push_str(pr);
        p.push('\n');
    }
    p.push_str("\nReply again with one corrected JSON object in a ```json fenced block.\n");
    p
}
