//! Six-attribute worker definitions and deterministic prompt assembly.

use super::schema::Schema;
use serde::{Deserialize, Serialize};
use serde_json::Value as Json;
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub input: Json,
    pub output: Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkerProfile {
    pub name: String,
    pub overall_goal: String,
    pub specific_role: String,
    pub persona: String,
    pub input_schema: Schema,
    pub output_schema: Schema,
    #[serde(default)]
    pub few_shot_examples: Vec<Example>,
    #[serde(default)]
    pub knowledge_base_refs: Vec<String>,
    pub instructions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProfileError {
    #[error("profile {name}: {problem}")]
    Invalid { name: String, problem: String },
    #[error("payload for {worker} does not match its input schema: {}", .problems.join("; "))]
    Payload { worker: String, problems: Vec<String> },
}

impl WorkerProfile {
    pub fn from_json(text: &str) -> Result<Self, ProfileError> {
        let p: WorkerProfile = serde_json::from_str(text).map_err(|e| ProfileError::Invalid {
            name: "<unparsed>".into(),
            problem: e.to_string(),
        })?;
        p.check()?;
        Ok(p)
    }

    /// Schemas are non-empty, knowledge refs resolve, and every example
    /// validates against both schemas.
    pub fn check(&self) -> Result<(), ProfileError> {
        let bad = |problem: String| ProfileError::Invalid {
            name: self.name.clone(),
            problem,
        };
        if self.input_schema.is_empty() || self.output_schema.is_empty() {
            return Err(bad("input and output schemas must be non-empty".into()));
        }
        if self.instructions.is_empty() {
            return Err(bad("at least one instruction is required".into()));
        }
        for r in &self.knowledge_base_refs {
            if super::knowledge::get(r).is_none() {
                return Err(bad(format!("unknown knowledge-base asset {r:?}")));
            }
        }
        for (i, ex) in self.few_shot_examples.iter().enumerate() {
            if let Err(p) = self.input_schema.validate(&ex.input) {
                return Err(bad(format!("example {} input: {}", i + 1, p.join("; "))));
            }
            if let Err(p) = self.output_schema.validate(&ex.output) {
                return Err(bad(format!("example {} output: {}", i + 1, p.join("; "))));
            }
        }
        Ok(())
    }
}

fn json_block(out: &mut String, v: &Json) {
    out.push_str("```json\n");
    out.push_str(&serde_json::to_string_pretty(v).expect("JSON values serialize"));
    out.push_str("\n```\n");
}

/// Assembles the prompt: goal, role, persona, knowledge, instructions,
/// examples (omitted when there are none), output format, then the payload.
pub fn render_prompt(profile: &WorkerProfile, payload: &Json) -> Result<String, ProfileError> {
    profile
        .input_schema
        .validate(payload)
        .map_err(|problems| ProfileError::Payload {
            worker: profile.name.clone(),
            problems,
        })?;
    let mut out = String::new();
    writeln!(out, "Worker: {}\n", profile.name).unwrap();
    writeln!(out, "## Overall goal\n{}\n", profile.overall_goal.trim()).unwrap();
    writeln!(out, "## Specific role\n{}\n", profile.specific_role.trim()).unwrap();
    writeln!(out, "## Persona\n{}\n", profile.persona.trim()).unwrap();
    if !profile.knowledge_base_refs.is_empty() {
        out.push_str("## Knowledge base\n");
        for r in &profile.knowledge_base_refs {
            let text = super::knowledge::get(r).unwrap_or("");
            writeln!(out, "### {r}\n{}\n", text.trim()).unwrap();
        }
    }
    out.push_str("## Instructions\n");
    for (i, step) in profile.instructions.iter().enumerate() {
        writeln!(out, "{}. {}", i + 1, step.trim()).unwrap();
    }
    out.push('\n');
    if !profile.few_shot_examples.is_empty() {
        out.push_str("## Examples\n");
        for (i, ex) in profile.few_shot_examples.iter().enumerate() {
            writeln!(out, "### Example {}\nInput:", i + 1).unwrap();
            json_block(&mut out, &ex.input);
            out.push_str("Output:\n");
            json_block(&mut out, &ex.output);
        }
        out.push('\n');
    }
    out.push_str("## Output format\nReply with exactly one JSON object inside a ```json fenced block, with these fields:\n");
    out.push_str(&profile.output_schema.describe());
    out.push_str("\n## Input\n");
    json_block(&mut out, payload);
    Ok(out)
}
