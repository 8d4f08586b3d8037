//! Fact-sheet documents: generation, editing, persistence, export and the
//! HTTP API.

pub mod edit;
pub mod export;
pub mod pipeline;
pub mod server;
pub mod store;

pub use edit::{apply_ops, EditOp, TextTarget};
pub use export::{export, export_pdf, export_svg, ExportFormat};
pub use pipeline::{add_fact_nl, generate_sheet, GenerateOptions, Stage};
pub use store::Workspace;

use crate::agent::BlockError;
use crate::anonymize::AnonymizeError;
use crate::ingest::IngestError;
use crate::layout::{blocks_for, split_columns, LayoutError, LayoutMode, LayoutPlan};
use crate::model::{FactCard, SheetStructure, INTRODUCTION_ID};
use crate::represent::RepresentError;
use crate::workers::WorkerError;
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use uuid::Uuid;

/// A fact idea that was dropped during generation, and why.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactFailure {
    pub fact_id: String,
    pub content: String,
    pub stage: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactSheet {
    pub id: Uuid,
    pub dataset_ref: String,
    pub user_request: Option<String>,
    pub seed: u64,
    pub budget: usize,
    pub structure: SheetStructure,
    pub facts: BTreeMap<String, FactCard>,
    pub plan: LayoutPlan,
    #[serde(default)]
    pub layout_mode: LayoutMode,
    pub revision: u64,
    #[serde(default)]
    pub failures: Vec<FactFailure>,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
}

impl FactSheet {
    pub fn relayout(&mut self) -> Result<(), LayoutError> {
        self.plan = split_columns(&blocks_for(&self.structure), self.layout_mode)?;
        Ok(())
    }

    /// Structure and layout invariants; empty when the sheet is consistent.
    pub fn check(&self) -> Vec<String> {
        let mut problems = Vec::new();
        let st = &self.structure;
        match st.sections.first() {
            Some(s) if s.id == INTRODUCTION_ID => {}
            _ => problems.push("the Introduction is not the first section".into()),
        }
        let mut ids = BTreeSet::new();
        for s in &st.sections {
            if !ids.insert(s.id.as_str()) {
                problems.push(format!("section id {} is duplicated", s.id));
            }
            if s.id == INTRODUCTION_ID && !std::ptr::eq(s, &st.sections[0]) {
                problems.push("the Introduction appears after the first position".into());
            }
        }
        let mut seen = BTreeSet::new();
        for f in st.fact_ids() {
            if !seen.insert(f) {
                problems.push(format!("fact {f} is placed twice"));
            }
            if !self.facts.contains_key(f) {
                problems.push(format!("fact {f} has no card"));
            }
        }
        for k in self.facts.keys() {
            if !seen.contains(k.as_str()) {
                problems.push(format!("fact {k} is not placed in any section"));
            }
        }
        match split_columns(&blocks_for(st), self.layout_mode) {
            Ok(plan) if plan == self.plan => {}
            Ok(_) => problems.push("layout plan is stale".into()),
            Err(e) => problems.push(e.to_string()),
        }
        if self.plan.column_flags.first() != Some(&true) {
            problems.push("the first section is not in the left column".into());
        }
        let (l, r) = self.plan.column_heights();
        if self.plan.best_diff != l.abs_diff(r) {
            problems.push("best_diff does not match the column heights".into());
        }
        problems
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SheetError {
    #[error("{kind} {id} not found")]
    NotFound { kind: &'static str, id: String },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("revision conflict: the sheet is at revision {actual}, the edit was based on {expected}")]
    Conflict { expected: u64, actual: u64 },
    #[error(transparent)]
    Worker(#[from] WorkerError),
    #[error("generation produced no usable facts: {}", summarize(.failures))]
    NoUsableFacts { failures: Vec<FactFailure> },
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Represent(#[from] RepresentError),
    #[error(transparent)]
    Anonymize(#[from] AnonymizeError),
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error(transparent)]
    Block(#[from] BlockError),
    #[error("chart rendering failed: {0}")]
    Render(String),
    #[error("storage error: {0}")]
    Io(String),
}

fn summarize(failures: &[FactFailure]) -> String {
    failures
        .iter()
        .map(|f| format!("{} ({}): {}", f.fact_id, f.stage, f.error))
        .collect::<Vec<_>>()
        .join("; ")
}

impl SheetError {
    /// Digest of the missing replay fixture, when that is the cause.
    pub fn fixture_missing(&self) -> Option<&str> {
        match self {
            SheetError::Worker(w) => w.fixture_missing(),
            _ => None,
        }
    }
}

impl From<std::io::Error> for SheetError {
    fn from(e: std::io::Error) -> Self {
        SheetError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for SheetError {
    fn from(e: serde_json::Error) -> Self {
        SheetError::Io(e.to_string())
    }
}
