//! End-to-end generation and the natural-language fact add.

use super::{FactFailure, FactSheet, SheetError, Workspace};
use crate::agent::{Agent, LlmTransport, RunLog};
use crate::anonymize::{build_map, AnonymizationMap};
use crate::chart::render;
use crate::ingest::Dataset;
use crate::layout::{blocks_for, split_columns, LayoutMode};
use crate::model::{FactCard, FactIdea, Section};
use crate::represent::{build_representation, DatasetRepresentation, DEFAULT_BUDGET_TOKENS};
use crate::workers::composer::{compose_fact_ideas, compose_single, DEFAULT_MAX_FACTS, DEFAULT_SAMPLES};
use crate::workers::extractor::extract_data;
use crate::workers::organizer::{organize_sheet, place_fact};
use crate::workers::visualizer::choose_chart;
use crate::workers::writer::write_fact;
use crate::workers::check_supported;
use chrono::Utc;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use uuid::Uuid;

pub const ADDED_TOPIC: &str = "More findings";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Queued,
    Representing,
    Composing,
    BuildingFacts,
    Organizing,
    LayingOut,
    Done,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerateOptions {
    pub seed: u64,
    pub budget: usize,
    pub samples: usize,
    pub max_facts: usize,
    /// Run the per-fact stages on scoped threads. Off for transports whose
    /// answers depend on call order.
    pub parallel: bool,
    pub layout_mode: LayoutMode,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        GenerateOptions {
            seed: 0,
            budget: DEFAULT_BUDGET_TOKENS,
            samples: DEFAULT_SAMPLES,
            max_facts: DEFAULT_MAX_FACTS,
            parallel: true,
            layout_mode: LayoutMode::default(),
        }
    }
}

/// Representation inputs rebuilt from a dataset and seed; the map never
/// leaves this process.
struct Prepared {
    map: AnonymizationMap,
    rep: DatasetRepresentation,
}

fn prepare(ds: &Dataset, seed: u64, budget: usize) -> Result<Prepared, SheetError> {
    let map = build_map(ds, seed)?;
    let rep = build_representation(ds, &map, budget, seed)?;
    Ok(Prepared { map, rep })
}

/// Extract, chart, render and write one fact.
fn build_card(
    agent: &Agent,
    ws: &Workspace,
    idea: &FactIdea,
    request: Option<&str>,
    ds: &Dataset,
    prep: &Prepared,
) -> Result<FactCard, (&'static str, SheetError)> {
    let ext = extract_data(agent, idea, &prep.rep, request, ds, &prep.map).map_err(|e| ("extract", e.into()))?;
    let choice = choose_chart(agent, idea, &ext.table).map_err(|e| ("chart", e.into()))?;
    let chart = render(&choice.params, &ext.table).map_err(|e| ("render", SheetError::Render(e.to_string())))?;
    let chart_block = ws
        .blocks()
        .put(chart.svg_text.as_bytes())
        .map_err(|e| ("render", e.into()))?;
    let text = write_fact(agent, idea, &ext.table, &choice.params).map_err(|e| ("write", e.into()))?;
    Ok(FactCard {
        idea: idea.clone(),
        sql: ext.sql,
        table: ext.table,
        chart: choice.params,
        chart_block,
        statement: text.statement,
        causal_qas: text.causal_qas,
    })
}

fn is_fatal(e: &SheetError) -> bool {
    e.fixture_missing().is_some()
}

/// Runs the whole chain for a stored or bundled dataset and persists the
/// sheet. A failing fact is dropped and reported; a missing replay fixture
/// aborts the run.
pub fn generate_sheet(
    ws: &Workspace,
    dataset_ref: &str,
    request: Option<&str>,
    opts: &GenerateOptions,
    transport: &dyn LlmTransport,
    progress: &(dyn Fn(Stage) + Sync),
) -> Result<FactSheet, SheetError> {
    generate_sheet_with_id(ws, Uuid::new_v4(), dataset_ref, request, opts, transport, progress)
}

/// As [`generate_sheet`] with a caller-chosen id, so a server can report
/// status before the sheet exists.
pub fn generate_sheet_with_id(
    ws: &Workspace,
    id: Uuid,
    dataset_ref: &str,
    request: Option<&str>,
    opts: &GenerateOptions,
    transport: &dyn LlmTransport,
    progress: &(dyn Fn(Stage) + Sync),
) -> Result<FactSheet, SheetError> {
    let request = request.map(str::trim).filter(|r| !r.is_empty());
    if let Some(r) = request {
        check_supported(r)?;
    }
    let ds = ws.load_dataset(dataset_ref)?;
    let log = ws.run_log(id);
    let agent = Agent::new(transport, &log);

    progress(Stage::Representing);
    let prep = prepare(&ds, opts.seed, opts.budget)?;

    progress(Stage::Composing);
    let ideas = compose_fact_ideas(&agent, &prep.rep, request, opts.samples, opts.max_facts)?;

    progress(Stage::BuildingFacts);
    let results: Vec<Result<FactCard, (&'static str, SheetError)>> = if opts.parallel {
        std::thread::scope(|s| {
            let handles: Vec<_> = ideas
                .iter()
                .map(|idea| s.spawn(|| build_card(&agent, ws, idea, request, &ds, &prep)))
                .collect();
            handles.into_iter().map(|h| h.join().expect("fact worker panicked")).collect()
        })
    } else {
        ideas.iter().map(|idea| build_card(&agent, ws, idea, request, &ds, &prep)).collect()
    };

    let mut cards = Vec::new();
    let mut failures = Vec::new();
    for (idea, r) in ideas.iter().zip(results) {
        match r {
            Ok(card) => cards.push(card),
            Err((_, e)) if is_fatal(&e) => return Err(e),
            Err((stage, e)) => {
                log.event("pipeline", format!("fact {} dropped at {stage}: {e}", idea.id));
                failures.push(FactFailure {
                    fact_id: idea.id.clone(),
                    content: idea.content.clone(),
                    stage: stage.into(),
                    error: e.to_string(),
                });
            }
        }
    }
    if cards.is_empty() {
        return Err(SheetError::NoUsableFacts { failures });
    }

    progress(Stage::Organizing);
    let organized = organize_sheet(&agent, &ds, request, &cards)?;

    progress(Stage::LayingOut);
    let plan = split_columns(&blocks_for(&organized.structure), opts.layout_mode)?;
    let now = Utc::now();
    let sheet = FactSheet {
        id,
        dataset_ref: dataset_ref.to_string(),
        user_request: request.map(str::to_string),
        seed: opts.seed,
        budget: opts.budget,
        structure: organized.structure,
        facts: cards.into_iter().map(|c| (c.idea.id.clone(), c)).collect::<BTreeMap<_, _>>(),
        plan,
        layout_mode: opts.layout_mode,
        revision: 0,
        failures,
        created_at: now,
        updated_at: now,
    };
    ws.save_sheet(&sheet)?;
    log.event("pipeline", format!("sheet {id} saved with {} fact(s)", sheet.facts.len()));
    progress(Stage::Done);
    Ok(sheet)
}

fn next_fact_id(sheet: &FactSheet) -> String {
    let n = sheet
        .facts
        .keys()
        .chain(sheet.failures.iter().map(|f| &f.fact_id))
        .filter_map(|k| k.strip_prefix('f')?.parse::<u64>().ok())
        .max()
        .unwrap_or(0);
    format!("f{}", n + 1)
}

/// Turns a request into one new fact, places it in the most relevant
/// section and persists the sheet with the revision bumped. On any error
/// the stored sheet is unchanged.
pub fn add_fact_nl(
    ws: &Workspace,
    sheet_id: Uuid,
    request: &str,
    transport: &dyn LlmTransport,
) -> Result<FactSheet, SheetError> {
    let request = request.trim();
    if request.is_empty() {
        return Err(SheetError::Validation("the fact request is empty".into()));
    }
    check_supported(request)?;
    let lock = ws.lock(sheet_id);
    let _guard = lock.lock().unwrap();
    let mut sheet = ws.load_sheet(sheet_id)?;
    let ds = ws.load_dataset(&sheet.dataset_ref)?;
    let log: RunLog = ws.run_log(sheet_id);
    let agent = Agent::new(transport, &log);
    let prep = prepare(&ds, sheet.seed, sheet.budget)?;

    let mut idea = compose_single(&agent, &prep.rep, request)?;
    idea.id = next_fact_id(&sheet);
    let card = build_card(&agent, ws, &idea, Some(request), &ds, &prep).map_err(|(_, e)| e)?;
    let target = place_fact(&agent, &sheet.structure, &sheet.facts, &card)?;

    let section = match target {
        Some(id) => sheet
            .structure
            .sections
            .iter_mut()
            .find(|s| s.id == id)
            .expect("placer returns an existing section"),
        None => {
            let n = sheet.structure.sections.len();
            sheet.structure.sections.push(Section {
                id: format!("s{n}"),
                topic: ADDED_TOPIC.into(),
                fact_ids: vec![],
                note: None,
            });
            sheet.structure.sections.last_mut().unwrap()
        }
    };
    section.fact_ids.push(idea.id.clone());
    log.event("pipeline", format!("fact {} added to section {}", idea.id, section.id));
    sheet.facts.insert(idea.id.clone(), card);
    sheet.relayout()?;
    sheet.revision += 1;
    sheet.updated_at = Utc::now();
    ws.save_sheet(&sheet)?;
    Ok(sheet)
}
