//! Factsheet Organizer: topic grouping with a partition check, plus the
//! placement call used when a single fact joins an existing sheet.

use super::{profile, WorkerError, ORGANIZER, PLACER};
use crate::agent::{Agent, AgentError};
use crate::ingest::Dataset;
use crate::model::{FactCard, Section, SheetStructure, INTRODUCTION_ID, INTRODUCTION_TOPIC};
use serde_json::{json, Value as Json};
use std::collections::{BTreeMap, BTreeSet, HashMap};

pub const MAX_TOPICS: usize = 5;
pub const FALLBACK_TOPIC: &str = "Findings";

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StructureSource {
    Proposed,
    Repaired,
    Fallback,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Organized {
    pub structure: SheetStructure,
    pub source: StructureSource,
}

/// Deterministic summary card for the pinned first section.
pub fn introduction_note(ds: &Dataset, request: Option<&str>) -> String {
    let cols: Vec<String> = ds
        .columns
        .iter()
        .map(|c| format!("{} ({})", c.name, c.data_class.as_str()))
        .collect();
    let mut note = format!(
        "{} rows and {} columns: {}.",
        ds.row_count,
        ds.columns.len(),
        cols.join(", ")
    );
    if let Some(r) = request.map(str::trim).filter(|r| !r.is_empty()) {
        note.push_str(&format!(" Request: {r}"));
    }
    note
}

pub fn introduction(ds: &Dataset, request: Option<&str>) -> Section {
    Section {
        id: INTRODUCTION_ID.into(),
        topic: INTRODUCTION_TOPIC.into(),
        fact_ids: vec![],
        note: Some(introduction_note(ds, request)),
    }
}

/// Checks a proposed grouping: every fact id exactly once, 1..=5 topics
/// (at least two when there are two or more facts), distinct non-empty
/// topics, no empty groups.
pub fn check_partition(groups: &[(String, Vec<String>)], fact_ids: &[&str]) -> Vec<String> {
    let mut problems = Vec::new();
    let min = if fact_ids.len() >= 2 { 2 } else { 1 };
    if groups.len() < min || groups.len() > MAX_TOPICS {
        problems.push(format!(
            "{} sections proposed; use between {min} and {MAX_TOPICS}",
            groups.len()
        ));
    }
    let known: BTreeSet<&str> = fact_ids.iter().copied().collect();
    let mut seen: HashMap<&str, usize> = HashMap::new();
    let mut topics = BTreeSet::new();
    for (i, (topic, ids)) in groups.iter().enumerate() {
        let t = topic.trim();
        if t.is_empty() {
            problems.push(format!("sections[{i}] has an empty topic"));
        } else if t.eq_ignore_ascii_case(INTRODUCTION_TOPIC) {
            problems.push(format!("sections[{i}]: the Introduction is added automatically"));
        } else if !topics.insert(t.to_lowercase()) {
            problems.push(format!("topic {t:?} is used twice"));
        }
        if ids.is_empty() {
            problems.push(format!("sections[{i}] has no facts"));
        }
        for id in ids {
            if !known.contains(id.as_str()) {
                problems.push(format!("unknown fact id {id:?}"));
            }
            *seen.entry(id.as_str()).or_default() += 1;
        }
    }
    for id in fact_ids {
        match seen.get(id).copied().unwrap_or(0) {
            0 => problems.push(format!("fact {id} is missing")),
            1 => {}
            n => problems.push(format!("fact {id} appears {n} times")),
        }
    }
    problems
}

fn parse_groups(output: &Json) -> (String, Vec<(String, Vec<String>)>) {
    let title = output["title"].as_str().unwrap_or_default().trim().to_string();
    let groups = output["sections"]
        .as_array()
        .map(|s| {
            s.iter()
                .map(|g| {
                    let topic = g["topic"].as_str().unwrap_or_default().trim().to_string();
                    let ids = g["fact_ids"]
                        .as_array()
                        .map(|a| a.iter().filter_map(|v| v.as_str().map(str::to_string)).collect())
                        .unwrap_or_default();
                    (topic, ids)
                })
                .collect()
        })
        .unwrap_or_default();
    (title, groups)
}

fn assemble(ds: &Dataset, request: Option<&str>, title: String, groups: Vec<(String, Vec<String>)>) -> SheetStructure {
    let title = if title.is_empty() { format!("{} fact sheet", ds.name) } else { title };
    let mut sections = vec![introduction(ds, request)];
    sections.extend(groups.into_iter().enumerate().map(|(i, (topic, fact_ids))| Section {
        id: format!("s{}", i + 1),
        topic,
        fact_ids,
        note: None,
    }));
    SheetStructure { title, sections }
}

/// Groups `facts` (in rank order) into topics behind a synthesized
/// Introduction. One repair on an invalid partition, then a single
/// "Findings" section in rank order.
pub fn organize_sheet(
    agent: &Agent,
    ds: &Dataset,
    request: Option<&str>,
    facts: &[FactCard],
) -> Result<Organized, WorkerError> {
    if facts.is_empty() {
        return Err(WorkerError::InvalidRequest("no facts to organize".into()));
    }
    let ids: Vec<&str> = facts.iter().map(FactCard::id).collect();
    let listing: Vec<Json> = facts
        .iter()
        .map(|f| {
            json!({
                "id": f.idea.id,
                "fact_type": f.idea.fact_type,
                "content": f.idea.content,
                "statement": f.statement,
            })
        })
        .collect();
    let mut feedback: Vec<String> = Vec::new();
    let mut title = String::new();
    for round in 0..2 {
        let mut payload = json!({
            "dataset_name": ds.name,
            "facts": listing,
            "feedback": feedback,
        });
        if let Some(r) = request {
            payload["request"] = json!(r);
        }
        let problems = match agent.invoke(profile(ORGANIZER), &payload) {
            Ok(inv) => {
                let (t, groups) = parse_groups(&inv.output);
                let problems = check_partition(&groups, &ids);
                if problems.is_empty() {
                    let source = if round == 0 { StructureSource::Proposed } else { StructureSource::Repaired };
                    return Ok(Organized {
                        structure: assemble(ds, request, t, groups),
                        source,
                    });
                }
                if title.is_empty() {
                    title = t;
                }
                problems
            }
            Err(AgentError::InvalidOutput { problems, .. }) => problems,
            Err(e) => return Err(e.into()),
        };
        agent.log.event(
            ORGANIZER,
            format!("structure {} rejected: {}", round + 1, problems.join("; ")),
        );
        feedback = problems;
    }
    agent.log.event(ORGANIZER, "using single-section fallback");
    let all = ids.iter().map(|s| s.to_string()).collect();
    Ok(Organized {
        structure: assemble(ds, request, title, vec![(FALLBACK_TOPIC.into(), all)]),
        source: StructureSource::Fallback,
    })
}

/// Target section for a newly added fact: the placer's choice when it names
/// an existing non-Introduction section, else the last such section. `None`
/// when the sheet has no section besides the Introduction.
pub fn place_fact(
    agent: &Agent,
    structure: &SheetStructure,
    facts: &BTreeMap<String, FactCard>,
    card: &FactCard,
) -> Result<Option<String>, WorkerError> {
    let candidates: Vec<&Section> = structure.sections.iter().filter(|s| !s.is_introduction()).collect();
    let Some(last) = candidates.last() else {
        return Ok(None);
    };
    let sections: Vec<Json> = candidates
        .iter()
        .map(|s| {
            let contents: Vec<&str> = s
                .fact_ids
                .iter()
                .filter_map(|id| facts.get(id).map(|f| f.idea.content.as_str()))
                .collect();
            json!({"id": s.id, "topic": s.topic, "facts": contents})
        })
        .collect();
    let payload = json!({
        "fact": {
            "fact_type": card.idea.fact_type,
            "content": card.idea.content,
            "statement": card.statement,
        },
        "sections": sections,
    });
    let chosen = match agent.invoke(profile(PLACER), &payload) {
        Ok(inv) => inv.output["section_id"].as_str().map(str::to_string),
        Err(AgentError::InvalidOutput { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    Ok(Some(match chosen.filter(|id| candidates.iter().any(|s| &s.id == id)) {
        Some(id) => id,
        None => {
            agent.log.event(PLACER, "placement unusable; appending to the last section");
            last.id.clone()
        }
    }))
}
