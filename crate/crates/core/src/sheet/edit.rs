//! Structural and text edits on a sheet.

use super::{FactSheet, SheetError};
use crate::agent::BlockStore;
use crate::chart::render;
use crate::model::{CausalQa, FactCard, Section, INTRODUCTION_ID};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "field", rename_all = "snake_case")]
pub enum TextTarget {
    SheetTitle,
    Note { section_id: String },
    Statement { fact_id: String },
    ChartTitle { fact_id: String },
    Question { fact_id: String, index: usize },
    Answer { fact_id: String, index: usize },
}

/// One edit. Positions are final indices: section positions count the
/// Introduction as index 0, fact positions index the section's fact list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum EditOp {
    AddSection {
        topic: String,
        #[serde(default)]
        position: Option<usize>,
    },
    DeleteSection {
        section_id: String,
    },
    MoveSection {
        section_id: String,
        position: usize,
    },
    RenameSection {
        section_id: String,
        topic: String,
    },
    DeleteFact {
        fact_id: String,
    },
    MoveFact {
        fact_id: String,
        section_id: String,
        #[serde(default)]
        position: Option<usize>,
    },
    ReorderFact {
        fact_id: String,
        position: usize,
    },
    EditText {
        #[serde(flatten)]
        target: TextTarget,
        text: String,
    },
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, SheetError> {
    Err(SheetError::Validation(msg.into()))
}

fn section_index(sheet: &FactSheet, id: &str) -> Result<usize, SheetError> {
    sheet
        .structure
        .sections
        .iter()
        .position(|s| s.id == id)
        .ok_or_else(|| SheetError::Validation(format!("unknown section {id:?}")))
}

/// (section index, position within it) of a placed fact.
fn locate_fact(sheet: &FactSheet, id: &str) -> Result<(usize, usize), SheetError> {
    sheet
        .structure
        .sections
        .iter()
        .enumerate()
        .find_map(|(si, s)| s.fact_ids.iter().position(|f| f == id).map(|fi| (si, fi)))
        .ok_or_else(|| SheetError::Validation(format!("unknown fact {id:?}")))
}

fn non_empty(text: &str, what: &str) -> Result<String, SheetError> {
    let t = text.trim();
    if t.is_empty() {
        return invalid(format!("{what} cannot be empty"));
    }
    Ok(t.to_string())
}

fn next_section_id(sheet: &FactSheet) -> String {
    let n = sheet
        .structure
        .sections
        .iter()
        .filter_map(|s| s.id.strip_prefix('s')?.parse::<u64>().ok())
        .max()
        .unwrap_or(0);
    format!("s{}", n + 1)
}

fn apply_one(sheet: &mut FactSheet, op: &EditOp, blocks: &BlockStore) -> Result<(), SheetError> {
    let len = sheet.structure.sections.len();
    match op {
        EditOp::AddSection { topic, position } => {
            let topic = non_empty(topic, "section topic")?;
            let at = position.unwrap_or(len);
            if at == 0 {
                return invalid("the Introduction is pinned first");
            }
            if at > len {
                return invalid(format!("section position {at} is past the end ({len})"));
            }
            let id = next_section_id(sheet);
            sheet.structure.sections.insert(
                at,
                Section {
                    id,
                    topic,
                    fact_ids: vec![],
                    note: None,
                },
            );
        }
        EditOp::DeleteSection { section_id } => {
            if section_id == INTRODUCTION_ID {
                return invalid("the Introduction cannot be deleted");
            }
            let i = section_index(sheet, section_id)?;
            let removed = sheet.structure.sections.remove(i);
            for f in removed.fact_ids {
                sheet.facts.remove(&f);
            }
        }
        EditOp::MoveSection { section_id, position } => {
            if section_id == INTRODUCTION_ID {
                return invalid("the Introduction is pinned first");
            }
            let i = section_index(sheet, section_id)?;
            if *position == 0 {
                return invalid("the Introduction is pinned first");
            }
            if *position >= len {
                return invalid(format!("section position {position} is out of range (max {})", len - 1));
            }
            let s = sheet.structure.sections.remove(i);
            sheet.structure.sections.insert(*position, s);
        }
        EditOp::RenameSection { section_id, topic } => {
            let topic = non_empty(topic, "section topic")?;
            let i = section_index(sheet, section_id)?;
            sheet.structure.sections[i].topic = topic;
        }
        EditOp::DeleteFact { fact_id } => {
            let (si, fi) = locate_fact(sheet, fact_id)?;
            sheet.structure.sections[si].fact_ids.remove(fi);
            sheet.facts.remove(fact_id);
        }
        EditOp::MoveFact {
            fact_id,
            section_id,
            position,
        } => {
            if section_id == INTRODUCTION_ID {
                return invalid("facts cannot be placed in the Introduction");
            }
            let (si, fi) = locate_fact(sheet, fact_id)?;
            let ti = section_index(sheet, section_id)?;
            let target_len = sheet.structure.sections[ti].fact_ids.len() - usize::from(si == ti);
            let at = position.unwrap_or(target_len);
            if at > target_len {
                return invalid(format!("fact position {at} is past the end ({target_len})"));
            }
            let id = sheet.structure.sections[si].fact_ids.remove(fi);
            sheet.structure.sections[ti].fact_ids.insert(at, id);
        }
        EditOp::ReorderFact { fact_id, position } => {
            let (si, fi) = locate_fact(sheet, fact_id)?;
            let ids = &mut sheet.structure.sections[si].fact_ids;
            if *position >= ids.len() {
                return invalid(format!("fact position {position} is out of range (max {})", ids.len() - 1));
            }
            let id = ids.remove(fi);
            ids.insert(*position, id);
        }
        EditOp::EditText { target, text } => edit_text(sheet, target, text, blocks)?,
    }
    Ok(())
}

fn card_mut<'a>(sheet: &'a mut FactSheet, id: &str) -> Result<&'a mut FactCard, SheetError> {
    sheet
        .facts
        .get_mut(id)
        .ok_or_else(|| SheetError::Validation(format!("unknown fact {id:?}")))
}

fn qa_mut<'a>(sheet: &'a mut FactSheet, id: &str, index: usize) -> Result<&'a mut CausalQa, SheetError> {
    let card = card_mut(sheet, id)?;
    let n = card.causal_qas.len();
    card.causal_qas
        .get_mut(index)
        .ok_or_else(|| SheetError::Validation(format!("fact {id:?} has {n} causal question(s); index {index} is out of range")))
}

fn edit_text(sheet: &mut FactSheet, target: &TextTarget, text: &str, blocks: &BlockStore) -> Result<(), SheetError> {
    match target {
        TextTarget::SheetTitle => sheet.structure.title = non_empty(text, "sheet title")?,
        TextTarget::Note { section_id } => {
            let i = section_index(sheet, section_id)?;
            let t = text.trim();
            sheet.structure.sections[i].note = (!t.is_empty()).then(|| t.to_string());
        }
        TextTarget::Statement { fact_id } => {
            let text = non_empty(text, "statement")?;
            card_mut(sheet, fact_id)?.statement = text;
        }
        TextTarget::ChartTitle { fact_id } => {
            let text = non_empty(text, "chart title")?;
            let card = card_mut(sheet, fact_id)?;
            card.chart.title = text;
            let chart = render(&card.chart, &card.table).map_err(|e| SheetError::Render(e.to_string()))?;
            card.chart_block = blocks.put(chart.svg_text.as_bytes())?;
        }
        TextTarget::Question { fact_id, index } => {
            let mut text = non_empty(text, "question")?;
            if !text.ends_with('?') {
                text.push('?');
            }
            qa_mut(sheet, fact_id, *index)?.question = text;
        }
        TextTarget::Answer { fact_id, index } => {
            let text = non_empty(text, "answer")?;
            qa_mut(sheet, fact_id, *index)?.answer = text;
        }
    }
    Ok(())
}

/// Applies `ops` in order to a copy of `sheet`, relaying out after each and
/// bumping the revision once per op. Returns the edited copy; on any error
/// the input is left as it was.
pub fn apply_ops(sheet: &FactSheet, ops: &[EditOp], blocks: &BlockStore) -> Result<FactSheet, SheetError> {
    let mut next = sheet.clone();
    for (i, op) in ops.iter().enumerate() {
        apply_one(&mut next, op, blocks).map_err(|e| match e {
            SheetError::Validation(m) if ops.len() > 1 => SheetError::Validation(format!("ops[{i}]: {m}")),
            other => other,
        })?;
        next.relayout()?;
        next.revision += 1;
    }
    Ok(next)
}
