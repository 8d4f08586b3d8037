//! Fact Writer: one grounded statement plus optional causal questions.

use super::{profile, words, WorkerError, WRITER};
use crate::agent::{Agent, AgentError};
use crate::model::{CausalQa, ChartParams, FactIdea};
use crate::query::{describe_result, ResultTable, Value};
use regex::Regex;
use serde_json::{json, Value as Json};
use std::sync::OnceLock;

pub const MAX_STATEMENT_WORDS: usize = 60;
pub const MAX_ANSWER_WORDS: usize = 50;
pub const MAX_QAS: usize = 2;
const PREVIEW_ROWS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TextSource {
    Written,
    Repaired,
    Template,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WrittenFact {
    pub statement: String,
    pub causal_qas: Vec<CausalQa>,
    pub source: TextSource,
}

/// A number quoted in prose: its value, decimal places and scale suffix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quoted {
    pub value: f64,
    pub decimals: u32,
    pub scale: f64,
    pub percent: bool,
}

fn number_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?i)(?:^|[^\w.])(-?\d{1,3}(?:,\d{3})+|-?\d+)(\.\d+)?(\s*%|\s*percent\b|\s*(?:k|thousand)\b|\s*(?:m|million)\b|\s*(?:b|bn|billion)\b)?([A-Za-z]?)")
            .unwrap()
    })
}

/// Numbers in `text`, skipping ordinals and identifiers such as "2nd" or "Q3".
pub fn quoted_numbers(text: &str) -> Vec<Quoted> {
    let mut out = Vec::new();
    for c in number_pattern().captures_iter(text) {
        if c.get(3).is_none() && !c[4].is_empty() {
            continue;
        }
        let int = c[1].replace(',', "");
        let frac = c.get(2).map_or("", |m| m.as_str());
        let Ok(value) = format!("{int}{frac}").parse::<f64>() else {
            continue;
        };
        let suffix = c.get(3).map_or(String::new(), |m| m.as_str().trim().to_lowercase());
        let (scale, percent) = match suffix.as_str() {
            "%" | "percent" => (1.0, true),
            "k" | "thousand" => (1e3, false),
            "m" | "million" => (1e6, false),
            "b" | "bn" | "billion" => (1e9, false),
            _ => (1.0, false),
        };
        out.push(Quoted {
            value,
            decimals: frac.len().saturating_sub(1) as u32,
            scale,
            percent,
        });
    }
    out
}

fn rounds_to(candidate: f64, q: &Quoted) -> bool {
    let p = 10f64.powi(q.decimals as i32);
    let target = (q.value * p).round();
    // "89 million" may quote a cell already stored in millions
    (candidate / q.scale * p).round() == target || (candidate * p).round() == target
}

/// Values a statement may quote: numeric cells, numbers inside text cells
/// and the row count.
pub fn grounding_values(table: &ResultTable) -> Vec<f64> {
    let mut vals = vec![table.row_count() as f64];
    for row in &table.rows {
        for v in row {
            match v {
                Value::Int(i) => vals.push(*i as f64),
                Value::Real(r) => vals.push(*r),
                Value::Text(s) => vals.extend(quoted_numbers(s).iter().map(|q| q.value * q.scale)),
                Value::Null => {}
            }
        }
    }
    vals
}

/// Quoted numbers that match no table value, verbatim or rounded to the
/// precision they are written with. A percentage may also quote a fraction
/// cell times 100.
pub fn ungrounded_numbers(text: &str, table: &ResultTable) -> Vec<String> {
    let vals = grounding_values(table);
    quoted_numbers(text)
        .into_iter()
        .filter(|q| {
            !vals.iter().any(|&v| {
                rounds_to(v, q) || (q.percent && rounds_to(v * 100.0, q))
            })
        })
        .map(|q| {
            let n = format!("{:.*}", q.decimals as usize, q.value);
            if q.percent { format!("{n}%") } else { n }
        })
        .collect()
}

/// Contract checks on a draft; an empty list means the draft is accepted.
pub fn check_draft(statement: &str, qas: &[CausalQa], table: &ResultTable) -> Vec<String> {
    let mut problems = Vec::new();
    if statement.trim().is_empty() {
        problems.push("statement is empty".into());
    }
    let n = words(statement);
    if n > MAX_STATEMENT_WORDS {
        problems.push(format!("statement has {n} words; the limit is {MAX_STATEMENT_WORDS}"));
    }
    for num in ungrounded_numbers(statement, table) {
        problems.push(format!("statement quotes {num}, which does not appear in the table"));
    }
    if qas.len() > MAX_QAS {
        problems.push(format!("{} causal questions given; at most {MAX_QAS} are allowed", qas.len()));
    }
    for (i, qa) in qas.iter().enumerate() {
        if !qa.question.trim_end().ends_with('?') {
            problems.push(format!("causal_qas[{i}].question must end with a question mark"));
        }
        let n = words(&qa.answer);
        if n > MAX_ANSWER_WORDS {
            problems.push(format!("causal_qas[{i}].answer has {n} words; the limit is {MAX_ANSWER_WORDS}"));
        }
    }
    problems
}

pub fn template_statement(chart: &ChartParams) -> String {
    let y = if chart.axis_labels.y.trim().is_empty() { &chart.y_field } else { &chart.axis_labels.y };
    let x = if chart.axis_labels.x.trim().is_empty() { &chart.x_field } else { &chart.axis_labels.x };
    format!("{y} by {x}")
}

fn parse_draft(output: &Json) -> (String, Vec<CausalQa>) {
    let statement = output["statement"].as_str().unwrap_or_default().trim().to_string();
    let qas = output
        .get("causal_qas")
        .and_then(|v| serde_json::from_value::<Vec<CausalQa>>(v.clone()).ok())
        .unwrap_or_default()
        .into_iter()
        .map(|qa| CausalQa {
            question: qa.question.trim().to_string(),
            answer: qa.answer.trim().to_string(),
        })
        .collect();
    (statement, qas)
}

fn row_json(table: &ResultTable, row: &[Value]) -> Json {
    let obj = table
        .columns
        .iter()
        .zip(row)
        .map(|(c, v)| {
            let j = match v {
                Value::Int(i) => json!(i),
                Value::Real(r) => json!(r),
                Value::Text(t) => json!(t),
                Value::Null => Json::Null,
            };
            (c.name.clone(), j)
        })
        .collect();
    Json::Object(obj)
}

/// Row count and the first, last, lowest and highest rows by the y field,
/// over the whole table, so a truncated preview cannot mislead.
pub fn highlights(table: &ResultTable, y_field: &str) -> Json {
    let mut out = json!({ "rows": table.row_count() });
    if let (Some(first), Some(last)) = (table.rows.first(), table.rows.last()) {
        out["first"] = row_json(table, first);
        out["last"] = row_json(table, last);
    }
    if let Some(yi) = table.column_index(y_field) {
        let numeric = || table.rows.iter().filter_map(|r| r[yi].as_f64().map(|v| (v, r)));
        if let Some((_, r)) = numeric().min_by(|a, b| a.0.total_cmp(&b.0)) {
            out["min"] = row_json(table, r);
        }
        if let Some((_, r)) = numeric().max_by(|a, b| a.0.total_cmp(&b.0)) {
            out["max"] = row_json(table, r);
        }
    }
    out
}

/// Drafts, checks, repairs once, then falls back to a template statement
/// with no causal questions.
pub fn write_fact(
    agent: &Agent,
    idea: &FactIdea,
    table: &ResultTable,
    chart: &ChartParams,
) -> Result<WrittenFact, WorkerError> {
    let mut chart_json = json!({
        "chart_type": chart.chart_type,
        "x_field": chart.x_field,
        "y_field": chart.y_field,
        "axis_labels": {"x": chart.axis_labels.x, "y": chart.axis_labels.y},
    });
    if let Some(c) = &chart.color_field {
        chart_json["color_field"] = json!(c);
    }
    let mut feedback: Vec<String> = Vec::new();
    for round in 0..2 {
        let payload = json!({
            "fact": {"fact_type": idea.fact_type, "content": idea.content},
            "table": describe_result(table, PREVIEW_ROWS),
            "highlights": highlights(table, &chart.y_field),
            "chart": chart_json,
            "feedback": feedback,
        });
        let problems = match agent.invoke(profile(WRITER), &payload) {
            Ok(inv) => {
                let (statement, causal_qas) = parse_draft(&inv.output);
                let problems = check_draft(&statement, &causal_qas, table);
                if problems.is_empty() {
                    let source = if round == 0 { TextSource::Written } else { TextSource::Repaired };
                    return Ok(WrittenFact {
                        statement,
                        causal_qas,
                        source,
                    });
                }
                problems
            }
            Err(AgentError::InvalidOutput { problems, .. }) => problems,
            Err(e) => return Err(e.into()),
        };
        agent.log.event(
            WRITER,
            format!("draft {} rejected: {}", round + 1, problems.join("; ")),
        );
        feedback = problems;
    }
    agent.log.event(WRITER, "using template statement");
    Ok(WrittenFact {
        statement: template_statement(chart),
        causal_qas: vec![],
        source: TextSource::Template,
    })
}
