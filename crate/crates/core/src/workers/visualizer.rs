//! Data Visualizer: LLM proposal, matrix validation, one repair, then a
//! deterministic fallback.

use super::{profile, WorkerError, VISUALIZER};
use crate::agent::{Agent, AgentError};
use crate::chart::{is_temporal_text, validate_params};
use crate::model::{AxisLabels, ChartParams, ChartType, ColorScheme, FactIdea};
use crate::query::{describe_result, ResultTable, Value, ValueType};
use serde_json::{json, Value as Json};

const PREVIEW_ROWS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChartSource {
    Proposed,
    Repaired,
    Fallback,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartChoice {
    pub params: ChartParams,
    pub source: ChartSource,
}

fn params_from(output: &Json) -> Option<ChartParams> {
    let mut p: ChartParams = serde_json::from_value(output.clone()).ok()?;
    if p.color_field.as_deref().is_some_and(|c| c.trim().is_empty()) {
        p.color_field = None;
    }
    Some(p)
}

fn distinct_integers(table: &ResultTable, i: usize) -> bool {
    let mut seen = std::collections::HashSet::new();
    table.column_values(i).all(|v| match v {
        Value::Int(n) => seen.insert(*n),
        Value::Null => true,
        _ => false,
    })
}

/// Deterministic choice over the result columns: x is the first column and
/// y the first other numeric column. Text x gives a bar chart, an ordered x
/// (date/year text or distinct integers) a line chart, any other numeric x a
/// scatter plot; otherwise a bar chart of the first two columns.
pub fn fallback_chart(idea: &FactIdea, table: &ResultTable) -> ChartParams {
    let cols = &table.columns;
    let x = 0;
    let y = (1..cols.len()).find(|&i| cols[i].ty.is_numeric());
    let temporal = cols[x].ty == ValueType::Text
        && table
            .column_values(x)
            .all(|v| v.as_text().is_none_or(is_temporal_text));
    let (chart_type, y) = match (cols[x].ty, y) {
        (ValueType::Text, Some(y)) if temporal => (ChartType::Line, y),
        (ValueType::Text, Some(y)) => (ChartType::Bar, y),
        (ValueType::Integer, Some(y)) if distinct_integers(table, x) => (ChartType::Line, y),
        (ValueType::Integer | ValueType::Real, Some(y)) => (ChartType::Scatter, y),
        _ => (ChartType::Bar, 1.min(cols.len() - 1)),
    };
    ChartParams {
        chart_type,
        x_field: cols[x].name.clone(),
        y_field: cols[y].name.clone(),
        color_field: None,
        extra_fields: vec![],
        axis_labels: AxisLabels {
            x: cols[x].name.clone(),
            y: cols[y].name.clone(),
        },
        title: idea.content.clone(),
        color_scheme: ColorScheme::Categorical,
    }
}

/// Chooses chart parameters for a non-empty result table.
pub fn choose_chart(agent: &Agent, idea: &FactIdea, table: &ResultTable) -> Result<ChartChoice, WorkerError> {
    if table.columns.len() < 2 {
        return Err(WorkerError::TooFewColumns {
            columns: table.columns.len(),
        });
    }
    let columns: Vec<Json> = table
        .columns
        .iter()
        .map(|c| json!({"name": c.name, "type": c.ty}))
        .collect();
    let mut feedback: Vec<String> = Vec::new();
    for round in 0..2 {
        let payload = json!({
            "fact": {"fact_type": idea.fact_type, "content": idea.content},
            "columns": columns,
            "table": describe_result(table, PREVIEW_ROWS),
            "feedback": feedback,
        });
        let problems = match agent.invoke(profile(VISUALIZER), &payload) {
            Ok(inv) => match params_from(&inv.output) {
                Some(params) => match validate_params(&params, table) {
                    Ok(()) => {
                        let source = if round == 0 {
                            ChartSource::Proposed
                        } else {
                            ChartSource::Repaired
                        };
                        return Ok(ChartChoice { params, source });
                    }
                    Err(v) => v,
                },
                None => vec!["chart parameters could not be read".into()],
            },
            Err(AgentError::InvalidOutput { problems, .. }) => problems,
            Err(e) => return Err(e.into()),
        };
        agent.log.event(
            VISUALIZER,
            format!("proposal {} rejected: {}", round + 1, problems.join("; ")),
        );
        feedback = problems;
    }
    agent.log.event(VISUALIZER, "using fallback chart");
    Ok(ChartChoice {
        params: fallback_chart(idea, table),
        source: ChartSource::Fallback,
    })
}
