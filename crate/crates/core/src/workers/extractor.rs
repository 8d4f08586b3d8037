//! Data Extractor: advise, generate, validate against the original data.

use super::{profile, ExtractionError, WorkerError, EXTRACTOR_ADVISOR, EXTRACTOR_GENERATOR};
use crate::agent::{Agent, AgentError};
use crate::anonymize::{deanonymize_literals_except, AnonymizationMap};
use crate::ingest::Dataset;
use crate::model::FactIdea;
use crate::query::{describe_result, run_sql, ResultTable};
use crate::represent::DatasetRepresentation;
use serde_json::{json, Value as Json};

pub const MAX_ATTEMPTS: u32 = 3;
const FEEDBACK_ROWS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    /// The executed SQL, with literals mapped back to original values.
    pub sql: String,
    pub table: ResultTable,
    pub attempts: u32,
}

fn fact_json(idea: &FactIdea) -> Json {
    json!({"fact_type": idea.fact_type, "content": idea.content})
}

/// Runs the advise/generate/validate loop for one idea, executing at most
/// `MAX_ATTEMPTS` generated queries. An error or an empty result feeds the
/// next attempt.
pub fn extract_data(
    agent: &Agent,
    idea: &FactIdea,
    rep: &DatasetRepresentation,
    request: Option<&str>,
    ds: &Dataset,
    map: &AnonymizationMap,
) -> Result<Extraction, WorkerError> {
    // literals named here are original values, never anonymized ones
    let mentioned: Vec<&str> = std::iter::once(idea.content.as_str()).chain(request).collect();
    let mut advise = json!({"dataset": rep.text, "fact": fact_json(idea)});
    if let Some(r) = request {
        advise["request"] = json!(r);
    }
    let advice = agent.invoke(profile(EXTRACTOR_ADVISOR), &advise)?;
    let recommendations = advice.output["recommendations"].clone();

    let mut previous: Vec<Json> = Vec::new();
    let mut last_sql = None;
    let mut last_error = String::new();
    for attempt in 1..=MAX_ATTEMPTS {
        let mut payload = json!({
            "dataset": rep.text,
            "fact": fact_json(idea),
            "recommendations": recommendations,
            "attempt": attempt,
            "previous": previous,
        });
        if let Some(r) = request {
            payload["request"] = json!(r);
        }
        let generated = match agent.invoke(profile(EXTRACTOR_GENERATOR), &payload) {
            Ok(inv) => inv.output["sql"].as_str().unwrap_or_default().trim().to_string(),
            Err(AgentError::InvalidOutput { problems, .. }) => {
                last_error = format!("reply was not a valid JSON object: {}", problems.join("; "));
                agent.log.event(
                    EXTRACTOR_GENERATOR,
                    format!("attempt {attempt} failed: {last_error}"),
                );
                previous.push(json!({"sql": "", "feedback": last_error}));
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let sql = deanonymize_literals_except(&generated, map, &mentioned);
        let feedback = match run_sql(&sql, ds) {
            Ok(table) if table.row_count() > 0 => {
                agent.log.event(
                    EXTRACTOR_GENERATOR,
                    format!("attempt {attempt} succeeded with {} row(s)", table.row_count()),
                );
                return Ok(Extraction {
                    sql,
                    table,
                    attempts: attempt,
                });
            }
            Ok(table) => format!(
                "the query returned no rows; relax the filters or check literal values.\n{}",
                describe_result(&table, FEEDBACK_ROWS)
            ),
            Err(e) => e.to_string(),
        };
        agent.log.event(
            EXTRACTOR_GENERATOR,
            format!("attempt {attempt} failed: {}", feedback.lines().next().unwrap_or("")),
        );
        // the model saw anonymized values, so feedback quotes its own SQL
        previous.push(json!({"sql": generated, "feedback": feedback}));
        last_sql = Some(sql);
        last_error = feedback;
    }
    Err(ExtractionError {
        attempts: MAX_ATTEMPTS,
        last_sql,
        last_error,
    }
    .into())
}
