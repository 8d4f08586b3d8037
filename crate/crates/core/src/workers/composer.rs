//! Fact Idea Composer: k independent samples merged by majority vote.

use super::{check_supported, profile, WorkerError, FACT_COMPOSER};
use crate::agent::Agent;
use crate::model::{FactIdea, FactType};
use crate::represent::DatasetRepresentation;
use indexmap::IndexMap;
use serde_json::{json, Value as Json};

pub const DEFAULT_SAMPLES: usize = 3;
pub const DEFAULT_MAX_FACTS: usize = 12;

/// One proposal as returned by a sample, before merging.
#[derive(Debug, Clone, PartialEq)]
pub struct RawIdea {
    pub fact_type: FactType,
    pub content: String,
    pub significance: f64,
}

/// Fact type plus the content's lowercased words, punctuation stripped and
/// sorted, so rephrasings that only reorder words collapse together.
pub fn signature(fact_type: FactType, content: &str) -> String {
    let lowered = content.to_lowercase();
    let mut words: Vec<&str> = lowered
        .split(|c: char| !c.is_alphanumeric() && c != '$' && c != '%')
        .filter(|w| !w.is_empty())
        .collect();
    words.sort_unstable();
    format!("{}|{}", fact_type.as_str(), words.join(" "))
}

pub fn majority(k: usize) -> usize {
    k.div_ceil(2)
}

/// Keeps ideas whose signature appears in at least `ceil(k/2)` samples,
/// ranks them by mean significance (ties: first appearance) and assigns
/// ids `f1..` in rank order.
pub fn merge_samples(samples: &[Vec<RawIdea>], n_max: usize) -> Vec<FactIdea> {
    struct Acc {
        first: RawIdea,
        samples: usize,
        total: f64,
        hits: usize,
    }
    let mut acc: IndexMap<String, Acc> = IndexMap::new();
    for sample in samples {
        let mut seen = std::collections::HashSet::new();
        for idea in sample {
            let sig = signature(idea.fact_type, &idea.content);
            let e = acc.entry(sig.clone()).or_insert_with(|| Acc {
                first: idea.clone(),
                samples: 0,
                total: 0.0,
                hits: 0,
            });
            e.total += idea.significance;
            e.hits += 1;
            if seen.insert(sig) {
                e.samples += 1;
            }
        }
    }
    let need = majority(samples.len());
    let mut kept: Vec<(f64, RawIdea)> = acc
        .into_values()
        .filter(|a| a.samples >= need)
        .map(|a| (a.total / a.hits as f64, a.first))
        .collect();
    kept.sort_by(|a, b| b.0.total_cmp(&a.0));
    kept.truncate(n_max);
    kept.into_iter()
        .enumerate()
        .map(|(i, (sig, idea))| FactIdea {
            id: format!("f{}", i + 1),
            fact_type: idea.fact_type,
            content: idea.content,
            significance: sig,
        })
        .collect()
}

fn parse_sample(output: &Json) -> Vec<RawIdea> {
    output["facts"]
        .as_array()
        .map(|facts| {
            facts
                .iter()
                .filter_map(|f| {
                    let fact_type: FactType = serde_json::from_value(f["fact_type"].clone()).ok()?;
                    let content = f["content"].as_str()?.trim().to_string();
                    let significance = f["significance"].as_f64()?.clamp(0.0, 1.0);
                    (!content.is_empty()).then_some(RawIdea {
                        fact_type,
                        content,
                        significance,
                    })
                })
                .collect()
        })
        .unwrap_or_default()
}

fn payload(rep: &DatasetRepresentation, request: Option<&str>, mode: &str, sample: usize, k: usize, n_max: usize) -> Json {
    let mut p = json!({
        "dataset": rep.text,
        "mode": mode,
        "sample": sample,
        "sample_count": k,
        "max_facts": n_max,
    });
    if let Some(r) = request {
        p["request"] = json!(r);
    }
    p
}

/// Samples the composer `k` times (the sample index is part of each
/// payload, so each sample is a distinct request) and merges by majority.
pub fn compose_fact_ideas(
    agent: &Agent,
    rep: &DatasetRepresentation,
    request: Option<&str>,
    k: usize,
    n_max: usize,
) -> Result<Vec<FactIdea>, WorkerError> {
    let request = request.map(str::trim).filter(|r| !r.is_empty());
    if let Some(r) = request {
        check_supported(r)?;
    }
    let k = k.max(1);
    let prof = profile(FACT_COMPOSER);
    let mut samples = Vec::with_capacity(k);
    for i in 1..=k {
        let out = agent.invoke(prof, &payload(rep, request, "sheet", i, k, n_max))?;
        samples.push(parse_sample(&out.output));
    }
    let ideas = merge_samples(&samples, n_max.max(1));
    agent.log.event(
        FACT_COMPOSER,
        format!(
            "{} idea(s) kept from {} proposal(s) (threshold {} of {k})",
            ideas.len(),
            samples.iter().map(Vec::len).sum::<usize>(),
            majority(k)
        ),
    );
    if ideas.is_empty() {
        return Err(WorkerError::NoFacts { samples: k });
    }
    Ok(ideas)
}

/// Turns a natural-language request into exactly one idea (single mode);
/// the caller assigns the id.
pub fn compose_single(
    agent: &Agent,
    rep: &DatasetRepresentation,
    request: &str,
) -> Result<FactIdea, WorkerError> {
    let request = request.trim();
    if request.is_empty() {
        return Err(WorkerError::InvalidRequest("the fact request is empty".into()));
    }
    check_supported(request)?;
    let out = agent.invoke(profile(FACT_COMPOSER), &payload(rep, Some(request), "single", 1, 1, 1))?;
    let idea = parse_sample(&out.output)
        .into_iter()
        .next()
        .ok_or(WorkerError::NoFacts { samples: 1 })?;
    Ok(FactIdea {
        id: String::new(),
        fact_type: idea.fact_type,
        content: idea.content,
        significance: idea.significance,
    })
}
