//! The five workers of the generation chain plus the placement helper used
//! when a fact is added to an existing sheet.

pub mod composer;
pub mod extractor;
pub mod organizer;
pub mod visualizer;
pub mod writer;

use crate::agent::{AgentError, WorkerProfile};
use regex::Regex;
use std::collections::BTreeMap;
use std::sync::OnceLock;

pub const FACT_COMPOSER: &str = "fact_composer";
pub const EXTRACTOR_ADVISOR: &str = "extractor_advisor";
pub const EXTRACTOR_GENERATOR: &str = "extractor_generator";
pub const VISUALIZER: &str = "visualizer";
pub const WRITER: &str = "writer";
pub const ORGANIZER: &str = "organizer";
pub const PLACER: &str = "placer";

const PROFILE_ASSETS: &[(&str, &str)] = &[
    (FACT_COMPOSER, include_str!("../../assets/profiles/fact_composer.json")),
    (
        EXTRACTOR_ADVISOR,
        include_str!("../../assets/profiles/extractor_advisor.json"),
    ),
    (
        EXTRACTOR_GENERATOR,
        include_str!("../../assets/profiles/extractor_generator.json"),
    ),
    (VISUALIZER, include_str!("../../assets/profiles/visualizer.json")),
    (WRITER, include_str!("../../assets/profiles/writer.json")),
    (ORGANIZER, include_str!("../../assets/profiles/organizer.json")),
    (PLACER, include_str!("../../assets/profiles/placer.json")),
];

/// Bundled profile by worker name. Panics on an unknown name; the asset
/// set is fixed at compile time and checked by tests.
pub fn profile(name: &str) -> &'static WorkerProfile {
    static PROFILES: OnceLock<BTreeMap<&'static str, WorkerProfile>> = OnceLock::new();
    PROFILES
        .get_or_init(|| {
            PROFILE_ASSETS
                .iter()
                .map(|(n, text)| {
                    let p = WorkerProfile::from_json(text)
                        .unwrap_or_else(|e| panic!("bundled profile {n}: {e}"));
                    assert_eq!(p.name, *n, "profile asset name mismatch");
                    (*n, p)
                })
                .collect()
        })
        .get(name)
        .unwrap_or_else(|| panic!("no bundled worker profile named {name}"))
}

pub fn profile_names() -> impl Iterator<Item = &'static str> {
    PROFILE_ASSETS.iter().map(|(n, _)| *n)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("data extraction failed after {attempts} attempt(s): {last_error}")]
pub struct ExtractionError {
    pub attempts: u32,
    pub last_sql: Option<String>,
    pub last_error: String,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WorkerError {
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error("no fact idea was proposed by a majority of the {samples} samples; try a broader request")]
    NoFacts { samples: usize },
    #[error("unsupported capability: {0}")]
    UnsupportedCapability(String),
    #[error(transparent)]
    Extraction(#[from] ExtractionError),
    #[error("cannot chart a table with {columns} column(s); at least two are needed")]
    TooFewColumns { columns: usize },
    #[error("invalid request: {0}")]
    InvalidRequest(String),
}

impl WorkerError {
    pub fn fixture_missing(&self) -> Option<&str> {
        match self {
            WorkerError::Agent(a) => a.fixture_missing(),
            _ => None,
        }
    }
}

fn forecasting_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"(?i)\b(predict\w*|forecast\w*|projections?|project(ed)? (growth|sales|revenue)|extrapolat\w*|future|next (year|decade|quarter|month)s?|will (be|grow|rise|fall|increase|decrease))\b",
        )
        .unwrap()
    })
}

/// Rejects predictive requests; the chain only describes observed data.
pub fn check_supported(request: &str) -> Result<(), WorkerError> {
    match forecasting_pattern().find(request) {
        Some(m) => Err(WorkerError::UnsupportedCapability(format!(
            "forecasting and predictive modelling are not supported (request mentions {:?}); ask about patterns in the existing data instead",
            m.as_str()
        ))),
        None => Ok(()),
    }
}

pub(crate) fn words(s: &str) -> usize {
    s.split_whitespace().count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_profiles_valid() {
        for n in profile_names() {
            assert_eq!(profile(n).name, n);
        }
    }

    #[test]
    fn forecasting_rejected() {
        let err = check_supported(
            "Predict the future trends of different studios in choosing the most profitable movie genre",
        )
        .unwrap_err();
        assert!(matches!(err, WorkerError::UnsupportedCapability(_)));
        assert!(check_supported("The proportion of movies by type from Fox Studio").is_ok());
        assert!(check_supported("Show me the top 5 dramas with the highest revenue this century").is_ok());
        assert!(check_supported("What will sales be next year?").is_err());
    }
}
