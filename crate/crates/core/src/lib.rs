//! Automated fact-sheet generation from tabular datasets.

pub mod agent;
pub mod anonymize;
pub mod chart;
pub mod datasets;
pub mod ingest;
pub mod layout;
pub mod model;
pub mod query;
pub mod represent;
pub mod sheet;
pub mod workers;
