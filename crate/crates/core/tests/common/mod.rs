#![allow(dead_code)]

pub mod checks;
pub mod sqlgen;
pub mod tables;

use factflow::agent::ReplayTransport;
use factflow::sheet::{generate_sheet, FactSheet, GenerateOptions, SheetError, Stage, Workspace};
use std::path::PathBuf;
use tempfile::TempDir;

/// Requests the committed fixtures were recorded with.
pub const MOVIES_REQUEST: &str = "Show me the top 5 dramas with the highest revenue this century";
pub const FOX_REQUEST: &str = "The proportion of movies by type from Fox Studio";
pub const SEED: u64 = 7;

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/replay")
}

pub fn replay() -> ReplayTransport {
    ReplayTransport::new(fixtures_dir())
}

pub fn workspace() -> (TempDir, Workspace) {
    let dir = tempfile::tempdir().expect("temp dir");
    let ws = Workspace::open(dir.path()).expect("workspace");
    (dir, ws)
}

pub fn options() -> GenerateOptions {
    GenerateOptions {
        seed: SEED,
        ..Default::default()
    }
}

pub fn quiet(_: Stage) {}

pub fn generate(ws: &Workspace, dataset: &str, request: Option<&str>) -> Result<FactSheet, SheetError> {
    generate_sheet(ws, dataset, request, &options(), &replay(), &quiet)
}
