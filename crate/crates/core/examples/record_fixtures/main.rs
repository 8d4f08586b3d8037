//! Regenerates the committed replay fixtures by running the bundled
//! scenarios against a rule-based stand-in model.
//!
//!     cargo run -p factflow --example record_fixtures [-- <fixture dir>]
//!
//! To record against a real endpoint instead, use the CLI with
//! `--transport record` and the credentials in the environment.

mod stub;

use factflow::agent::RecordTransport;
use factflow::sheet::{add_fact_nl, generate_sheet, GenerateOptions, Workspace};
use std::path::PathBuf;

pub const MOVIES_REQUEST: &str = "Show me the top 5 dramas with the highest revenue this century";
pub const FOX_REQUEST: &str = "The proportion of movies by type from Fox Studio";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/replay"));
    if dir.exists() {
        std::fs::remove_dir_all(&dir)?;
    }
    let transport = RecordTransport::new(Box::new(stub::StubModel), &dir)?;
    let scratch = tempfile::tempdir()?;
    let ws = Workspace::open(scratch.path())?;
    let opts = GenerateOptions {
        seed: 7,
        ..Default::default()
    };
    let quiet = |_| {};

    let cars = generate_sheet(&ws, "carsales", None, &opts, &transport, &quiet)?;
    report("carsales", &cars);
    let movies = generate_sheet(&ws, "movies", Some(MOVIES_REQUEST), &opts, &transport, &quiet)?;
    report("movies", &movies);
    let movies = add_fact_nl(&ws, movies.id, FOX_REQUEST, &transport)?;
    report("movies + fox", &movies);

    let n = std::fs::read_dir(&dir)?
        .filter(|e| e.as_ref().is_ok_and(|e| e.path().extension().is_some_and(|x| x == "txt")))
        .count();
    println!("{n} fixtures written to {}", dir.display());
    for entry in std::fs::read_dir(scratch.path().join("runs"))? {
        let text = std::fs::read_to_string(entry?.path())?;
        for line in text.lines().filter(|l| !l.contains("\"outcome\":\"ok\"")) {
            println!("  log: {line}");
        }
    }
    Ok(())
}

fn report(label: &str, sheet: &factflow::sheet::FactSheet) {
    println!(
        "{label}: \"{}\", {} section(s), {} fact(s), {} dropped",
        sheet.structure.title,
        sheet.structure.sections.len(),
        sheet.facts.len(),
        sheet.failures.len()
    );
    for f in &sheet.failures {
        println!("  dropped {} at {}: {}", f.fact_id, f.stage, f.error);
    }
}
