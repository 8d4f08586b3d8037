//! Applies structural and text edits to a generated sheet and shows how
//! the revision and the column layout follow.
//!
//! cargo run --example edit_sheet

use factflow::agent::ReplayTransport;
use factflow::sheet::{generate_sheet, EditOp, FactSheet, GenerateOptions, TextTarget, Workspace};
use std::path::Path;

fn show(sheet: &FactSheet) {
    println!("revision {}: {}", sheet.revision, sheet.structure.title);
    for (s, left) in sheet.plan.ordered_sections.iter().zip(&sheet.plan.column_flags) {
        let section = sheet.structure.sections.iter().find(|x| x.id == s.section_ref).unwrap();
        println!("  {} {:<24} {:?}", if *left { "L" } else { "R" }, section.topic, section.fact_ids);
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let ws = Workspace::open(dir.path())?;
    let transport = ReplayTransport::new(Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/replay"));
    let opts = GenerateOptions { seed: 7, ..Default::default() };
    let sheet = generate_sheet(&ws, "carsales", None, &opts, &transport, &|_| {})?;
    show(&sheet);

    let ops = vec![
        EditOp::EditText { target: TextTarget::SheetTitle, text: "Car sales, 2007 to 2011".into() },
        EditOp::AddSection { topic: "Highlights".into(), position: Some(1) },
        EditOp::MoveFact { fact_id: "f2".into(), section_id: "s4".into(), position: None },
        EditOp::MoveFact { fact_id: "f1".into(), section_id: "s4".into(), position: Some(0) },
    ];
    let edited = ws.apply_edit(sheet.id, Some(sheet.revision), &ops)?;
    show(&edited);

    // a second writer still holding revision 0 is turned away
    let stale = ws.apply_edit(sheet.id, Some(0), &[EditOp::DeleteFact { fact_id: "f3".into() }]);
    println!("stale edit: {}", stale.err().map(|e| e.to_string()).unwrap_or_default());
    Ok(())
}
