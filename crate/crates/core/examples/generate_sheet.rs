//! Generates a fact sheet from recorded worker replies and exports it.
//!
//! cargo run --example generate_sheet -- movies "Show me the top 5 dramas with the highest revenue this century"

use factflow::agent::ReplayTransport;
use factflow::sheet::{export_pdf, export_svg, generate_sheet, GenerateOptions, Workspace};
use std::path::Path;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let dataset = args.next().unwrap_or_else(|| "carsales".into());
    let request = args.next();
    let dir = tempfile::tempdir()?;
    let ws = Workspace::open(dir.path())?;
    let transport = ReplayTransport::new(Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/replay"));
    let opts = GenerateOptions { seed: 7, ..Default::default() };
    let progress = |stage| eprintln!("  {stage:?}");
    let sheet = generate_sheet(&ws, &dataset, request.as_deref(), &opts, &transport, &progress)?;

    println!("{}", sheet.structure.title);
    for (s, left) in sheet.structure.sections.iter().zip(&sheet.plan.column_flags) {
        println!("[{}] {}", if *left { "L" } else { "R" }, s.topic);
        for id in &s.fact_ids {
            let card = &sheet.facts[id];
            println!("    {id} {}: {}", card.chart.chart_type, card.statement);
            println!("       {}", card.sql);
        }
    }
    std::fs::create_dir_all("target")?;
    std::fs::write("target/sheet.svg", export_svg(&sheet)?)?;
    std::fs::write("target/sheet.pdf", export_pdf(&sheet)?)?;
    println!("wrote target/sheet.svg and target/sheet.pdf");
    Ok(())
}
