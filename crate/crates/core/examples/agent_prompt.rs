//! Prints the exact prompt a worker would send, its fixture digest and
//! whether a recorded reply exists for it.
//!
//! cargo run --example agent_prompt -- organizer

use factflow::agent::render_prompt;
use factflow::agent::transport::digest;
use factflow::workers::{profile, profile_names};
use serde_json::json;
use std::path::Path;

fn main() {
    let name = std::env::args().nth(1).unwrap_or_else(|| "organizer".into());
    if !profile_names().any(|n| n == name) {
        eprintln!("unknown worker {name:?}; one of: {}", profile_names().collect::<Vec<_>>().join(", "));
        std::process::exit(2);
    }
    let p = profile(&name);
    let payload = match name.as_str() {
        "organizer" => json!({
            "dataset_name": "CarSales",
            "facts": [
                {"id": "f1", "fact_type": "trend", "content": "Total Sale per Year", "statement": "Sales peaked in 2011."},
                {"id": "f2", "fact_type": "rank", "content": "Brand ranked by total Sale", "statement": "Nissan leads."}
            ],
            "feedback": []
        }),
        _ => json!({}),
    };
    match render_prompt(p, &payload) {
        Ok(prompt) => {
            println!("{prompt}");
            let d = digest(&prompt);
            let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/replay");
            let recorded = fixtures.join(format!("{d}.txt")).exists();
            eprintln!("digest {d} (recorded reply: {recorded})");
        }
        Err(e) => {
            eprintln!("payload rejected by the {name} input schema: {e}");
            std::process::exit(1);
        }
    }
}
