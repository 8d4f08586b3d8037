//! Prints the privacy-preserving representation of a bundled dataset, the
//! text the workers see in place of the raw rows.
//!
//! cargo run --example represent -- movies 7

use factflow::anonymize::build_map;
use factflow::datasets;
use factflow::represent::{build_representation, DEFAULT_BUDGET_TOKENS};

fn main() {
    let mut args = std::env::args().skip(1);
    let id = args.next().unwrap_or_else(|| "carsales".into());
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(7);
    let ds = datasets::bundled(&id).unwrap_or_else(|| panic!("no bundled dataset {id:?}; try carsales or movies"));
    let map = build_map(&ds, seed).expect("classified datasets anonymize");
    let rep = build_representation(&ds, &map, DEFAULT_BUDGET_TOKENS, seed).expect("default budget fits");
    println!("{}", rep.text);
    eprintln!("~{} tokens, {} sample rows", rep.token_estimate, rep.example_rows.len());
}
