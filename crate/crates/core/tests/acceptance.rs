//! One pass/fail line per acceptance criterion.
//!
//!     cargo test -p factflow --test acceptance -- --nocapture

mod common;

use common::checks::{self, Check};

#[test]
fn acceptance() {
    type Criterion = (&'static str, Box<dyn Fn() -> Check>);
    let criteria: Vec<Criterion> = vec![
        ("layout optimality", Box::new(|| checks::layout_optimality(4000))),
        ("layout determinism", Box::new(|| checks::layout_determinism(100))),
        ("anonymization properties", Box::new(|| checks::anonymization_properties(1000))),
        ("column statistics oracle", Box::new(|| checks::stats_oracle(1000))),
        ("SQL golden suite", Box::new(checks::sql_golden)),
        ("SQL literal de-anonymization", Box::new(|| checks::deanonymize_equivalence(200))),
        ("renderer contracts", Box::new(checks::renderer_contracts)),
        ("end-to-end replay run", Box::new(checks::end_to_end_replay)),
        ("edit-loop integrity", Box::new(checks::edit_loop)),
        ("error-path coverage", Box::new(checks::error_paths)),
    ];
    let mut failed = Vec::new();
    for (name, check) in &criteria {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                println!("FAIL  {name}: {why}");
                failed.push(*name);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed.len(), criteria.len());
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
