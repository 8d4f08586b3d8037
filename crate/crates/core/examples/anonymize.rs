//! Shows original rows next to their anonymized form, and a generated
//! predicate mapped back onto original values.
//!
//! cargo run --example anonymize -- movies 7

use factflow::anonymize::{anonymize_rows, build_map, deanonymize_literals};
use factflow::datasets;
use factflow::represent::{csv_line, quote_ident};

fn main() {
    let mut args = std::env::args().skip(1);
    let id = args.next().unwrap_or_else(|| "carsales".into());
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(7);
    let ds = datasets::bundled(&id).unwrap_or_else(|| panic!("no bundled dataset {id:?}"));
    let map = build_map(&ds, seed).expect("bundled datasets anonymize");

    let rows: Vec<usize> = (0..5.min(ds.row_count)).collect();
    let anon = anonymize_rows(&ds, &map, &rows).unwrap();
    println!("{}", csv_line(ds.columns.iter().map(|c| Some(c.name.as_str()))));
    for (&r, a) in rows.iter().zip(&anon) {
        println!("{}", csv_line(ds.row(r).unwrap()));
        println!("  -> {}", csv_line(a.iter().map(|c| c.as_deref())));
    }

    // a query written against what the model saw, in anonymized values
    let col = &ds.columns[0];
    let seen = anon[0][0].as_deref().unwrap();
    let sql = format!("SELECT * FROM {} WHERE {} = '{seen}'", quote_ident(&ds.name), quote_ident(&col.name));
    println!("\n{sql}\n  -> {}", deanonymize_literals(&sql, &map));
}
