//! Runs SQL against a bundled dataset with the in-process engine.
//!
//! cargo run --example query -- movies 'SELECT "Studio", COUNT(*) AS n FROM "Movies" GROUP BY "Studio" ORDER BY n DESC'

use factflow::datasets;
use factflow::query::{describe_result, run_sql};

fn main() {
    let mut args = std::env::args().skip(1);
    let id = args.next().unwrap_or_else(|| "carsales".into());
    let sql = args
        .next()
        .unwrap_or_else(|| r#"SELECT "Year", SUM("Sale") AS total FROM "CarSales" GROUP BY "Year" ORDER BY "Year""#.into());
    let ds = datasets::bundled(&id).unwrap_or_else(|| panic!("no bundled dataset {id:?}"));
    match run_sql(&sql, &ds) {
        Ok(table) => print!("{}", describe_result(&table, 20)),
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(1);
        }
    }
}
