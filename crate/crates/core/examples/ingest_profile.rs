//! Loads a CSV, infers each column's data class and prints its profile.
//!
//! cargo run --example ingest_profile -- path/to/data.csv
//! cargo run --example ingest_profile            # bundled CarSales

use factflow::datasets;
use factflow::ingest::{classify_columns, load_csv, profile_dataset, ColumnProfile};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (bytes, name) = match std::env::args().nth(1) {
        Some(path) => (std::fs::read(&path)?, path),
        None => (datasets::bundled_csv("carsales").unwrap().as_bytes().to_vec(), "carsales".into()),
    };
    let ds = classify_columns(&load_csv(&bytes, &name)?, None)?;
    println!("{}: {} rows, {} columns", ds.name, ds.row_count, ds.columns.len());
    for (col, profile) in ds.columns.iter().zip(profile_dataset(&ds)?) {
        print!("  {:<16} {:<10} ({:?})  ", col.name, col.data_class.to_string(), col.origin);
        match profile {
            ColumnProfile::Numeric(p) => println!(
                "min {} max {} mean {:.2} median {} nulls {}",
                p.min, p.max, p.mean, p.median, p.null_count
            ),
            ColumnProfile::String(p) => println!(
                "{} distinct, top {:?}, nulls {}",
                p.unique_count, p.top_values, p.null_count
            ),
        }
    }
    Ok(())
}
