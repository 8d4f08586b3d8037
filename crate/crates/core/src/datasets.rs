//! The two bundled sample datasets, embedded at compile time.

use crate::ingest::{classify_columns, load_csv, Dataset};

pub const CARSALES_CSV: &str = include_str!("../assets/datasets/carsales.csv");
pub const MOVIES_CSV: &str = include_str!("../assets/datasets/movies.csv");

/// Bundled ids, usable wherever a dataset id is accepted.
pub const BUNDLED: &[&str] = &["carsales", "movies"];

/// Raw CSV text of a bundled dataset.
pub fn bundled_csv(id: &str) -> Option<&'static str> {
    match id.to_ascii_lowercase().as_str() {
        "carsales" => Some(CARSALES_CSV),
        "movies" => Some(MOVIES_CSV),
        _ => None,
    }
}

fn display_name(id: &str) -> &'static str {
    match id.to_ascii_lowercase().as_str() {
        "carsales" => "CarSales",
        _ => "Movies",
    }
}

/// A bundled dataset, parsed and classified.
pub fn bundled(id: &str) -> Option<Dataset> {
    let csv = bundled_csv(id)?;
    let ds = load_csv(csv.as_bytes(), display_name(id)).expect("bundled CSV parses");
    Some(classify_columns(&ds, None).expect("bundled CSV classifies"))
}

pub fn carsales() -> Dataset {
    bundled("carsales").unwrap()
}

pub fn movies() -> Dataset {
    bundled("movies").unwrap()
}
