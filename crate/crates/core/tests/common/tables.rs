//! Random classified tables for the anonymization and statistics
//! properties.

use factflow::ingest::{classify_columns, gazetteer, Column, Dataset, EntityType};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

const MONTHS: &[&str] = &[
    "January", "February", "March", "April", "May", "June", "July", "August", "September", "October",
    "November", "December",
];
const LIKERT: &[&str] = &["Strongly disagree", "Disagree", "Neutral", "Agree", "Strongly agree"];

fn maybe_null(rng: &mut ChaCha8Rng, rate: f64, v: String) -> Option<String> {
    (!rng.random_bool(rate)).then_some(v)
}

/// A table of at most 100 rows mixing every class; names steer entity
/// inference for the nominal columns.
pub fn random_table(rng: &mut ChaCha8Rng) -> Dataset {
    let rows = rng.random_range(1..=100);
    let null_rate = [0.0, 0.0, 0.1, 0.3][rng.random_range(0..4)];
    let ncols = rng.random_range(1..=5);
    let mut columns = Vec::new();
    for i in 0..ncols {
        let kind = rng.random_range(0..6);
        let (name, cells): (String, Vec<Option<String>>) = match kind {
            0 => {
                let pool: Vec<String> = (0..rng.random_range(1..=30)).map(|k| format!("k{k}x")).collect();
                let cells = (0..rows)
                    .map(|_| { let v = pool.choose(rng).unwrap().clone(); maybe_null(rng, null_rate, v) })
                    .collect();
                (format!("Label{i}"), cells)
            }
            1 => {
                let countries = gazetteer(EntityType::Country);
                let n = rng.random_range(1..=12.min(countries.len()));
                let pool: Vec<&str> = countries.choose_multiple(rng, n).copied().collect();
                let cells = (0..rows)
                    .map(|_| { let v = pool.choose(rng).unwrap().to_string(); maybe_null(rng, null_rate, v) })
                    .collect();
                (format!("Country{i}"), cells)
            }
            2 => {
                let scale = if rng.random_bool(0.5) { MONTHS } else { LIKERT };
                // sometimes every level of the scale is observed
                let n = if rng.random_bool(0.3) { scale.len() } else { rng.random_range(1..=scale.len()) };
                let levels: Vec<&str> = scale.choose_multiple(rng, n).copied().collect();
                let mut cells: Vec<Option<String>> = levels.iter().map(|l| Some(l.to_string())).collect();
                while cells.len() < rows.max(n) {
                    let v = levels.choose(rng).unwrap().to_string();
                    cells.push(maybe_null(rng, null_rate, v));
                }
                cells.truncate(rows.max(n));
                cells.shuffle(rng);
                (format!("Level{i}"), cells)
            }
            3 => {
                let (lo, hi) = [(1990, 2020), (0, 50), (-500, 500), (1000, 100000)][rng.random_range(0..4)];
                let cells = (0..rows)
                    .map(|_| { let v = rng.random_range(lo..=hi).to_string(); maybe_null(rng, null_rate, v) })
                    .collect();
                (format!("Count{i}"), cells)
            }
            _ => {
                let scale = [1.0, 10.0, 100.0][rng.random_range(0..3)];
                let cells = (0..rows)
                    .map(|_| {
                        let v: f64 = rng.random_range(-1000.0..1000.0);
                        maybe_null(rng, null_rate, format!("{:.2}", (v * scale).round() / scale + 0.25))
                    })
                    .collect();
                (format!("Amount{i}"), cells)
            }
        };
        columns.push(Column::raw(name, cells));
    }
    let row_count = columns.iter().map(|c| c.cells.len()).max().unwrap_or(0);
    for c in &mut columns {
        c.cells.resize(row_count, None);
        // every column needs one value to be classified and profiled
        if c.cells.iter().all(Option::is_none) {
            c.cells[0] = Some(if c.name.starts_with("Count") { "1".into() } else { "k0x".into() });
        }
    }
    let raw = Dataset {
        name: "T".into(),
        columns,
        row_count,
    };
    classify_columns(&raw, None).expect("random tables classify")
}
