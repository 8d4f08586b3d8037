//! Prompt-ready dataset representation: DDL, column statistics and
//! anonymized example rows under a token budget.

use crate::anonymize::{anonymize_rows, AnonymizationMap, AnonymizeError, Row};
use crate::ingest::{profile_dataset, ColumnProfile, DataClass, Dataset, IngestError, Schema};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_BUDGET_TOKENS: usize = 2048;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RepresentError {
    #[error("budget of {budget} tokens is below the minimum of {minimum} (DDL + statistics)")]
    BudgetTooSmall { budget: usize, minimum: usize },
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Anonymize(#[from] AnonymizeError),
}

/// `ceil(chars / 4)`.
pub fn estimate_tokens(text: &str) -> usize {
    text.chars().count().div_ceil(4)
}

pub fn quote_ident(name: &str) -> String {
    format!("\"{}\"", name.replace('"', "\"\""))
}

pub fn sql_type(class: DataClass) -> &'static str {
    match class {
        DataClass::Nominal | DataClass::Ordinal => "TEXT",
        DataClass::Discrete => "INTEGER",
        DataClass::Continuous => "REAL",
    }
}

pub fn emit_ddl(ds: &Dataset) -> String {
    let cols: Vec<String> = ds
        .columns
        .iter()
        .map(|c| format!("{} {}", quote_ident(&c.name), sql_type(c.data_class)))
        .collect();
    format!("CREATE TABLE {} ({});", quote_ident(&ds.name), cols.join(", "))
}

/// Compact number rendering: integers without a fraction, otherwise at
/// most four decimals with trailing zeros trimmed.
pub fn format_number(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        return format!("{}", v as i64);
    }
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

/// One line per column: `<name> (<class>): <stat>=<value>, ...`.
pub fn stats_block(ds: &Dataset, profiles: &[ColumnProfile]) -> String {
    ds.columns
        .iter()
        .zip(profiles)
        .map(|(col, prof)| {
            let stats = match prof {
                ColumnProfile::Numeric(p) => format!(
                    "min={}, max={}, mean={}, median={}, p25={}, p75={}, nulls={}",
                    format_number(p.min),
                    format_number(p.max),
                    format_number(p.mean),
                    format_number(p.median),
                    format_number(p.p25),
                    format_number(p.p75),
                    p.null_count
                ),
                ColumnProfile::String(p) => {
                    let top: Vec<String> = p
                        .top_values
                        .iter()
                        .map(|(v, n)| format!("{v} ({n})"))
                        .collect();
                    format!(
                        "unique={}, top=[{}], nulls={}",
                        p.unique_count,
                        top.join("; "),
                        p.null_count
                    )
                }
            };
            format!("{} ({}): {}", col.name, col.data_class, stats)
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn csv_field(v: &str) -> String {
    if v.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", v.replace('"', "\"\""))
    } else {
        v.to_string()
    }
}

pub fn csv_line<'a>(cells: impl IntoIterator<Item = Option<&'a str>>) -> String {
    cells
        .into_iter()
        .map(|c| c.map(csv_field).unwrap_or_default())
        .collect::<Vec<_>>()
        .join(",")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Structured {
    pub schema: Schema,
    pub profiles: Vec<ColumnProfile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRepresentation {
    pub ddl: String,
    pub stats_block: String,
    pub example_rows: Vec<Row>,
    pub token_estimate: usize,
    pub text: String,
    pub structured: Structured,
    pub row_count: usize,
}

fn assemble(ddl: &str, stats: &str, header: &str, rows: &[String]) -> String {
    let mut text = format!("{ddl}\n\n{stats}");
    if !rows.is_empty() {
        text.push_str("\n\n");
        text.push_str(header);
        for r in rows {
            text.push('\n');
            text.push_str(r);
        }
    }
    text
}

/// Builds the representation, adding sampled anonymized rows until the next
/// one would push the estimate over `budget_tokens`.
pub fn build_representation(
    ds: &Dataset,
    map: &AnonymizationMap,
    budget_tokens: usize,
    seed: u64,
) -> Result<DatasetRepresentation, RepresentError> {
    let profiles = profile_dataset(ds)?;
    let ddl = emit_ddl(ds);
    let stats = stats_block(ds, &profiles);
    let minimum = estimate_tokens(&assemble(&ddl, &stats, "", &[]));
    if budget_tokens < minimum {
        return Err(RepresentError::BudgetTooSmall {
            budget: budget_tokens,
            minimum,
        });
    }

    let mut order: Vec<usize> = (0..ds.row_count).collect();
    order.shuffle(&mut ChaCha20Rng::seed_from_u64(seed));
    let header = csv_line(ds.columns.iter().map(|c| Some(c.name.as_str())));

    let mut rows: Vec<Row> = Vec::new();
    let mut lines: Vec<String> = Vec::new();
    let mut tokens = minimum;
    for &r in &order {
        let row = anonymize_rows(ds, map, &[r])?.remove(0);
        lines.push(csv_line(row.iter().map(|c| c.as_deref())));
        let next = estimate_tokens(&assemble(&ddl, &stats, &header, &lines));
        if next > budget_tokens {
            lines.pop();
            break;
        }
        tokens = next;
        rows.push(row);
    }

    let text = assemble(&ddl, &stats, &header, &lines);
    Ok(DatasetRepresentation {
        ddl,
        stats_block: stats,
        example_rows: rows,
        token_estimate: tokens,
        text,
        structured: Structured {
            schema: ds.schema(),
            profiles,
        },
        row_count: ds.row_count,
    })
}
