//! Dataset loading, column classification and column statistics.
//!
//! A [`Dataset`] keeps every cell as the raw string read from the CSV (or
//! `None` for an empty cell). Classification only attaches a [`DataClass`]
//! and class-specific metadata, so re-classifying never loses information.

mod assets;
mod classify;
mod csv;
mod profile;

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

pub use assets::{gazetteer, known_scales, KnownScale};
pub use classify::{classify_columns, ClassOverrides};
pub use csv::load_csv;
pub use profile::{profile_column, profile_dataset, ColumnProfile, NumericProfile, StringProfile};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IngestError {
    #[error("empty input: no header row")]
    Empty,
    #[error("input is not valid UTF-8 (byte {offset})")]
    Utf8 { offset: usize },
    #[error("row {row}, column {col}: unterminated quoted field")]
    UnterminatedQuote { row: usize, col: usize },
    #[error("row {row}, column {col}: unexpected quote character")]
    UnexpectedQuote { row: usize, col: usize },
    #[error("row {row}: expected {expected} fields, found {found}")]
    Ragged { row: usize, expected: usize, found: usize },
    #[error("header column {col} has an empty name")]
    EmptyColumnName { col: usize },
    #[error("duplicate column name {0:?}")]
    DuplicateColumn(String),
    #[error("override names unknown column {0:?}")]
    UnknownColumn(String),
    #[error("column {column:?} cannot be {class}: value {value:?} does not fit")]
    BadOverride {
        column: String,
        class: DataClass,
        value: String,
    },
    #[error("column {0:?} has no non-null values to profile")]
    AllNull(String),
    #[error("column {0:?} has not been classified")]
    Unclassified(String),
}

/// Measurement level of a column, which drives both statistics and the
/// anonymization strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataClass {
    Nominal,
    Ordinal,
    Discrete,
    Continuous,
}

impl DataClass {
    pub fn is_numeric(self) -> bool {
        matches!(self, DataClass::Discrete | DataClass::Continuous)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DataClass::Nominal => "nominal",
            DataClass::Ordinal => "ordinal",
            DataClass::Discrete => "discrete",
            DataClass::Continuous => "continuous",
        }
    }
}

impl fmt::Display for DataClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for DataClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "nominal" => Ok(DataClass::Nominal),
            "ordinal" => Ok(DataClass::Ordinal),
            "discrete" => Ok(DataClass::Discrete),
            "continuous" => Ok(DataClass::Continuous),
            other => Err(format!("unknown data class {other:?}")),
        }
    }
}

/// Semantic category of a nominal column; selects the substitution pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntityType {
    Country,
    City,
    Company,
    GenericToken,
}

impl EntityType {
    pub fn as_str(self) -> &'static str {
        match self {
            EntityType::Country => "country",
            EntityType::City => "city",
            EntityType::Company => "company",
            EntityType::GenericToken => "generic-token",
        }
    }
}

/// Where a column's class came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassOrigin {
    #[default]
    Unclassified,
    Inferred,
    Override,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub data_class: DataClass,
    #[serde(default)]
    pub origin: ClassOrigin,
    pub cells: Vec<Option<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entity_type: Option<EntityType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ordinal_pool: Option<Vec<String>>,
}

impl Column {
    pub fn raw(name: impl Into<String>, cells: Vec<Option<String>>) -> Self {
        Self {
            name: name.into(),
            data_class: DataClass::Nominal,
            origin: ClassOrigin::Unclassified,
            cells,
            entity_type: None,
            ordinal_pool: None,
        }
    }

    pub fn is_classified(&self) -> bool {
        self.origin != ClassOrigin::Unclassified
    }

    pub fn non_null(&self) -> impl Iterator<Item = &str> {
        self.cells.iter().filter_map(|c| c.as_deref())
    }

    /// Distinct non-null values in first-seen order.
    pub fn distinct_values(&self) -> Vec<&str> {
        let mut seen = std::collections::HashSet::new();
        self.non_null().filter(|v| seen.insert(*v)).collect()
    }

    /// Position of a level inside the ordinal pool.
    pub fn ordinal_rank(&self, value: &str) -> Option<usize> {
        self.ordinal_pool
            .as_ref()
            .and_then(|pool| pool.iter().position(|p| p == value))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub columns: Vec<Column>,
    pub row_count: usize,
}

impl Dataset {
    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn is_classified(&self) -> bool {
        self.columns.iter().all(Column::is_classified)
    }

    pub fn row(&self, index: usize) -> Option<Vec<Option<&str>>> {
        (index < self.row_count).then(|| {
            self.columns
                .iter()
                .map(|c| c.cells[index].as_deref())
                .collect()
        })
    }

    pub fn schema(&self) -> Schema {
        Schema {
            table: self.name.clone(),
            columns: self
                .columns
                .iter()
                .map(|c| SchemaColumn {
                    name: c.name.clone(),
                    data_class: c.data_class,
                })
                .collect(),
        }
    }
}

/// Table name plus typed column list; what the query engine validates against.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub table: String,
    pub columns: Vec<SchemaColumn>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaColumn {
    pub name: String,
    pub data_class: DataClass,
}

impl Schema {
    pub fn column(&self, name: &str) -> Option<(usize, &SchemaColumn)> {
        self.columns
            .iter()
            .enumerate()
            .find(|(_, c)| c.name == name)
            .or_else(|| {
                self.columns
                    .iter()
                    .enumerate()
                    .find(|(_, c)| c.name.eq_ignore_ascii_case(name))
            })
    }
}

pub fn parse_int(s: &str) -> Option<i64> {
    s.trim().parse::<i64>().ok()
}

pub fn parse_real(s: &str) -> Option<f64> {
    let t = s.trim();
    // reject "inf"/"nan" spellings that f64::from_str accepts
    if t.is_empty() || t.chars().any(|c| c.is_ascii_alphabetic() && c != 'e' && c != 'E') {
        return None;
    }
    t.parse::<f64>().ok().filter(|v| v.is_finite())
}
