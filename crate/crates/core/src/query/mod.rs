//! Single-table SQL subset: parser, canonical printer and in-memory executor.
//!
//! Supported: `SELECT [DISTINCT]` with column references, literals,
//! `+ - * /`, `COUNT/SUM/AVG/MIN/MAX`, `WHERE` (comparisons, `AND/OR/NOT`,
//! `IN`, `BETWEEN`, `LIKE`, `IS NULL`), `GROUP BY`, `HAVING`, multi-key
//! `ORDER BY` and `LIMIT/OFFSET`. Everything else is rejected with an
//! error message suitable for feeding back into a repair prompt.

mod ast;
mod exec;
mod lexer;
mod parser;

pub use ast::{ident, AggFunc, BinOp, Expr, Literal, OrderKey, OrderTarget, Projection, SqlQuery};
pub use exec::execute;
pub use parser::parse;

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Error kinds of the query engine. Display strings start with `parse:` or
/// `exec:` so callers can route them without matching on the variant.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QueryError {
    #[error("parse: syntax error at byte {offset}: expected {expected}, found {found}")]
    Syntax {
        offset: usize,
        expected: String,
        found: String,
    },
    #[error("parse: unknown column {name:?}; available columns: {available}")]
    UnknownColumn { name: String, available: String },
    #[error("parse: unknown table {name:?}; the only table is {expected:?}")]
    UnknownTable { name: String, expected: String },
    #[error("parse: unsupported construct {construct}; only single-table SELECT with WHERE, GROUP BY, HAVING, ORDER BY and LIMIT is supported")]
    Unsupported { construct: String },
    #[error("parse: invalid query: {0}")]
    Invalid(String),
    #[error("exec: type mismatch: {0}")]
    TypeMismatch(String),
    #[error("exec: integer overflow in {0}")]
    IntegerOverflow(String),
}

impl QueryError {
    pub(crate) fn syntax(offset: usize, expected: &str, found: &str) -> Self {
        QueryError::Syntax {
            offset,
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    pub fn is_parse_error(&self) -> bool {
        !matches!(
            self,
            QueryError::TypeMismatch(_) | QueryError::IntegerOverflow(_)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ValueType {
    Integer,
    Real,
    Text,
    Null,
}

impl ValueType {
    pub fn is_numeric(self) -> bool {
        matches!(self, ValueType::Integer | ValueType::Real)
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValueType::Integer => "INTEGER",
            ValueType::Real => "REAL",
            ValueType::Text => "TEXT",
            ValueType::Null => "NULL",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Null,
    Int(i64),
    Real(f64),
    Text(String),
}

impl Value {
    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null)
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(i) => Some(*i as f64),
            Value::Real(r) => Some(*r),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Value::Text(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Null => f.write_str("NULL"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Real(r) => write!(f, "{r:?}"),
            Value::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultColumn {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: ValueType,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub columns: Vec<ResultColumn>,
    pub rows: Vec<Vec<Value>>,
}

impl ResultTable {
    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn column_values(&self, index: usize) -> impl Iterator<Item = &Value> {
        self.rows.iter().map(move |r| &r[index])
    }
}

/// Compact text rendering: column list with types, row count, then a CSV
/// header and the first `max_rows` rows.
pub fn describe_result(rt: &ResultTable, max_rows: usize) -> String {
    let cols: Vec<String> = rt
        .columns
        .iter()
        .map(|c| format!("{} ({})", c.name, c.ty))
        .collect();
    let n = rt.row_count();
    let mut out = format!(
        "columns: {}\n{} {}\n",
        cols.join(", "),
        n,
        if n == 1 { "row" } else { "rows" }
    );
    out.push_str(&crate::represent::csv_line(
        rt.columns.iter().map(|c| Some(c.name.as_str())),
    ));
    for row in rt.rows.iter().take(max_rows) {
        let cells: Vec<String> = row.iter().map(Value::to_string).collect();
        out.push('\n');
        out.push_str(&crate::represent::csv_line(cells.iter().map(|c| Some(c.as_str()))));
    }
    if n > max_rows {
        out.push_str(&format!("\n… {} more", n - max_rows));
    }
    out
}

/// Parses and executes in one step.
pub fn run_sql(sql: &str, ds: &crate::ingest::Dataset) -> Result<ResultTable, QueryError> {
    execute(&parse(sql, &ds.schema())?, ds)
}
