//! Random single-table instances and a typed query generator that renders
//! every query twice: once for the engine under test and once for SQLite.
//!
//! All sub-expressions are fully parenthesized so precedence cannot differ
//! between the two dialects. Division is rendered as real division for
//! SQLite, which otherwise truncates integer quotients.

#![allow(dead_code)]

use factflow::ingest::{ClassOrigin, Column, DataClass, Dataset};
use factflow::query::Value;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::cmp::Ordering;

#[derive(Clone, Copy, PartialEq, Debug)]
pub enum Ty {
    Int,
    Real,
    Text,
}

pub struct Instance {
    pub ds: Dataset,
    pub types: Vec<Ty>,
}

const TEXTS: &[&str] = &["a", "b", "Ab", "ba", "abc", "B", "a_b", "zz"];

pub fn random_instance(rng: &mut ChaCha8Rng) -> Instance {
    let ncols = rng.random_range(1..=4);
    let nrows = rng.random_range(0..=50);
    let mut columns = Vec::new();
    let mut types = Vec::new();
    for i in 0..ncols {
        let ty = [Ty::Int, Ty::Real, Ty::Text][rng.random_range(0..3)];
        let null_rate = [0.0, 0.1, 0.4][rng.random_range(0..3)];
        let cells = (0..nrows)
            .map(|_| {
                if rng.random_bool(null_rate) {
                    return None;
                }
                Some(match ty {
                    Ty::Int => rng.random_range(-20..=20).to_string(),
                    Ty::Real => format!("{}", rng.random_range(-200..=200) as f64 / 4.0),
                    Ty::Text => TEXTS[rng.random_range(0..TEXTS.len())].to_string(),
                })
            })
            .collect();
        let mut col = Column::raw(format!("c{i}"), cells);
        col.data_class = match ty {
            Ty::Int => DataClass::Discrete,
            Ty::Real => DataClass::Continuous,
            Ty::Text => DataClass::Nominal,
        };
        col.origin = ClassOrigin::Inferred;
        columns.push(col);
        types.push(ty);
    }
    Instance {
        ds: Dataset {
            name: "t".into(),
            columns,
            row_count: nrows,
        },
        types,
    }
}

/// Same query in both dialects.
#[derive(Clone, Debug)]
pub struct Sql {
    pub ours: String,
    pub sqlite: String,
}

impl Sql {
    fn same(s: impl Into<String>) -> Sql {
        let s = s.into();
        Sql {
            ours: s.clone(),
            sqlite: s,
        }
    }

    fn wrap(a: &Sql, f: impl Fn(&str) -> String) -> Sql {
        Sql {
            ours: f(&a.ours),
            sqlite: f(&a.sqlite),
        }
    }

    fn join(a: &Sql, b: &Sql, f: impl Fn(&str, &str) -> String) -> Sql {
        Sql {
            ours: f(&a.ours, &b.ours),
            sqlite: f(&a.sqlite, &b.sqlite),
        }
    }
}

pub struct Gen<'a> {
    pub rng: &'a mut ChaCha8Rng,
    pub types: &'a [Ty],
}

impl Gen<'_> {
    fn cols_of(&self, ty: Ty) -> Vec<usize> {
        (0..self.types.len()).filter(|&i| self.types[i] == ty).collect()
    }

    fn num_cols(&self) -> Vec<usize> {
        (0..self.types.len())
            .filter(|&i| self.types[i] != Ty::Text)
            .collect()
    }

    fn num_literal(&mut self) -> Sql {
        match self.rng.random_range(0..5) {
            0 => Sql::same(format!("({})", self.rng.random_range(-5.0f64..30.0).round() / 2.0 + 0.25)),
            1 => Sql::same("NULL"),
            _ => Sql::same(format!("({})", self.rng.random_range(-10..=25))),
        }
    }

    fn text_literal(&mut self) -> Sql {
        Sql::same(format!("'{}'", TEXTS[self.rng.random_range(0..TEXTS.len())]))
    }

    pub fn num(&mut self, depth: u32) -> Sql {
        let cols = self.num_cols();
        let pick = if depth == 0 { self.rng.random_range(0..2) } else { self.rng.random_range(0..5) };
        match pick {
            0 if !cols.is_empty() => Sql::same(format!("c{}", cols[self.rng.random_range(0..cols.len())])),
            0 | 1 => self.num_literal(),
            2 => {
                let a = self.num(depth - 1);
                Sql::wrap(&a, |x| format!("(-{x})"))
            }
            _ => {
                let a = self.num(depth - 1);
                let b = self.num(depth - 1);
                match self.rng.random_range(0..4) {
                    0 => Sql::join(&a, &b, |x, y| format!("({x} + {y})")),
                    1 => Sql::join(&a, &b, |x, y| format!("({x} - {y})")),
                    2 => Sql::join(&a, &b, |x, y| format!("({x} * {y})")),
                    _ => Sql {
                        ours: format!("({} / {})", a.ours, b.ours),
                        sqlite: format!("(CAST({} AS REAL) / {})", a.sqlite, b.sqlite),
                    },
                }
            }
        }
    }

    pub fn text(&mut self) -> Sql {
        let cols = self.cols_of(Ty::Text);
        if !cols.is_empty() && self.rng.random_bool(0.7) {
            Sql::same(format!("c{}", cols[self.rng.random_range(0..cols.len())]))
        } else {
            self.text_literal()
        }
    }

    pub fn cond(&mut self, depth: u32) -> Sql {
        let choice = if depth == 0 { self.rng.random_range(0..6) } else { self.rng.random_range(0..9) };
        let not = if self.rng.random_bool(0.3) { "NOT " } else { "" };
        match choice {
            0 | 1 => {
                let op = ["=", "<>", "<", "<=", ">", ">="][self.rng.random_range(0..6)];
                let (a, b) = if self.rng.random_bool(0.6) {
                    (self.num(1), self.num(1))
                } else {
                    (self.text(), self.text())
                };
                Sql::join(&a, &b, |x, y| format!("({x} {op} {y})"))
            }
            2 => {
                let numeric = self.rng.random_bool(0.5);
                let a = if numeric { self.num(0) } else { self.text() };
                let n = self.rng.random_range(1..=3);
                let items: Vec<Sql> = (0..n)
                    .map(|_| if numeric { self.num_literal() } else { self.text_literal() })
                    .collect();
                let ours: Vec<&str> = items.iter().map(|s| s.ours.as_str()).collect();
                let lite: Vec<&str> = items.iter().map(|s| s.sqlite.as_str()).collect();
                Sql {
                    ours: format!("({} {not}IN ({}))", a.ours, ours.join(", ")),
                    sqlite: format!("({} {not}IN ({}))", a.sqlite, lite.join(", ")),
                }
            }
            3 => {
                let a = self.num(1);
                let lo = self.num(0);
                let hi = self.num(0);
                Sql {
                    ours: format!("({} {not}BETWEEN {} AND {})", a.ours, lo.ours, hi.ours),
                    sqlite: format!("({} {not}BETWEEN {} AND {})", a.sqlite, lo.sqlite, hi.sqlite),
                }
            }
            4 => {
                let a = self.text();
                let pat = ["a%", "%b", "_b", "%a%", "A%", "a\\_b", "%", "__"][self.rng.random_range(0..8)];
                Sql::wrap(&a, |x| format!("({x} {not}LIKE '{pat}')"))
            }
            5 => {
                let a = if self.rng.random_bool(0.5) { self.num(0) } else { self.text() };
                let neg = if self.rng.random_bool(0.5) { "NOT " } else { "" };
                Sql::wrap(&a, |x| format!("({x} IS {neg}NULL)"))
            }
            6 => {
                let a = self.cond(depth - 1);
                Sql::wrap(&a, |x| format!("(NOT {x})"))
            }
            _ => {
                let a = self.cond(depth - 1);
                let b = self.cond(depth - 1);
                let op = if self.rng.random_bool(0.5) { "AND" } else { "OR" };
                Sql::join(&a, &b, |x, y| format!("({x} {op} {y})"))
            }
        }
    }

    fn aggregate(&mut self) -> Sql {
        let distinct = if self.rng.random_bool(0.2) { "DISTINCT " } else { "" };
        match self.rng.random_range(0..6) {
            0 => Sql::same("COUNT(*)"),
            1 => {
                let a = if self.rng.random_bool(0.5) { self.num(1) } else { self.text() };
                Sql::wrap(&a, |x| format!("COUNT({distinct}{x})"))
            }
            2 => {
                let a = self.num(1);
                Sql::wrap(&a, |x| format!("SUM({distinct}{x})"))
            }
            3 => {
                let a = self.num(1);
                Sql::wrap(&a, |x| format!("AVG({distinct}{x})"))
            }
            k => {
                let f = if k == 4 { "MIN" } else { "MAX" };
                let a = if self.rng.random_bool(0.7) { self.num(1) } else { self.text() };
                Sql::wrap(&a, |x| format!("{f}({x})"))
            }
        }
    }

    /// A query plus whether its output order is fully determined.
    pub fn query(&mut self) -> (Sql, bool) {
        let ncols = self.types.len();
        let aggregate = self.rng.random_bool(0.45);
        let mut select: Vec<Sql> = Vec::new();
        let mut group_by: Vec<String> = Vec::new();
        let mut having: Option<Sql> = None;
        if aggregate {
            if self.rng.random_bool(0.7) {
                let g = self.rng.random_range(0..ncols);
                group_by.push(format!("c{g}"));
                select.push(Sql::same(format!("c{g}")));
            }
            for _ in 0..self.rng.random_range(1..=3) {
                select.push(self.aggregate());
            }
            if !group_by.is_empty() && self.rng.random_bool(0.3) {
                let a = self.aggregate_numeric();
                let v = self.rng.random_range(0..5);
                having = Some(Sql::wrap(&a, |x| format!("{x} > {v}")));
            }
        } else {
            for _ in 0..self.rng.random_range(1..=3) {
                select.push(match self.rng.random_range(0..3) {
                    0 => self.num(2),
                    1 => self.text(),
                    _ => Sql::same(format!("c{}", self.rng.random_range(0..ncols))),
                });
            }
        }
        let distinct = !aggregate && self.rng.random_bool(0.2);
        let filter = self.rng.random_bool(0.7).then(|| self.cond(2));

        let ordered = self.rng.random_bool(0.5);
        let limit = ordered && self.rng.random_bool(0.5);

        let render = |pick: fn(&Sql) -> &str| {
            let cols: Vec<&str> = select.iter().map(pick).collect();
            let mut s = format!(
                "SELECT {}{} FROM t",
                if distinct { "DISTINCT " } else { "" },
                cols.join(", ")
            );
            if let Some(f) = &filter {
                s.push_str(&format!(" WHERE {}", pick(f)));
            }
            if !group_by.is_empty() {
                s.push_str(&format!(" GROUP BY {}", group_by.join(", ")));
            }
            if let Some(h) = &having {
                s.push_str(&format!(" HAVING {}", pick(h)));
            }
            s
        };
        let mut sql = Sql {
            ours: render(|s| &s.ours),
            sqlite: render(|s| &s.sqlite),
        };
        if ordered {
            let keys: Vec<String> = (1..=select.len())
                .map(|i| format!("{i}{}", if self.rng.random_bool(0.5) { " DESC" } else { "" }))
                .collect();
            let tail = format!(" ORDER BY {}", keys.join(", "));
            sql.ours.push_str(&tail);
            sql.sqlite.push_str(&tail);
        }
        if limit {
            let tail = format!(" LIMIT {}", self.rng.random_range(0..6));
            sql.ours.push_str(&tail);
            sql.sqlite.push_str(&tail);
        }
        (sql, ordered)
    }

    fn aggregate_numeric(&mut self) -> Sql {
        match self.rng.random_range(0..3) {
            0 => Sql::same("COUNT(*)"),
            1 => {
                let a = self.num(0);
                Sql::wrap(&a, |x| format!("SUM({x})"))
            }
            _ => {
                let a = self.num(0);
                Sql::wrap(&a, |x| format!("MAX({x})"))
            }
        }
    }
}

pub fn sqlite_table(conn: &rusqlite::Connection, inst: &Instance) {
    let defs: Vec<String> = inst
        .types
        .iter()
        .enumerate()
        .map(|(i, t)| {
            format!(
                "c{i} {}",
                match t {
                    Ty::Int => "INTEGER",
                    Ty::Real => "REAL",
                    Ty::Text => "TEXT",
                }
            )
        })
        .collect();
    conn.execute_batch(&format!(
        "PRAGMA case_sensitive_like = ON; DROP TABLE IF EXISTS t; CREATE TABLE t ({});",
        defs.join(", ")
    ))
    .unwrap();
    let placeholders = vec!["?"; inst.types.len()].join(", ");
    let mut stmt = conn
        .prepare(&format!("INSERT INTO t VALUES ({placeholders})"))
        .unwrap();
    for r in 0..inst.ds.row_count {
        let params: Vec<rusqlite::types::Value> = inst
            .ds
            .columns
            .iter()
            .zip(&inst.types)
            .map(|(c, t)| match (&c.cells[r], t) {
                (None, _) => rusqlite::types::Value::Null,
                (Some(s), Ty::Int) => rusqlite::types::Value::Integer(s.parse().unwrap()),
                (Some(s), Ty::Real) => rusqlite::types::Value::Real(s.parse().unwrap()),
                (Some(s), Ty::Text) => rusqlite::types::Value::Text(s.clone()),
            })
            .collect();
        stmt.execute(rusqlite::params_from_iter(params)).unwrap();
    }
}

pub fn sqlite_rows(conn: &rusqlite::Connection, sql: &str) -> rusqlite::Result<Vec<Vec<Value>>> {
    let mut stmt = conn.prepare(sql)?;
    let n = stmt.column_count();
    let rows = stmt.query_map([], |row| {
        (0..n)
            .map(|i| {
                Ok(match row.get_ref(i)? {
                    rusqlite::types::ValueRef::Null => Value::Null,
                    rusqlite::types::ValueRef::Integer(v) => Value::Int(v),
                    rusqlite::types::ValueRef::Real(v) => Value::Real(v),
                    rusqlite::types::ValueRef::Text(t) => {
                        Value::Text(String::from_utf8_lossy(t).into_owned())
                    }
                    rusqlite::types::ValueRef::Blob(_) => panic!("blob result"),
                })
            })
            .collect()
    })?;
    rows.collect()
}

fn rank(v: &Value) -> u8 {
    match v {
        Value::Null => 0,
        Value::Int(_) | Value::Real(_) => 1,
        Value::Text(_) => 2,
    }
}

pub fn value_cmp(a: &Value, b: &Value) -> Ordering {
    match (a, b) {
        (Value::Text(x), Value::Text(y)) => x.cmp(y),
        _ if rank(a) == 1 && rank(b) == 1 => a.as_f64().unwrap().partial_cmp(&b.as_f64().unwrap()).unwrap(),
        _ => rank(a).cmp(&rank(b)),
    }
}

pub fn canonical(mut rows: Vec<Vec<Value>>) -> Vec<Vec<Value>> {
    rows.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| value_cmp(x, y))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
    });
    rows
}

/// Numeric values compare by value within 1e-9 relative tolerance.
pub fn values_match(a: &Value, b: &Value) -> bool {
    match (a.as_f64(), b.as_f64()) {
        (Some(x), Some(y)) => x == y || (x - y).abs() <= 1e-9 * x.abs().max(y.abs()),
        _ => a == b,
    }
}

pub fn tables_match(a: &[Vec<Value>], b: &[Vec<Value>]) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(r, s)| r.len() == s.len() && r.iter().zip(s).all(|(x, y)| values_match(x, y)))
}
