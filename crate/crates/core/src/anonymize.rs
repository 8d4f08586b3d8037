//! Format-preserving anonymization of sample rows.
//!
//! Every column gets its own ChaCha20 stream: the generator is seeded from
//! the map seed and `set_stream(column_index)` selects the column, so adding
//! or reordering rows never perturbs the draws of another column.
//!
//! * nominal: distinct values are substituted by unused entries of the
//!   column's gazetteer, falling back to synthesized look-alike tokens;
//! * ordinal: observed levels are injected into the ordinal pool in order;
//! * discrete: sorted distinct values are mapped onto sorted distinct random
//!   integers in `[min, max + (max - min)]`;
//! * continuous: each cell is redrawn uniformly in `[min, max]`.

use crate::ingest::{gazetteer, parse_int, parse_real, DataClass, Dataset, EntityType};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashSet};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnonymizeError {
    #[error("dataset must be classified before anonymization")]
    Unclassified,
    #[error("column {column:?}: {distinct} distinct values but only {available} substitutes and synthesis is disabled")]
    PoolExhausted {
        column: String,
        distinct: usize,
        available: usize,
    },
    #[error("column {column:?}: {observed} observed levels exceed ordinal pool of {pool}")]
    OrdinalOverflow {
        column: String,
        observed: usize,
        pool: usize,
    },
    #[error("column {column:?}: level {value:?} is not in the ordinal pool")]
    LevelOutsidePool { column: String, value: String },
    #[error("row index {index} out of range ({rows} rows)")]
    RowOutOfRange { index: usize, rows: usize },
    #[error("map has no entry for column {0:?}")]
    MissingColumn(String),
}

#[derive(Debug, Clone, Copy)]
pub struct AnonymizeOptions {
    /// Synthesize look-alike tokens once a gazetteer runs dry.
    pub synthesize: bool,
}

impl Default for AnonymizeOptions {
    fn default() -> Self {
        Self { synthesize: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "lowercase")]
pub enum ColumnMapping {
    /// One-to-one substitution over observed values (nominal, ordinal,
    /// discrete). Discrete keys are canonical integer strings.
    Bijection {
        class: DataClass,
        forward: BTreeMap<String, String>,
        reverse: BTreeMap<String, String>,
    },
    /// Per-cell redraw of a continuous column.
    Resample {
        min: f64,
        max: f64,
        decimals: usize,
        cells: Vec<Option<String>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnonymizationMap {
    pub seed: u64,
    pub columns: BTreeMap<String, ColumnMapping>,
}

impl AnonymizationMap {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("map serializes")
    }

    /// Anonymized form of one original cell.
    pub fn forward(&self, column: &str, row: usize, value: &str) -> Option<String> {
        match self.columns.get(column)? {
            ColumnMapping::Bijection { class, forward, .. } => {
                forward.get(&key_for(*class, value)?).cloned()
            }
            ColumnMapping::Resample { cells, .. } => cells.get(row).cloned().flatten(),
        }
    }

    /// Original value behind an anonymized one, for bijective columns.
    pub fn reverse(&self, column: &str, value: &str) -> Option<&str> {
        match self.columns.get(column)? {
            ColumnMapping::Bijection { class, reverse, .. } => {
                reverse.get(&key_for(*class, value)?).map(String::as_str)
            }
            ColumnMapping::Resample { .. } => None,
        }
    }
}

fn key_for(class: DataClass, value: &str) -> Option<String> {
    if class == DataClass::Discrete {
        literal_int(value).map(|v| v.to_string())
    } else {
        Some(value.to_string())
    }
}

/// Integer value of a literal, accepting integral reals such as `12.0`.
fn literal_int(value: &str) -> Option<i64> {
    parse_int(value).or_else(|| {
        parse_real(value)
            .filter(|v| v.fract() == 0.0 && v.abs() < 9.0e15)
            .map(|v| v as i64)
    })
}

fn column_rng(seed: u64, column: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(column as u64);
    rng
}

pub fn build_map(ds: &Dataset, seed: u64) -> Result<AnonymizationMap, AnonymizeError> {
    build_map_with(ds, seed, AnonymizeOptions::default())
}

pub fn build_map_with(
    ds: &Dataset,
    seed: u64,
    opts: AnonymizeOptions,
) -> Result<AnonymizationMap, AnonymizeError> {
    if !ds.is_classified() {
        return Err(AnonymizeError::Unclassified);
    }
    let mut columns = BTreeMap::new();
    for (i, col) in ds.columns.iter().enumerate() {
        let mut rng = column_rng(seed, i);
        let mapping = match col.data_class {
            DataClass::Nominal => {
                let distinct: BTreeSet<&str> = col.non_null().collect();
                let entity = col.entity_type.unwrap_or(EntityType::GenericToken);
                bijection(
                    DataClass::Nominal,
                    nominal_forward(&col.name, &distinct, entity, opts, &mut rng)?,
                )
            }
            DataClass::Ordinal => bijection(DataClass::Ordinal, ordinal_forward(col, &mut rng)?),
            DataClass::Discrete => {
                let distinct: BTreeSet<i64> = col.non_null().filter_map(parse_int).collect();
                bijection(DataClass::Discrete, discrete_forward(&distinct, &mut rng))
            }
            DataClass::Continuous => continuous_resample(col, &mut rng),
        };
        columns.insert(col.name.clone(), mapping);
    }
    Ok(AnonymizationMap { seed, columns })
}

fn bijection(class: DataClass, forward: BTreeMap<String, String>) -> ColumnMapping {
    let reverse = forward
        .iter()
        .map(|(k, v)| (v.clone(), k.clone()))
        .collect();
    ColumnMapping::Bijection {
        class,
        forward,
        reverse,
    }
}

fn nominal_forward(
    column: &str,
    distinct: &BTreeSet<&str>,
    entity: EntityType,
    opts: AnonymizeOptions,
    rng: &mut ChaCha20Rng,
) -> Result<BTreeMap<String, String>, AnonymizeError> {
    let pool: Vec<&str> = gazetteer(entity)
        .iter()
        .copied()
        .filter(|g| !distinct.contains(g))
        .collect();
    if distinct.len() > pool.len() && !opts.synthesize {
        return Err(AnonymizeError::PoolExhausted {
            column: column.to_string(),
            distinct: distinct.len(),
            available: pool.len(),
        });
    }
    let take = distinct.len().min(pool.len());
    let mut picks: Vec<String> = index::sample(rng, pool.len(), take)
        .into_iter()
        .map(|i| pool[i].to_string())
        .collect();

    let mut used: HashSet<String> = distinct.iter().map(|s| s.to_string()).collect();
    used.extend(picks.iter().cloned());
    for original in distinct.iter().skip(take) {
        let token = synthesize_token(original, &used, rng);
        used.insert(token.clone());
        picks.push(token);
    }
    Ok(distinct
        .iter()
        .map(|s| s.to_string())
        .zip(picks)
        .collect())
}

/// Random token with the same length and per-character classes as `like`,
/// distinct from everything in `used`.
fn synthesize_token(like: &str, used: &HashSet<String>, rng: &mut ChaCha20Rng) -> String {
    const UPPER: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZ";
    const LOWER: &[u8] = b"abcdefghijklmnopqrstuvwxyz";
    const DIGIT: &[u8] = b"0123456789";
    for _ in 0..64 {
        let token: String = like
            .chars()
            .map(|c| {
                let set = if c.is_ascii_uppercase() {
                    UPPER
                } else if c.is_ascii_lowercase() {
                    LOWER
                } else if c.is_ascii_digit() {
                    DIGIT
                } else {
                    return c;
                };
                set[rng.random_range(0..set.len())] as char
            })
            .collect();
        if !used.contains(&token) {
            return token;
        }
    }
    // nothing left to vary: fall back to a numbered token
    (1..)
        .map(|n| format!("{like}~{n}"))
        .find(|t| !used.contains(t))
        .unwrap()
}

fn ordinal_forward(
    col: &crate::ingest::Column,
    rng: &mut ChaCha20Rng,
) -> Result<BTreeMap<String, String>, AnonymizeError> {
    let pool = col.ordinal_pool.clone().unwrap_or_default();
    let mut observed: Vec<(usize, &str)> = Vec::new();
    for v in col.distinct_values() {
        let rank = col
            .ordinal_rank(v)
            .ok_or_else(|| AnonymizeError::LevelOutsidePool {
                column: col.name.clone(),
                value: v.to_string(),
            })?;
        observed.push((rank, v));
    }
    observed.sort();
    if observed.len() > pool.len() {
        return Err(AnonymizeError::OrdinalOverflow {
            column: col.name.clone(),
            observed: observed.len(),
            pool: pool.len(),
        });
    }
    let mut targets = index::sample(rng, pool.len(), observed.len()).into_vec();
    targets.sort_unstable();
    Ok(observed
        .into_iter()
        .zip(targets)
        .map(|((_, v), t)| (v.to_string(), pool[t].clone()))
        .collect())
}

fn discrete_forward(distinct: &BTreeSet<i64>, rng: &mut ChaCha20Rng) -> BTreeMap<String, String> {
    let (Some(&min), Some(&max)) = (distinct.first(), distinct.last()) else {
        return BTreeMap::new();
    };
    let span = max as i128 - min as i128;
    let hi = (max as i128 + span).min(i64::MAX as i128);
    let range = (hi - min as i128 + 1) as u128;
    let k = distinct.len() as u128;

    // Floyd's sampling of k distinct offsets in [0, range)
    let mut chosen = BTreeSet::new();
    for j in (range - k)..range {
        let t = rng.random_range(0..=j);
        if !chosen.insert(t) {
            chosen.insert(j);
        }
    }
    distinct
        .iter()
        .zip(chosen)
        .map(|(v, off)| (v.to_string(), (min as i128 + off as i128).to_string()))
        .collect()
}

fn decimals_of(s: &str) -> usize {
    let t = s.trim();
    if t.contains(['e', 'E']) {
        return 6;
    }
    t.split_once('.').map_or(0, |(_, frac)| frac.len())
}

fn continuous_resample(col: &crate::ingest::Column, rng: &mut ChaCha20Rng) -> ColumnMapping {
    let values: Vec<f64> = col.non_null().filter_map(parse_real).collect();
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let decimals = col.non_null().map(decimals_of).max().unwrap_or(0).min(12);
    let cells = col
        .cells
        .iter()
        .map(|cell| {
            cell.as_ref().map(|_| {
                let u: f64 = rng.random();
                let scale = 10f64.powi(decimals as i32);
                let drawn = ((min + u * (max - min)) * scale).round() / scale;
                format!("{:.*}", decimals, drawn.clamp(min, max))
            })
        })
        .collect();
    ColumnMapping::Resample {
        min,
        max,
        decimals,
        cells,
    }
}

pub type Row = Vec<Option<String>>;

/// Anonymized copies of the requested rows; nulls pass through.
pub fn anonymize_rows(
    ds: &Dataset,
    map: &AnonymizationMap,
    rows: &[usize],
) -> Result<Vec<Row>, AnonymizeError> {
    for col in &ds.columns {
        if !map.columns.contains_key(&col.name) {
            return Err(AnonymizeError::MissingColumn(col.name.clone()));
        }
    }
    rows.iter()
        .map(|&r| {
            if r >= ds.row_count {
                return Err(AnonymizeError::RowOutOfRange {
                    index: r,
                    rows: ds.row_count,
                });
            }
            Ok(ds
                .columns
                .iter()
                .map(|col| {
                    col.cells[r]
                        .as_deref()
                        .and_then(|v| map.forward(&col.name, r, v))
                })
                .collect())
        })
        .collect()
}

// ---------------------------------------------------------------------------
// SQL literal rewriting

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Word(String),
    Str(String),
    Num(String),
    Op(String),
    Punct(char),
}

/// Splits SQL into tokens with byte spans. Lenient: unknown characters
/// become punctuation so rewriting never fails.
fn tokenize(sql: &str) -> Vec<(Tok, std::ops::Range<usize>)> {
    let bytes = sql.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = sql[i..].chars().next().unwrap();
        let start = i;
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        if c == '\'' {
            let mut value = String::new();
            i += 1;
            while i < bytes.len() {
                let ch = sql[i..].chars().next().unwrap();
                if ch == '\'' {
                    if bytes.get(i + 1) == Some(&b'\'') {
                        value.push('\'');
                        i += 2;
                        continue;
                    }
                    i += 1;
                    break;
                }
                value.push(ch);
                i += ch.len_utf8();
            }
            out.push((Tok::Str(value), start..i));
        } else if c == '"' || c == '`' {
            let close = c;
            let mut value = String::new();
            i += 1;
            while i < bytes.len() {
                let ch = sql[i..].chars().next().unwrap();
                if ch == close {
                    if sql[i + 1..].starts_with(close) {
                        value.push(close);
                        i += 2;
                        continue;
                    }
                    i += 1;
                    break;
                }
                value.push(ch);
                i += ch.len_utf8();
            }
            out.push((Tok::Ident(value), start..i));
        } else if c.is_ascii_digit() || (c == '.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            out.push((Tok::Num(sql[start..i].to_string()), start..i));
        } else if c.is_alphabetic() || c == '_' {
            while i < bytes.len() {
                let ch = sql[i..].chars().next().unwrap();
                if ch.is_alphanumeric() || ch == '_' {
                    i += ch.len_utf8();
                } else {
                    break;
                }
            }
            out.push((Tok::Word(sql[start..i].to_string()), start..i));
        } else if "<>=!".contains(c) {
            while i < bytes.len() && "<>=!".contains(bytes[i] as char) {
                i += 1;
            }
            out.push((Tok::Op(sql[start..i].to_string()), start..i));
        } else {
            i += c.len_utf8();
            out.push((Tok::Punct(c), start..i));
        }
    }
    out
}

fn is_kw(tok: &Tok, kw: &str) -> bool {
    matches!(tok, Tok::Word(w) if w.eq_ignore_ascii_case(kw))
}

fn column_of<'m>(tok: &Tok, map: &'m AnonymizationMap) -> Option<&'m str> {
    let name = match tok {
        Tok::Ident(n) | Tok::Word(n) => n,
        _ => return None,
    };
    map.columns
        .keys()
        .find(|k| *k == name)
        .or_else(|| map.columns.keys().find(|k| k.eq_ignore_ascii_case(name)))
        .map(String::as_str)
}

/// Column a literal is compared against, from `col <op> lit`,
/// `lit <op> col`, `col IN (.., lit)` or `col BETWEEN lit AND lit`.
/// The literal spans tokens `first..=last` (two when it carries a sign).
fn context_column<'m>(
    toks: &[(Tok, std::ops::Range<usize>)],
    first: usize,
    last: usize,
    map: &'m AnonymizationMap,
) -> Option<&'m str> {
    if let (Some((Tok::Op(_), _)), Some((next, _))) = (toks.get(last + 1), toks.get(last + 2)) {
        if let Some(c) = column_of(next, map) {
            return Some(c);
        }
    }
    let mut crossed_and = false;
    let mut crossed_between = false;
    for (tok, _) in toks[..first].iter().rev() {
        match tok {
            Tok::Str(_) | Tok::Num(_) | Tok::Op(_) | Tok::Punct(',' | '(' | '-') => {}
            t if is_kw(t, "IN") || is_kw(t, "NOT") || is_kw(t, "LIKE") => {}
            t if is_kw(t, "BETWEEN") => crossed_between = true,
            t if is_kw(t, "AND") => {
                if crossed_and {
                    return None;
                }
                crossed_and = true;
            }
            t => {
                let col = column_of(t, map)?;
                return (!crossed_and || crossed_between).then_some(col);
            }
        }
    }
    None
}

/// A `-` at `at` that negates the following number rather than subtracting.
fn is_unary_minus(toks: &[(Tok, std::ops::Range<usize>)], at: usize, map: &AnonymizationMap) -> bool {
    if !matches!(toks[at].0, Tok::Punct('-')) {
        return false;
    }
    match at.checked_sub(1).map(|p| &toks[p].0) {
        None => true,
        Some(Tok::Op(_) | Tok::Punct('(' | ',')) => true,
        Some(t @ Tok::Word(_)) => column_of(t, map).is_none(),
        Some(_) => false,
    }
}

fn quote_sql(s: &str) -> String {
    format!("'{}'", s.replace('\'', "''"))
}

/// Replaces literals that are anonymized values with their originals.
///
/// Each literal is resolved against the column it is compared with; a
/// string literal with no column context is rewritten only if exactly one
/// column knows it. Continuous columns are never rewritten and all other
/// text is left byte-for-byte intact.
pub fn deanonymize_literals(sql: &str, map: &AnonymizationMap) -> String {
    deanonymize_literals_except(sql, map, &[])
}

/// `phrase` occurs in `text` with no letter or digit glued to either end.
fn mentions_phrase(text: &str, phrase: &str) -> bool {
    text.match_indices(phrase).any(|(at, _)| {
        let before = text[..at].chars().next_back();
        let after = text[at + phrase.len()..].chars().next();
        !before.is_some_and(char::is_alphanumeric) && !after.is_some_and(char::is_alphanumeric)
    })
}

/// Like [`deanonymize_literals`], but leaves alone any literal that the
/// given texts (the user request, the fact idea) mention. Those texts speak
/// in original values, so a year such as 2000 taken from them must survive
/// even when it also happens to be the anonymized image of another year.
pub fn deanonymize_literals_except(sql: &str, map: &AnonymizationMap, mentioned: &[&str]) -> String {
    static NUMBER: std::sync::LazyLock<regex::Regex> =
        std::sync::LazyLock::new(|| regex::Regex::new(r"-?\b\d+(?:\.\d+)?\b").unwrap());
    let numbers: HashSet<&str> = mentioned.iter().flat_map(|t| NUMBER.find_iter(t).map(|m| m.as_str())).collect();
    let is_mentioned = |text: &str, is_str: bool| {
        if is_str {
            !text.is_empty() && mentioned.iter().any(|t| mentions_phrase(t, text))
        } else {
            numbers.contains(text)
        }
    };
    let toks = tokenize(sql);
    let mut out = String::with_capacity(sql.len());
    let mut last = 0;
    for (i, (tok, span)) in toks.iter().enumerate() {
        let (text, is_str) = match tok {
            Tok::Str(s) => (s.to_string(), true),
            Tok::Num(n) => (n.to_string(), false),
            _ => continue,
        };
        let signed = !is_str && i > 0 && is_unary_minus(&toks, i - 1, map);
        let (first, text, start) = if signed {
            (i - 1, format!("-{text}"), toks[i - 1].1.start)
        } else {
            (i, text, span.start)
        };
        let text = text.as_str();
        if is_mentioned(text, is_str) {
            continue;
        }
        let original = match context_column(&toks, first, i, map) {
            Some(col) => map.reverse(col, text),
            None if is_str => {
                let hits: Vec<&str> = map
                    .columns
                    .keys()
                    .filter_map(|c| map.reverse(c, text))
                    .collect();
                (hits.len() == 1).then(|| hits[0])
            }
            None => None,
        };
        if let Some(orig) = original {
            out.push_str(&sql[last..start]);
            if is_str {
                out.push_str(&quote_sql(orig));
            } else {
                out.push_str(orig);
            }
            last = span.end;
        }
    }
    out.push_str(&sql[last..]);
    out
}
