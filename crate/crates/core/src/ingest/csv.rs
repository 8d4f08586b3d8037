//! Strict RFC-4180 reader.
//!
//! Rows and columns in errors are 1-based; row 1 is the header.

use super::{Column, Dataset, IngestError};
use std::collections::HashSet;

pub fn load_csv(bytes: &[u8], name: &str) -> Result<Dataset, IngestError> {
    let text = std::str::from_utf8(bytes).map_err(|e| IngestError::Utf8 {
        offset: e.valid_up_to(),
    })?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let records = parse_records(text)?;
    let mut records = records.into_iter();
    let header = records.next().ok_or(IngestError::Empty)?;

    let mut seen = HashSet::new();
    for (i, h) in header.iter().enumerate() {
        if h.trim().is_empty() {
            return Err(IngestError::EmptyColumnName { col: i + 1 });
        }
        if !seen.insert(h.as_str()) {
            return Err(IngestError::DuplicateColumn(h.clone()));
        }
    }

    let mut columns: Vec<Vec<Option<String>>> = vec![Vec::new(); header.len()];
    let mut row_count = 0;
    for (i, rec) in records.enumerate() {
        if rec.len() != header.len() {
            return Err(IngestError::Ragged {
                row: i + 2,
                expected: header.len(),
                found: rec.len(),
            });
        }
        for (col, field) in columns.iter_mut().zip(rec) {
            col.push((!field.is_empty()).then_some(field));
        }
        row_count += 1;
    }

    Ok(Dataset {
        name: name.to_string(),
        columns: header
            .into_iter()
            .zip(columns)
            .map(|(h, cells)| Column::raw(h, cells))
            .collect(),
        row_count,
    })
}

/// Splits text into records. Blank lines are skipped.
fn parse_records(text: &str) -> Result<Vec<Vec<String>>, IngestError> {
    let mut records = Vec::new();
    let mut chars = text.chars().peekable();
    let mut row = 1;

    while chars.peek().is_some() {
        // blank line
        if matches!(chars.peek(), Some('\n' | '\r')) {
            if chars.next() == Some('\r') && chars.peek() == Some(&'\n') {
                chars.next();
            }
            continue;
        }

        let mut record = Vec::new();
        loop {
            let col = record.len() + 1;
            let mut field = String::new();
            if chars.peek() == Some(&'"') {
                chars.next();
                loop {
                    match chars.next() {
                        None => return Err(IngestError::UnterminatedQuote { row, col }),
                        Some('"') if chars.peek() == Some(&'"') => {
                            chars.next();
                            field.push('"');
                        }
                        Some('"') => break,
                        Some(c) => field.push(c),
                    }
                }
                if !matches!(chars.peek(), None | Some(',' | '\n' | '\r')) {
                    return Err(IngestError::UnexpectedQuote { row, col });
                }
            } else {
                while let Some(&c) = chars.peek() {
                    match c {
                        ',' | '\n' | '\r' => break,
                        '"' => return Err(IngestError::UnexpectedQuote { row, col }),
                        _ => {
                            field.push(c);
                            chars.next();
                        }
                    }
                }
            }
            record.push(field);
            match chars.next() {
                Some(',') => continue,
                Some('\r') => {
                    if chars.peek() == Some(&'\n') {
                        chars.next();
                    }
                    break;
                }
                _ => break,
            }
        }
        records.push(record);
        row += 1;
    }
    Ok(records)
}
