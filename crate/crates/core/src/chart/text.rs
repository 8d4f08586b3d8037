//! Deterministic text measurement with a fixed per-character width table
//! (Helvetica advance widths, 1/1000 em).

fn advance(c: char) -> u32 {
    match c {
        ' ' | '!' | ',' | '.' | '/' | ':' | ';' | 'I' | '[' | '\\' | ']' | 'f' | 't' => 278,
        '\'' | '|' => 191,
        'i' | 'j' | 'l' => 222,
        '(' | ')' | '-' | '`' | 'r' => 333,
        '"' => 355,
        '*' | '^' => 389,
        '{' | '}' => 334,
        '0'..='9' | '#' | '$' | '?' | '_' | '~' => 556,
        'a' | 'b' | 'd' | 'e' | 'g' | 'h' | 'n'..='q' | 'u' | 'L' | 'J' => 556,
        's' | 'k' | 'v' | 'x' | 'y' | 'z' | 'c' => 500,
        'm' => 833,
        'w' => 722,
        '%' => 889,
        '&' | 'A' | 'B' | 'E' | 'K' | 'P' | 'S' | 'V' | 'X' | 'Y' => 667,
        '+' | '<' | '=' | '>' => 584,
        '@' => 1015,
        'C' | 'D' | 'H' | 'N' | 'R' | 'U' => 722,
        'F' | 'T' | 'Z' => 611,
        'G' | 'O' | 'Q' => 778,
        'M' => 833,
        'W' => 944,
        '…' => 1000,
        _ => 600,
    }
}

/// Rendered width of `s` at `size` units per em.
pub fn width(s: &str, size: f64) -> f64 {
    s.chars().map(advance).sum::<u32>() as f64 * size / 1000.0
}

/// Shortens `s` with a trailing ellipsis so that it fits `max` units.
pub fn truncate(s: &str, size: f64, max: f64) -> String {
    if width(s, size) <= max {
        return s.to_string();
    }
    let mut out = String::new();
    for c in s.chars() {
        let candidate = format!("{out}{c}…");
        if width(&candidate, size) > max {
            break;
        }
        out.push(c);
    }
    format!("{out}…")
}

/// Greedy word wrap to lines no wider than `max`; a word longer than a
/// line is truncated.
pub fn wrap(s: &str, size: f64, max: f64) -> Vec<String> {
    let mut lines = Vec::new();
    let mut line = String::new();
    for word in s.split_whitespace() {
        let candidate = if line.is_empty() {
            word.to_string()
        } else {
            format!("{line} {word}")
        };
        if width(&candidate, size) <= max {
            line = candidate;
        } else {
            if !line.is_empty() {
                lines.push(std::mem::take(&mut line));
            }
            line = truncate(word, size, max);
        }
    }
    if !line.is_empty() {
        lines.push(line);
    }
    lines
}

/// Wraps and keeps at most `max_lines`, ellipsizing the last kept line if
/// text was dropped.
pub fn wrap_lines(s: &str, size: f64, max: f64, max_lines: usize) -> Vec<String> {
    let mut lines = wrap(s, size, max);
    if lines.len() > max_lines {
        lines.truncate(max_lines);
        if let Some(last) = lines.last_mut() {
            *last = truncate(&format!("{last}…"), size, max);
            if !last.ends_with('…') {
                last.push('…');
            }
        }
    }
    lines
}
