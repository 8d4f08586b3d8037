use super::QueryError;

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    /// Bare word; keywords are recognized by the parser.
    Word(String),
    /// `"quoted"`, `` `quoted` `` or `[quoted]` identifier.
    QuotedIdent(String),
    Str(String),
    Int(i64),
    Real(f64),
    Symbol(&'static str),
    Eof,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub offset: usize,
}

impl Token {
    pub fn describe(&self) -> String {
        match &self.kind {
            TokenKind::Word(w) => format!("'{w}'"),
            TokenKind::QuotedIdent(w) => format!("identifier \"{w}\""),
            TokenKind::Str(s) => format!("string '{s}'"),
            TokenKind::Int(i) => format!("number {i}"),
            TokenKind::Real(r) => format!("number {r}"),
            TokenKind::Symbol(s) => format!("'{s}'"),
            TokenKind::Eof => "end of input".into(),
        }
    }
}

const SYMBOLS: &[&str] = &[
    "<=", ">=", "<>", "!=", "==", "||", "=", "<", ">", "+", "-", "*", "/", "%", "(", ")", ",",
    ";", ".",
];

pub fn tokenize(sql: &str) -> Result<Vec<Token>, QueryError> {
    let mut tokens = Vec::new();
    let bytes = sql.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = sql[i..].chars().next().unwrap();
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        if sql[i..].starts_with("--") {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if sql[i..].starts_with("/*") {
            match sql[i + 2..].find("*/") {
                Some(end) => i += end + 4,
                None => {
                    return Err(QueryError::syntax(i, "closing */", "end of input"));
                }
            }
            continue;
        }
        let start = i;
        let kind = if c == '\'' {
            let (s, next) = read_quoted(sql, i, '\'')?;
            i = next;
            TokenKind::Str(s)
        } else if c == '"' || c == '`' {
            let (s, next) = read_quoted(sql, i, c)?;
            i = next;
            TokenKind::QuotedIdent(s)
        } else if c == '[' {
            let end = sql[i..]
                .find(']')
                .ok_or_else(|| QueryError::syntax(i, "closing ]", "end of input"))?;
            let name = sql[i + 1..i + end].to_string();
            i += end + 1;
            TokenKind::QuotedIdent(name)
        } else if c.is_ascii_digit() || (c == '.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            let (kind, next) = read_number(sql, i)?;
            i = next;
            kind
        } else if c.is_alphabetic() || c == '_' {
            while i < bytes.len() {
                let ch = sql[i..].chars().next().unwrap();
                if ch.is_alphanumeric() || ch == '_' || ch == '$' {
                    i += ch.len_utf8();
                } else {
                    break;
                }
            }
            TokenKind::Word(sql[start..i].to_string())
        } else if let Some(sym) = SYMBOLS.iter().find(|s| sql[i..].starts_with(**s)) {
            i += sym.len();
            TokenKind::Symbol(sym)
        } else {
            return Err(QueryError::syntax(i, "a token", &format!("'{c}'")));
        };
        tokens.push(Token {
            kind,
            offset: start,
        });
    }
    tokens.push(Token {
        kind: TokenKind::Eof,
        offset: sql.len(),
    });
    Ok(tokens)
}

fn read_quoted(sql: &str, start: usize, quote: char) -> Result<(String, usize), QueryError> {
    let mut out = String::new();
    let mut i = start + 1;
    while i < sql.len() {
        let ch = sql[i..].chars().next().unwrap();
        if ch == quote {
            if sql[i + 1..].starts_with(quote) {
                out.push(quote);
                i += 2;
                continue;
            }
            return Ok((out, i + 1));
        }
        out.push(ch);
        i += ch.len_utf8();
    }
    Err(QueryError::syntax(
        start,
        &format!("closing {quote}"),
        "end of input",
    ))
}

fn read_number(sql: &str, start: usize) -> Result<(TokenKind, usize), QueryError> {
    let bytes = sql.as_bytes();
    let mut i = start;
    let mut is_real = false;
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        i += 1;
    }
    if i < bytes.len() && bytes[i] == b'.' {
        is_real = true;
        i += 1;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
    }
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        let mut j = i + 1;
        if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
            j += 1;
        }
        if j < bytes.len() && bytes[j].is_ascii_digit() {
            is_real = true;
            i = j;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
        }
    }
    let text = &sql[start..i];
    let kind = if is_real {
        TokenKind::Real(
            text.parse()
                .map_err(|_| QueryError::syntax(start, "a number", text))?,
        )
    } else {
        match text.parse::<i64>() {
            Ok(v) => TokenKind::Int(v),
            Err(_) => TokenKind::Real(
                text.parse()
                    .map_err(|_| QueryError::syntax(start, "a number", text))?,
            ),
        }
    };
    Ok((kind, i))
}
