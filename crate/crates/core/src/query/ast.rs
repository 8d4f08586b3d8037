//! Query object model and its canonical SQL printer.
//!
//! Printing is precedence-aware and always re-parses to an equal query.

use std::fmt::{self, Write as _};

#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Null,
    Int(i64),
    Real(f64),
    Text(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggFunc {
    Count,
    Sum,
    Avg,
    Min,
    Max,
}

impl AggFunc {
    pub fn name(self) -> &'static str {
        match self {
            AggFunc::Count => "COUNT",
            AggFunc::Sum => "SUM",
            AggFunc::Avg => "AVG",
            AggFunc::Min => "MIN",
            AggFunc::Max => "MAX",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name.to_ascii_uppercase().as_str() {
            "COUNT" => AggFunc::Count,
            "SUM" => AggFunc::Sum,
            "AVG" => AggFunc::Avg,
            "MIN" => AggFunc::Min,
            "MAX" => AggFunc::Max,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Or,
    And,
    Eq,
    NotEq,
    Lt,
    LtEq,
    Gt,
    GtEq,
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Or => "OR",
            BinOp::And => "AND",
            BinOp::Eq => "=",
            BinOp::NotEq => "<>",
            BinOp::Lt => "<",
            BinOp::LtEq => "<=",
            BinOp::Gt => ">",
            BinOp::GtEq => ">=",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    pub(crate) fn precedence(self) -> u8 {
        match self {
            BinOp::Or => PREC_OR,
            BinOp::And => PREC_AND,
            BinOp::Eq | BinOp::NotEq | BinOp::Lt | BinOp::LtEq | BinOp::Gt | BinOp::GtEq => {
                PREC_CMP
            }
            BinOp::Add | BinOp::Sub => PREC_ADD,
            BinOp::Mul | BinOp::Div => PREC_MUL,
        }
    }
}

pub(crate) const PREC_OR: u8 = 1;
pub(crate) const PREC_AND: u8 = 2;
pub(crate) const PREC_NOT: u8 = 3;
pub(crate) const PREC_CMP: u8 = 4;
pub(crate) const PREC_ADD: u8 = 5;
pub(crate) const PREC_MUL: u8 = 6;
pub(crate) const PREC_ATOM: u8 = 8;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    /// Canonical (schema-cased) column name.
    Column(String),
    Literal(Literal),
    Neg(Box<Expr>),
    Not(Box<Expr>),
    Binary {
        op: BinOp,
        left: Box<Expr>,
        right: Box<Expr>,
    },
    InList {
        expr: Box<Expr>,
        list: Vec<Expr>,
        negated: bool,
    },
    Between {
        expr: Box<Expr>,
        low: Box<Expr>,
        high: Box<Expr>,
        negated: bool,
    },
    Like {
        expr: Box<Expr>,
        pattern: Box<Expr>,
        negated: bool,
    },
    IsNull {
        expr: Box<Expr>,
        negated: bool,
    },
    Aggregate {
        func: AggFunc,
        /// `None` for `COUNT(*)`.
        arg: Option<Box<Expr>>,
        distinct: bool,
    },
}

impl Expr {
    pub(crate) fn precedence(&self) -> u8 {
        match self {
            Expr::Binary { op, .. } => op.precedence(),
            Expr::Not(_) => PREC_NOT,
            Expr::InList { .. } | Expr::Between { .. } | Expr::Like { .. } | Expr::IsNull { .. } => {
                PREC_CMP
            }
            _ => PREC_ATOM,
        }
    }

    pub fn contains_aggregate(&self) -> bool {
        let mut found = false;
        self.walk(&mut |e| found |= matches!(e, Expr::Aggregate { .. }));
        found
    }

    /// Pre-order visit of this expression and all sub-expressions.
    pub fn walk(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Column(_) | Expr::Literal(_) => {}
            Expr::Neg(e) | Expr::Not(e) | Expr::IsNull { expr: e, .. } => e.walk(f),
            Expr::Binary { left, right, .. } => {
                left.walk(f);
                right.walk(f);
            }
            Expr::InList { expr, list, .. } => {
                expr.walk(f);
                list.iter().for_each(|e| e.walk(f));
            }
            Expr::Between { expr, low, high, .. } => {
                expr.walk(f);
                low.walk(f);
                high.walk(f);
            }
            Expr::Like { expr, pattern, .. } => {
                expr.walk(f);
                pattern.walk(f);
            }
            Expr::Aggregate { arg, .. } => {
                if let Some(a) = arg {
                    a.walk(f);
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Projection {
    Star,
    Expr { expr: Expr, alias: Option<String> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum OrderTarget {
    /// 1-based result column.
    Position(usize),
    Expr(Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderKey {
    pub target: OrderTarget,
    pub descending: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SqlQuery {
    pub distinct: bool,
    pub projections: Vec<Projection>,
    pub table: String,
    pub filter: Option<Expr>,
    pub group_by: Vec<Expr>,
    pub having: Option<Expr>,
    pub order_by: Vec<OrderKey>,
    pub limit: Option<u64>,
    pub offset: Option<u64>,
}

impl SqlQuery {
    /// True when the query aggregates rows (explicit grouping or any
    /// aggregate call in the select list, HAVING or ORDER BY).
    pub fn is_aggregate(&self) -> bool {
        !self.group_by.is_empty()
            || self.having.is_some()
            || self.projections.iter().any(|p| match p {
                Projection::Expr { expr, .. } => expr.contains_aggregate(),
                Projection::Star => false,
            })
            || self.order_by.iter().any(|k| match &k.target {
                OrderTarget::Expr(e) => e.contains_aggregate(),
                OrderTarget::Position(_) => false,
            })
    }
}

pub(crate) const KEYWORDS: &[&str] = &[
    "SELECT", "DISTINCT", "FROM", "WHERE", "GROUP", "BY", "HAVING", "ORDER", "ASC", "DESC",
    "LIMIT", "OFFSET", "AS", "AND", "OR", "NOT", "IN", "BETWEEN", "LIKE", "IS", "NULL", "JOIN",
    "ON", "UNION", "ALL", "CASE", "WHEN", "THEN", "ELSE", "END", "WITH", "INNER", "LEFT",
    "RIGHT", "FULL", "OUTER", "CROSS", "NATURAL", "EXCEPT", "INTERSECT", "OVER", "EXISTS",
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.iter().any(|k| k.eq_ignore_ascii_case(word))
}

/// Identifier as SQL text, quoted only when necessary.
pub fn ident(name: &str) -> String {
    let simple = name
        .chars()
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if simple && !is_keyword(name) && AggFunc::from_name(name).is_none() {
        name.to_string()
    } else {
        format!("\"{}\"", name.replace('"', "\"\""))
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Null => f.write_str("NULL"),
            Literal::Int(v) if *v < 0 => write!(f, "({v})"),
            Literal::Int(v) => write!(f, "{v}"),
            Literal::Real(v) if v.is_sign_negative() => write!(f, "({v:?})"),
            Literal::Real(v) => write!(f, "{v:?}"),
            Literal::Text(s) => write!(f, "'{}'", s.replace('\'', "''")),
        }
    }
}

fn child(f: &mut fmt::Formatter<'_>, e: &Expr, needs_parens: bool) -> fmt::Result {
    if needs_parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Column(c) => f.write_str(&ident(c)),
            Expr::Literal(l) => write!(f, "{l}"),
            // a bare numeric literal after the sign would re-parse as a
            // negative literal
            Expr::Neg(e) if matches!(**e, Expr::Literal(Literal::Int(_) | Literal::Real(_))) => {
                write!(f, "(-({e}))")
            }
            Expr::Neg(e) => write!(f, "(-{})", Paren(e, PREC_ATOM)),
            Expr::Not(e) => {
                f.write_str("NOT ")?;
                child(f, e, e.precedence() < PREC_NOT)
            }
            Expr::Binary { op, left, right } => {
                let p = op.precedence();
                child(f, left, left.precedence() < p)?;
                write!(f, " {} ", op.symbol())?;
                child(f, right, right.precedence() <= p)
            }
            Expr::InList {
                expr,
                list,
                negated,
            } => {
                child(f, expr, expr.precedence() < PREC_CMP)?;
                f.write_str(if *negated { " NOT IN (" } else { " IN (" })?;
                for (i, e) in list.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{e}")?;
                }
                f.write_char(')')
            }
            Expr::Between {
                expr,
                low,
                high,
                negated,
            } => {
                child(f, expr, expr.precedence() < PREC_CMP)?;
                f.write_str(if *negated { " NOT BETWEEN " } else { " BETWEEN " })?;
                child(f, low, low.precedence() <= PREC_CMP)?;
                f.write_str(" AND ")?;
                child(f, high, high.precedence() <= PREC_CMP)
            }
            Expr::Like {
                expr,
                pattern,
                negated,
            } => {
                child(f, expr, expr.precedence() < PREC_CMP)?;
                f.write_str(if *negated { " NOT LIKE " } else { " LIKE " })?;
                child(f, pattern, pattern.precedence() <= PREC_CMP)
            }
            Expr::IsNull { expr, negated } => {
                child(f, expr, expr.precedence() < PREC_CMP)?;
                f.write_str(if *negated { " IS NOT NULL" } else { " IS NULL" })
            }
            Expr::Aggregate {
                func,
                arg,
                distinct,
            } => {
                write!(f, "{}(", func.name())?;
                if *distinct {
                    f.write_str("DISTINCT ")?;
                }
                match arg {
                    Some(a) => write!(f, "{a}")?,
                    None => f.write_char('*')?,
                }
                f.write_char(')')
            }
        }
    }
}

/// Wraps a child in parentheses when it binds looser than `min`.
struct Paren<'a>(&'a Expr, u8);

impl fmt::Display for Paren<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        child(f, self.0, self.0.precedence() < self.1)
    }
}

impl fmt::Display for SqlQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SELECT ")?;
        if self.distinct {
            f.write_str("DISTINCT ")?;
        }
        for (i, p) in self.projections.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            match p {
                Projection::Star => f.write_char('*')?,
                Projection::Expr { expr, alias } => {
                    write!(f, "{expr}")?;
                    if let Some(a) = alias {
                        write!(f, " AS {}", ident(a))?;
                    }
                }
            }
        }
        write!(f, " FROM {}", ident(&self.table))?;
        if let Some(w) = &self.filter {
            write!(f, " WHERE {w}")?;
        }
        if !self.group_by.is_empty() {
            f.write_str(" GROUP BY ")?;
            for (i, g) in self.group_by.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{g}")?;
            }
        }
        if let Some(h) = &self.having {
            write!(f, " HAVING {h}")?;
        }
        if !self.order_by.is_empty() {
            f.write_str(" ORDER BY ")?;
            for (i, k) in self.order_by.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                match &k.target {
                    OrderTarget::Position(p) => write!(f, "{p}")?,
                    OrderTarget::Expr(e) => write!(f, "{e}")?,
                }
                f.write_str(if k.descending { " DESC" } else { " ASC" })?;
            }
        }
        if let Some(l) = self.limit {
            write!(f, " LIMIT {l}")?;
        }
        if let Some(o) = self.offset {
            write!(f, " OFFSET {o}")?;
        }
        Ok(())
    }
}
