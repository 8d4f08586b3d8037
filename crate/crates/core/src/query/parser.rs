use super::ast::*;
use super::lexer::{tokenize, Token, TokenKind};
use super::QueryError;
use crate::ingest::Schema;

/// Parses `sql` and resolves every name against `schema`.
///
/// Column and table names match case-insensitively and are stored in their
/// schema spelling. Aliases are substituted in `WHERE`, `GROUP BY` and
/// `HAVING`; a bare alias in `ORDER BY` becomes a result-column position, as
/// does an integer in `GROUP BY` or `ORDER BY`.
pub fn parse(sql: &str, schema: &Schema) -> Result<SqlQuery, QueryError> {
    let tokens = tokenize(sql)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        qualifiers: Vec::new(),
    };
    let raw = p.query()?;
    resolve(raw, p.qualifiers, schema)
}

struct RawQuery {
    query: SqlQuery,
    table_alias: Option<String>,
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    qualifiers: Vec<(String, usize)>,
}

fn word_is(tok: &Token, kw: &str) -> bool {
    matches!(&tok.kind, TokenKind::Word(w) if w.eq_ignore_ascii_case(kw))
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, n: usize) -> &Token {
        &self.tokens[(self.pos + n).min(self.tokens.len() - 1)]
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn is_kw(&self, kw: &str) -> bool {
        word_is(self.peek(), kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek().kind, TokenKind::Symbol(x) if x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn error(&self, expected: &str) -> QueryError {
        let t = self.peek();
        QueryError::syntax(t.offset, expected, &t.describe())
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), QueryError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.error(kw))
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), QueryError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.error(&format!("'{s}'")))
        }
    }

    fn unsupported(construct: &str) -> QueryError {
        QueryError::Unsupported {
            construct: construct.to_string(),
        }
    }

    /// Identifier that is not a reserved word, or a quoted identifier.
    fn name(&mut self, expected: &str) -> Result<String, QueryError> {
        match &self.peek().kind {
            TokenKind::Word(w) if !is_keyword(w) => {
                let w = w.clone();
                self.advance();
                Ok(w)
            }
            TokenKind::QuotedIdent(w) => {
                let w = w.clone();
                self.advance();
                Ok(w)
            }
            _ => Err(self.error(expected)),
        }
    }

    fn query(&mut self) -> Result<RawQuery, QueryError> {
        if let TokenKind::Word(w) = &self.peek().kind {
            let upper = w.to_ascii_uppercase();
            match upper.as_str() {
                "SELECT" => {}
                "WITH" => return Err(Self::unsupported("WITH (common table expressions)")),
                "INSERT" | "UPDATE" | "DELETE" | "CREATE" | "DROP" | "ALTER" | "REPLACE"
                | "PRAGMA" | "ATTACH" => {
                    return Err(Self::unsupported(&format!("{upper} statement")))
                }
                _ => return Err(self.error("SELECT")),
            }
        }
        self.expect_kw("SELECT")?;
        let distinct = if self.eat_kw("DISTINCT") {
            true
        } else {
            self.eat_kw("ALL");
            false
        };

        let mut projections = vec![self.projection()?];
        while self.eat_sym(",") {
            projections.push(self.projection()?);
        }

        self.expect_kw("FROM")?;
        if self.is_sym("(") {
            return Err(Self::unsupported("subquery in FROM"));
        }
        let table = self.name("table name")?;
        if self.eat_sym(".") {
            // schema-qualified table such as main.t
            return Err(Self::unsupported("schema-qualified table name"));
        }
        let table_alias = if self.eat_kw("AS") {
            Some(self.name("table alias")?)
        } else {
            match &self.peek().kind {
                TokenKind::Word(w) if !is_keyword(w) => Some(self.name("table alias")?),
                TokenKind::QuotedIdent(_) => Some(self.name("table alias")?),
                _ => None,
            }
        };
        if self.is_sym(",") {
            return Err(Self::unsupported("JOIN (comma-separated FROM list)"));
        }
        for kw in ["JOIN", "INNER", "LEFT", "RIGHT", "FULL", "CROSS", "NATURAL"] {
            if self.is_kw(kw) {
                return Err(Self::unsupported("JOIN"));
            }
        }

        let filter = if self.eat_kw("WHERE") {
            Some(self.expr()?)
        } else {
            None
        };

        let mut group_by = Vec::new();
        if self.eat_kw("GROUP") {
            self.expect_kw("BY")?;
            group_by.push(self.expr()?);
            while self.eat_sym(",") {
                group_by.push(self.expr()?);
            }
        }

        let having = if self.eat_kw("HAVING") {
            Some(self.expr()?)
        } else {
            None
        };

        let mut order_by = Vec::new();
        if self.eat_kw("ORDER") {
            self.expect_kw("BY")?;
            loop {
                let expr = self.expr()?;
                let descending = if self.eat_kw("DESC") {
                    true
                } else {
                    self.eat_kw("ASC");
                    false
                };
                if self.is_kw("NULLS") {
                    return Err(Self::unsupported("NULLS FIRST/LAST"));
                }
                order_by.push(OrderKey {
                    target: OrderTarget::Expr(expr),
                    descending,
                });
                if !self.eat_sym(",") {
                    break;
                }
            }
        }

        let (mut limit, mut offset) = (None, None);
        if self.eat_kw("LIMIT") {
            let first = self.count()?;
            if self.eat_sym(",") {
                offset = Some(first);
                limit = Some(self.count()?);
            } else {
                limit = Some(first);
                if self.eat_kw("OFFSET") {
                    offset = Some(self.count()?);
                }
            }
        }

        for kw in ["UNION", "EXCEPT", "INTERSECT"] {
            if self.is_kw(kw) {
                return Err(Self::unsupported(kw));
            }
        }
        self.eat_sym(";");
        if self.peek().kind != TokenKind::Eof {
            if self.is_kw("SELECT") {
                return Err(Self::unsupported("multiple statements"));
            }
            return Err(self.error("end of query"));
        }

        Ok(RawQuery {
            query: SqlQuery {
                distinct,
                projections,
                table,
                filter,
                group_by,
                having,
                order_by,
                limit,
                offset,
            },
            table_alias,
        })
    }

    fn count(&mut self) -> Result<u64, QueryError> {
        match self.peek().kind {
            TokenKind::Int(n) if n >= 0 => {
                self.advance();
                Ok(n as u64)
            }
            _ => Err(self.error("a non-negative integer")),
        }
    }

    fn projection(&mut self) -> Result<Projection, QueryError> {
        if self.eat_sym("*") {
            return Ok(Projection::Star);
        }
        // t.*
        if matches!(self.peek().kind, TokenKind::Word(_) | TokenKind::QuotedIdent(_))
            && matches!(self.peek_at(1).kind, TokenKind::Symbol("."))
            && matches!(self.peek_at(2).kind, TokenKind::Symbol("*"))
        {
            let offset = self.peek().offset;
            let q = self.name("table name")?;
            self.qualifiers.push((q, offset));
            self.advance();
            self.advance();
            return Ok(Projection::Star);
        }
        let expr = self.expr()?;
        let alias = if self.eat_kw("AS") {
            match &self.peek().kind {
                TokenKind::Str(s) => {
                    let s = s.clone();
                    self.advance();
                    Some(s)
                }
                _ => Some(self.name("alias")?),
            }
        } else {
            match &self.peek().kind {
                TokenKind::Word(w) if !is_keyword(w) => Some(self.name("alias")?),
                TokenKind::QuotedIdent(_) => Some(self.name("alias")?),
                _ => None,
            }
        };
        Ok(Projection::Expr { expr, alias })
    }

    fn expr(&mut self) -> Result<Expr, QueryError> {
        self.or()
    }

    fn or(&mut self) -> Result<Expr, QueryError> {
        let mut left = self.and()?;
        while self.eat_kw("OR") {
            let right = self.and()?;
            left = binary(BinOp::Or, left, right);
        }
        Ok(left)
    }

    fn and(&mut self) -> Result<Expr, QueryError> {
        let mut left = self.not()?;
        while self.eat_kw("AND") {
            let right = self.not()?;
            left = binary(BinOp::And, left, right);
        }
        Ok(left)
    }

    fn not(&mut self) -> Result<Expr, QueryError> {
        if self.is_kw("NOT") {
            if word_is(self.peek_at(1), "EXISTS") {
                return Err(Self::unsupported("subquery (EXISTS)"));
            }
            self.advance();
            return Ok(Expr::Not(Box::new(self.not()?)));
        }
        self.comparison()
    }

    fn comparison(&mut self) -> Result<Expr, QueryError> {
        let mut left = self.additive()?;
        loop {
            let op = match self.peek().kind {
                TokenKind::Symbol("=") | TokenKind::Symbol("==") => Some(BinOp::Eq),
                TokenKind::Symbol("<>") | TokenKind::Symbol("!=") => Some(BinOp::NotEq),
                TokenKind::Symbol("<") => Some(BinOp::Lt),
                TokenKind::Symbol("<=") => Some(BinOp::LtEq),
                TokenKind::Symbol(">") => Some(BinOp::Gt),
                TokenKind::Symbol(">=") => Some(BinOp::GtEq),
                _ => None,
            };
            if let Some(op) = op {
                self.advance();
                let right = self.additive()?;
                left = binary(op, left, right);
                continue;
            }
            if self.eat_kw("IS") {
                let negated = self.eat_kw("NOT");
                self.expect_kw("NULL")?;
                left = Expr::IsNull {
                    expr: Box::new(left),
                    negated,
                };
                continue;
            }
            let negated = self.is_kw("NOT")
                && ["IN", "BETWEEN", "LIKE"]
                    .iter()
                    .any(|k| word_is(self.peek_at(1), k));
            if negated {
                self.advance();
            }
            if self.eat_kw("IN") {
                self.expect_sym("(")?;
                if self.is_kw("SELECT") {
                    return Err(Self::unsupported("subquery in IN"));
                }
                let mut list = vec![self.expr()?];
                while self.eat_sym(",") {
                    list.push(self.expr()?);
                }
                self.expect_sym(")")?;
                left = Expr::InList {
                    expr: Box::new(left),
                    list,
                    negated,
                };
            } else if self.eat_kw("BETWEEN") {
                let low = self.additive()?;
                self.expect_kw("AND")?;
                let high = self.additive()?;
                left = Expr::Between {
                    expr: Box::new(left),
                    low: Box::new(low),
                    high: Box::new(high),
                    negated,
                };
            } else if self.eat_kw("LIKE") {
                let pattern = self.additive()?;
                if self.is_kw("ESCAPE") {
                    return Err(Self::unsupported("LIKE ... ESCAPE"));
                }
                left = Expr::Like {
                    expr: Box::new(left),
                    pattern: Box::new(pattern),
                    negated,
                };
            } else {
                if self.is_kw("GLOB") || self.is_kw("REGEXP") || self.is_kw("MATCH") {
                    return Err(Self::unsupported(&self.peek().describe()));
                }
                return Ok(left);
            }
        }
    }

    fn additive(&mut self) -> Result<Expr, QueryError> {
        let mut left = self.multiplicative()?;
        loop {
            let op = if self.eat_sym("+") {
                BinOp::Add
            } else if self.eat_sym("-") {
                BinOp::Sub
            } else if self.is_sym("||") {
                return Err(Self::unsupported("|| (string concatenation)"));
            } else {
                return Ok(left);
            };
            let right = self.multiplicative()?;
            left = binary(op, left, right);
        }
    }

    fn multiplicative(&mut self) -> Result<Expr, QueryError> {
        let mut left = self.unary()?;
        loop {
            let op = if self.eat_sym("*") {
                BinOp::Mul
            } else if self.eat_sym("/") {
                BinOp::Div
            } else if self.is_sym("%") {
                return Err(Self::unsupported("% (modulo)"));
            } else {
                return Ok(left);
            };
            let right = self.unary()?;
            left = binary(op, left, right);
        }
    }

    fn unary(&mut self) -> Result<Expr, QueryError> {
        if self.eat_sym("-") {
            return Ok(match self.peek().kind {
                TokenKind::Int(n) => {
                    self.advance();
                    Expr::Literal(Literal::Int(-n))
                }
                TokenKind::Real(r) => {
                    self.advance();
                    Expr::Literal(Literal::Real(-r))
                }
                _ => Expr::Neg(Box::new(self.unary()?)),
            });
        }
        if self.eat_sym("+") {
            return self.unary();
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, QueryError> {
        let tok = self.peek().clone();
        match &tok.kind {
            TokenKind::Int(n) => {
                self.advance();
                Ok(Expr::Literal(Literal::Int(*n)))
            }
            TokenKind::Real(r) => {
                self.advance();
                Ok(Expr::Literal(Literal::Real(*r)))
            }
            TokenKind::Str(s) => {
                self.advance();
                Ok(Expr::Literal(Literal::Text(s.clone())))
            }
            TokenKind::Symbol("(") => {
                self.advance();
                if self.is_kw("SELECT") {
                    return Err(Self::unsupported("subquery"));
                }
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            TokenKind::Word(w) if w.eq_ignore_ascii_case("NULL") => {
                self.advance();
                Ok(Expr::Literal(Literal::Null))
            }
            TokenKind::Word(w) if w.eq_ignore_ascii_case("CASE") => {
                Err(Self::unsupported("CASE expression"))
            }
            TokenKind::Word(w) if w.eq_ignore_ascii_case("EXISTS") => {
                Err(Self::unsupported("subquery (EXISTS)"))
            }
            TokenKind::Word(w)
                if !is_keyword(w) && matches!(self.peek_at(1).kind, TokenKind::Symbol("(")) =>
            {
                self.call(w.clone())
            }
            TokenKind::Word(w) if !is_keyword(w) => self.column(),
            TokenKind::QuotedIdent(_) => self.column(),
            _ => Err(self.error("an expression")),
        }
    }

    fn column(&mut self) -> Result<Expr, QueryError> {
        let offset = self.peek().offset;
        let first = self.name("a column name")?;
        if self.eat_sym(".") {
            let col = self.name("a column name")?;
            self.qualifiers.push((first, offset));
            return Ok(Expr::Column(col));
        }
        Ok(Expr::Column(first))
    }

    fn call(&mut self, name: String) -> Result<Expr, QueryError> {
        let Some(func) = AggFunc::from_name(&name) else {
            return Err(Self::unsupported(&format!(
                "function {}",
                name.to_ascii_uppercase()
            )));
        };
        self.advance();
        self.expect_sym("(")?;
        let (arg, distinct) = if func == AggFunc::Count && self.eat_sym("*") {
            (None, false)
        } else {
            let distinct = self.eat_kw("DISTINCT");
            (Some(Box::new(self.expr()?)), distinct)
        };
        if self.is_sym(",") {
            return Err(Self::unsupported(&format!(
                "{} with more than one argument",
                func.name()
            )));
        }
        self.expect_sym(")")?;
        if self.is_kw("OVER") {
            return Err(Self::unsupported("window function (OVER)"));
        }
        if self.is_kw("FILTER") {
            return Err(Self::unsupported("aggregate FILTER clause"));
        }
        Ok(Expr::Aggregate {
            func,
            arg,
            distinct,
        })
    }
}

fn binary(op: BinOp, left: Expr, right: Expr) -> Expr {
    Expr::Binary {
        op,
        left: Box::new(left),
        right: Box::new(right),
    }
}

// ---------------------------------------------------------------------------
// name resolution and validation

struct Resolver<'a> {
    schema: &'a Schema,
    /// (alias, resolved projection expression)
    aliases: Vec<(String, Expr)>,
}

#[derive(Clone, Copy, PartialEq)]
enum Clause {
    Select,
    Where,
    GroupBy,
    Having,
    OrderBy,
}

impl Resolver<'_> {
    fn unknown(&self, name: &str) -> QueryError {
        QueryError::UnknownColumn {
            name: name.to_string(),
            available: self
                .schema
                .columns
                .iter()
                .map(|c| ident(&c.name))
                .collect::<Vec<_>>()
                .join(", "),
        }
    }

    fn alias(&self, name: &str) -> Option<&Expr> {
        self.aliases
            .iter()
            .find(|(a, _)| a == name)
            .or_else(|| self.aliases.iter().find(|(a, _)| a.eq_ignore_ascii_case(name)))
            .map(|(_, e)| e)
    }

    fn resolve(&self, e: Expr, clause: Clause) -> Result<Expr, QueryError> {
        let r = |e: Box<Expr>| self.resolve(*e, clause).map(Box::new);
        Ok(match e {
            Expr::Column(name) => {
                if let Some((_, c)) = self.schema.column(&name) {
                    Expr::Column(c.name.clone())
                } else if clause != Clause::Select {
                    match self.alias(&name) {
                        Some(e) => e.clone(),
                        None => return Err(self.unknown(&name)),
                    }
                } else {
                    return Err(self.unknown(&name));
                }
            }
            Expr::Literal(l) => Expr::Literal(l),
            Expr::Neg(e) => Expr::Neg(r(e)?),
            Expr::Not(e) => Expr::Not(r(e)?),
            Expr::Binary { op, left, right } => Expr::Binary {
                op,
                left: r(left)?,
                right: r(right)?,
            },
            Expr::InList {
                expr,
                list,
                negated,
            } => Expr::InList {
                expr: r(expr)?,
                list: list
                    .into_iter()
                    .map(|e| self.resolve(e, clause))
                    .collect::<Result<_, _>>()?,
                negated,
            },
            Expr::Between {
                expr,
                low,
                high,
                negated,
            } => Expr::Between {
                expr: r(expr)?,
                low: r(low)?,
                high: r(high)?,
                negated,
            },
            Expr::Like {
                expr,
                pattern,
                negated,
            } => Expr::Like {
                expr: r(expr)?,
                pattern: r(pattern)?,
                negated,
            },
            Expr::IsNull { expr, negated } => Expr::IsNull {
                expr: r(expr)?,
                negated,
            },
            Expr::Aggregate {
                func,
                arg,
                distinct,
            } => {
                let arg = match arg {
                    Some(a) => {
                        let a = self.resolve(*a, clause)?;
                        if a.contains_aggregate() {
                            return Err(QueryError::Invalid(format!(
                                "nested aggregate inside {}",
                                func.name()
                            )));
                        }
                        Some(Box::new(a))
                    }
                    None => None,
                };
                Expr::Aggregate {
                    func,
                    arg,
                    distinct,
                }
            }
        })
    }
}

fn projection_expr(q: &SqlQuery, pos: i64, clause: &str) -> Result<Expr, QueryError> {
    let exprs: Vec<&Expr> = q
        .projections
        .iter()
        .filter_map(|p| match p {
            Projection::Expr { expr, .. } => Some(expr),
            Projection::Star => None,
        })
        .collect();
    if q.projections.iter().any(|p| matches!(p, Projection::Star)) {
        return Err(QueryError::Invalid(format!(
            "{clause} position {pos} cannot refer to a SELECT list containing *"
        )));
    }
    if pos < 1 || pos as usize > exprs.len() {
        return Err(QueryError::Invalid(format!(
            "{clause} term {pos} is out of range; the SELECT list has {} columns",
            exprs.len()
        )));
    }
    Ok(exprs[pos as usize - 1].clone())
}

/// Checks that every column reference outside an aggregate is covered by a
/// GROUP BY expression.
fn check_grouped(e: &Expr, group_by: &[Expr], clause: &str) -> Result<(), QueryError> {
    if group_by.contains(e) {
        return Ok(());
    }
    match e {
        Expr::Column(c) => Err(QueryError::Invalid(format!(
            "column {} in {clause} must appear in GROUP BY or be used inside an aggregate function",
            ident(c)
        ))),
        Expr::Aggregate { .. } | Expr::Literal(_) => Ok(()),
        Expr::Neg(x) | Expr::Not(x) | Expr::IsNull { expr: x, .. } => {
            check_grouped(x, group_by, clause)
        }
        Expr::Binary { left, right, .. } => {
            check_grouped(left, group_by, clause)?;
            check_grouped(right, group_by, clause)
        }
        Expr::InList { expr, list, .. } => {
            check_grouped(expr, group_by, clause)?;
            list.iter()
                .try_for_each(|x| check_grouped(x, group_by, clause))
        }
        Expr::Between {
            expr, low, high, ..
        } => {
            check_grouped(expr, group_by, clause)?;
            check_grouped(low, group_by, clause)?;
            check_grouped(high, group_by, clause)
        }
        Expr::Like { expr, pattern, .. } => {
            check_grouped(expr, group_by, clause)?;
            check_grouped(pattern, group_by, clause)
        }
    }
}

fn resolve(
    raw: RawQuery,
    qualifiers: Vec<(String, usize)>,
    schema: &Schema,
) -> Result<SqlQuery, QueryError> {
    let RawQuery {
        query: q,
        table_alias,
    } = raw;
    if !q.table.eq_ignore_ascii_case(&schema.table) {
        return Err(QueryError::UnknownTable {
            name: q.table,
            expected: schema.table.clone(),
        });
    }
    for (qual, _) in &qualifiers {
        let ok = qual.eq_ignore_ascii_case(&schema.table)
            || table_alias
                .as_deref()
                .is_some_and(|a| a.eq_ignore_ascii_case(qual));
        if !ok {
            return Err(QueryError::UnknownTable {
                name: qual.clone(),
                expected: schema.table.clone(),
            });
        }
    }

    let mut res = Resolver {
        schema,
        aliases: Vec::new(),
    };
    let mut projections = Vec::with_capacity(q.projections.len());
    for p in q.projections {
        projections.push(match p {
            Projection::Star => Projection::Star,
            Projection::Expr { expr, alias } => Projection::Expr {
                expr: res.resolve(expr, Clause::Select)?,
                alias,
            },
        });
    }
    res.aliases = projections
        .iter()
        .filter_map(|p| match p {
            Projection::Expr {
                expr,
                alias: Some(a),
            } => Some((a.clone(), expr.clone())),
            _ => None,
        })
        .collect();

    let mut out = SqlQuery {
        distinct: q.distinct,
        projections,
        table: schema.table.clone(),
        filter: None,
        group_by: Vec::new(),
        having: None,
        order_by: Vec::new(),
        limit: q.limit,
        offset: q.offset,
    };

    if let Some(w) = q.filter {
        let w = res.resolve(w, Clause::Where)?;
        if w.contains_aggregate() {
            return Err(QueryError::Invalid(
                "aggregate functions are not allowed in WHERE; use HAVING".into(),
            ));
        }
        out.filter = Some(w);
    }

    for g in q.group_by {
        let g = match g {
            Expr::Literal(Literal::Int(n)) => projection_expr(&out, n, "GROUP BY")?,
            other => res.resolve(other, Clause::GroupBy)?,
        };
        if g.contains_aggregate() {
            return Err(QueryError::Invalid(
                "aggregate functions are not allowed in GROUP BY".into(),
            ));
        }
        out.group_by.push(g);
    }

    if let Some(h) = q.having {
        out.having = Some(res.resolve(h, Clause::Having)?);
    }

    let width: usize = out
        .projections
        .iter()
        .map(|p| match p {
            Projection::Star => schema.columns.len(),
            Projection::Expr { .. } => 1,
        })
        .sum();
    for key in q.order_by {
        let OrderTarget::Expr(e) = key.target else {
            unreachable!("parser only emits expression order keys")
        };
        let target = match e {
            Expr::Literal(Literal::Int(n)) => {
                if n < 1 || n as usize > width {
                    return Err(QueryError::Invalid(format!(
                        "ORDER BY term {n} is out of range; the result has {width} columns"
                    )));
                }
                OrderTarget::Position(n as usize)
            }
            Expr::Column(name) => {
                let pos = out.projections.iter().position(|p| {
                    matches!(p, Projection::Expr { alias: Some(a), .. } if a == &name)
                });
                let pos = pos.or_else(|| {
                    out.projections.iter().position(|p| {
                        matches!(p, Projection::Expr { alias: Some(a), .. } if a.eq_ignore_ascii_case(&name))
                    })
                });
                match pos {
                    Some(i) => OrderTarget::Position(i + 1),
                    None => OrderTarget::Expr(res.resolve(Expr::Column(name), Clause::OrderBy)?),
                }
            }
            other => OrderTarget::Expr(res.resolve(other, Clause::OrderBy)?),
        };
        out.order_by.push(OrderKey {
            target,
            descending: key.descending,
        });
    }

    if out.is_aggregate() {
        for p in &out.projections {
            match p {
                Projection::Star => {
                    return Err(QueryError::Invalid(
                        "SELECT * cannot be combined with GROUP BY or aggregates".into(),
                    ))
                }
                Projection::Expr { expr, .. } => check_grouped(expr, &out.group_by, "SELECT")?,
            }
        }
        if let Some(h) = &out.having {
            check_grouped(h, &out.group_by, "HAVING")?;
        }
        for k in &out.order_by {
            if let OrderTarget::Expr(e) = &k.target {
                check_grouped(e, &out.group_by, "ORDER BY")?;
            }
        }
    }
    Ok(out)
}
