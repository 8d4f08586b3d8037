use super::ast::*;
use super::{QueryError, ResultColumn, ResultTable, Value, ValueType};
use crate::ingest::{parse_int, parse_real, DataClass, Dataset};
use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

/// Executes a parsed query against the dataset it was validated for.
///
/// Types are checked statically before any row is touched, so a mistyped
/// comparison fails even on an empty table.
pub fn execute(q: &SqlQuery, ds: &Dataset) -> Result<ResultTable, QueryError> {
    let table = Table::load(ds);
    let ctx = Ctx { table: &table };

    let mut outputs: Vec<(String, &Expr)> = Vec::new();
    let star_exprs: Vec<Expr> = table.names.iter().map(|n| Expr::Column(n.clone())).collect();
    for p in &q.projections {
        match p {
            Projection::Star => {
                for (name, e) in table.names.iter().zip(&star_exprs) {
                    outputs.push((name.clone(), e));
                }
            }
            Projection::Expr { expr, alias } => {
                let name = alias.clone().unwrap_or_else(|| match expr {
                    Expr::Column(c) => c.clone(),
                    other => other.to_string(),
                });
                outputs.push((name, expr));
            }
        }
    }

    let mut columns = Vec::with_capacity(outputs.len());
    for (name, e) in &outputs {
        columns.push(ResultColumn {
            name: name.clone(),
            ty: ctx.infer(e)?,
        });
    }
    if let Some(w) = &q.filter {
        ctx.check_condition(w, "WHERE")?;
    }
    for g in &q.group_by {
        ctx.infer(g)?;
    }
    if let Some(h) = &q.having {
        ctx.check_condition(h, "HAVING")?;
    }
    for k in &q.order_by {
        match &k.target {
            OrderTarget::Expr(e) => {
                ctx.infer(e)?;
            }
            OrderTarget::Position(p) if *p == 0 || *p > outputs.len() => {
                return Err(QueryError::Invalid(format!(
                    "ORDER BY term {p} is out of range; the result has {} columns",
                    outputs.len()
                )))
            }
            OrderTarget::Position(_) => {}
        }
    }

    let mut kept: Vec<usize> = Vec::new();
    for r in 0..table.row_count {
        let pass = match &q.filter {
            Some(w) => truth(&ctx.eval(w, &RowScope { ctx: &ctx, row: r })?)? == Some(true),
            None => true,
        };
        if pass {
            kept.push(r);
        }
    }

    // (output values, sort keys)
    let mut produced: Vec<(Vec<Value>, Vec<Value>)> = Vec::new();
    let order_exprs = |values: &Vec<Value>, scope: &dyn Scope| -> Result<Vec<Value>, QueryError> {
        q.order_by
            .iter()
            .map(|k| match &k.target {
                OrderTarget::Position(p) => Ok(values[p - 1].clone()),
                OrderTarget::Expr(e) => ctx.eval(e, scope),
            })
            .collect()
    };

    if q.is_aggregate() {
        let groups: Vec<Vec<usize>> = if q.group_by.is_empty() {
            vec![kept]
        } else {
            let mut index: HashMap<Vec<Key>, usize> = HashMap::new();
            let mut groups: Vec<Vec<usize>> = Vec::new();
            for r in kept {
                let scope = RowScope { ctx: &ctx, row: r };
                let key = q
                    .group_by
                    .iter()
                    .map(|g| ctx.eval(g, &scope).map(|v| Key::of(&v)))
                    .collect::<Result<Vec<_>, _>>()?;
                let next = groups.len();
                let gi = *index.entry(key).or_insert(next);
                if gi == next {
                    groups.push(Vec::new());
                }
                groups[gi].push(r);
            }
            groups
        };
        for rows in &groups {
            let scope = GroupScope {
                ctx: &ctx,
                rows,
                group_by: &q.group_by,
            };
            if let Some(h) = &q.having {
                if truth(&ctx.eval(h, &scope)?)? != Some(true) {
                    continue;
                }
            }
            let values = outputs
                .iter()
                .map(|(_, e)| ctx.eval(e, &scope))
                .collect::<Result<Vec<_>, _>>()?;
            let keys = order_exprs(&values, &scope)?;
            produced.push((values, keys));
        }
    } else {
        for &r in &kept {
            let scope = RowScope { ctx: &ctx, row: r };
            let values = outputs
                .iter()
                .map(|(_, e)| ctx.eval(e, &scope))
                .collect::<Result<Vec<_>, _>>()?;
            let keys = order_exprs(&values, &scope)?;
            produced.push((values, keys));
        }
    }

    if q.distinct {
        let mut seen: HashSet<Vec<Key>> = HashSet::new();
        produced.retain(|(values, _)| seen.insert(values.iter().map(Key::of).collect()));
    }

    if !q.order_by.is_empty() {
        produced.sort_by(|a, b| {
            for (i, k) in q.order_by.iter().enumerate() {
                let mut o = sort_cmp(&a.1[i], &b.1[i]);
                if k.descending {
                    o = o.reverse();
                }
                if o != Ordering::Equal {
                    return o;
                }
            }
            Ordering::Equal
        });
    }

    let offset = q.offset.unwrap_or(0) as usize;
    let limit = q.limit.map(|l| l as usize).unwrap_or(usize::MAX);
    let rows = produced
        .into_iter()
        .skip(offset)
        .take(limit)
        .map(|(v, _)| v)
        .collect();
    Ok(ResultTable { columns, rows })
}

/// Typed copy of the dataset cells.
struct Table {
    names: Vec<String>,
    types: Vec<ValueType>,
    cells: Vec<Vec<Value>>,
    row_count: usize,
}

impl Table {
    fn load(ds: &Dataset) -> Self {
        let mut names = Vec::new();
        let mut types = Vec::new();
        let mut cells = Vec::new();
        for col in &ds.columns {
            names.push(col.name.clone());
            let ty = match col.data_class {
                DataClass::Discrete => ValueType::Integer,
                DataClass::Continuous => ValueType::Real,
                DataClass::Nominal | DataClass::Ordinal => ValueType::Text,
            };
            types.push(ty);
            cells.push(
                col.cells
                    .iter()
                    .map(|c| match c {
                        None => Value::Null,
                        Some(s) => match ty {
                            ValueType::Integer => parse_int(s)
                                .map(Value::Int)
                                .or_else(|| parse_real(s).map(Value::Real))
                                .unwrap_or_else(|| Value::Text(s.clone())),
                            ValueType::Real => parse_real(s)
                                .map(Value::Real)
                                .unwrap_or_else(|| Value::Text(s.clone())),
                            _ => Value::Text(s.clone()),
                        },
                    })
                    .collect(),
            );
        }
        Table {
            names,
            types,
            cells,
            row_count: ds.row_count,
        }
    }

    fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

trait Scope {
    /// Value for `e` if the scope binds it directly (grouped expressions
    /// and aggregates); `None` means evaluate structurally.
    fn bound(&self, e: &Expr) -> Option<Result<Value, QueryError>>;
    fn column(&self, index: usize) -> Value;
}

struct RowScope<'a> {
    ctx: &'a Ctx<'a>,
    row: usize,
}

impl Scope for RowScope<'_> {
    fn bound(&self, e: &Expr) -> Option<Result<Value, QueryError>> {
        match e {
            Expr::Aggregate { func, .. } => Some(Err(QueryError::Invalid(format!(
                "{} is not allowed here",
                func.name()
            )))),
            _ => None,
        }
    }

    fn column(&self, index: usize) -> Value {
        self.ctx.table.cells[index][self.row].clone()
    }
}

struct GroupScope<'a> {
    ctx: &'a Ctx<'a>,
    rows: &'a [usize],
    group_by: &'a [Expr],
}

impl Scope for GroupScope<'_> {
    fn bound(&self, e: &Expr) -> Option<Result<Value, QueryError>> {
        if let Expr::Aggregate {
            func,
            arg,
            distinct,
        } = e
        {
            return Some(self.ctx.aggregate(*func, arg.as_deref(), *distinct, self.rows));
        }
        if self.group_by.contains(e) {
            return Some(match self.rows.first() {
                Some(&row) => self.ctx.eval(e, &RowScope { ctx: self.ctx, row }),
                None => Ok(Value::Null),
            });
        }
        None
    }

    fn column(&self, index: usize) -> Value {
        self.rows
            .first()
            .map(|&r| self.ctx.table.cells[index][r].clone())
            .unwrap_or(Value::Null)
    }
}

struct Ctx<'a> {
    table: &'a Table,
}

fn mismatch(msg: String) -> QueryError {
    QueryError::TypeMismatch(msg)
}

impl Ctx<'_> {
    fn column_index(&self, name: &str) -> Result<usize, QueryError> {
        self.table.index(name).ok_or_else(|| QueryError::UnknownColumn {
            name: name.to_string(),
            available: self
                .table
                .names
                .iter()
                .map(|n| ident(n))
                .collect::<Vec<_>>()
                .join(", "),
        })
    }

    fn check_condition(&self, e: &Expr, clause: &str) -> Result<(), QueryError> {
        if self.infer(e)? == ValueType::Text {
            return Err(mismatch(format!(
                "{clause} condition {e} is TEXT, expected a boolean expression"
            )));
        }
        Ok(())
    }

    fn check_comparable(&self, a: &Expr, b: &Expr) -> Result<(), QueryError> {
        let (ta, tb) = (self.infer(a)?, self.infer(b)?);
        if (ta == ValueType::Text && tb.is_numeric()) || (ta.is_numeric() && tb == ValueType::Text) {
            return Err(mismatch(format!(
                "cannot compare {a} ({ta}) with {b} ({tb}); compare text with quoted strings and numbers with numeric literals"
            )));
        }
        Ok(())
    }

    fn numeric_operand(&self, e: &Expr, context: &str) -> Result<ValueType, QueryError> {
        let t = self.infer(e)?;
        if t == ValueType::Text {
            return Err(mismatch(format!("{context} requires a numeric operand, got {e} (TEXT)")));
        }
        Ok(t)
    }

    /// Static result type of an expression.
    fn infer(&self, e: &Expr) -> Result<ValueType, QueryError> {
        Ok(match e {
            Expr::Column(c) => self.table.types[self.column_index(c)?],
            Expr::Literal(Literal::Null) => ValueType::Null,
            Expr::Literal(Literal::Int(_)) => ValueType::Integer,
            Expr::Literal(Literal::Real(_)) => ValueType::Real,
            Expr::Literal(Literal::Text(_)) => ValueType::Text,
            Expr::Neg(x) => self.numeric_operand(x, "unary -")?,
            Expr::Not(x) => {
                self.numeric_operand(x, "NOT")?;
                ValueType::Integer
            }
            Expr::Binary { op, left, right } => match op {
                BinOp::And | BinOp::Or => {
                    self.numeric_operand(left, op.symbol())?;
                    self.numeric_operand(right, op.symbol())?;
                    ValueType::Integer
                }
                BinOp::Eq | BinOp::NotEq | BinOp::Lt | BinOp::LtEq | BinOp::Gt | BinOp::GtEq => {
                    self.check_comparable(left, right)?;
                    ValueType::Integer
                }
                BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div => {
                    let ctx = format!("operator {}", op.symbol());
                    let (l, r) = (self.numeric_operand(left, &ctx)?, self.numeric_operand(right, &ctx)?);
                    if l == ValueType::Null || r == ValueType::Null {
                        ValueType::Null
                    } else if *op == BinOp::Div || l == ValueType::Real || r == ValueType::Real {
                        ValueType::Real
                    } else {
                        ValueType::Integer
                    }
                }
            },
            Expr::InList { expr, list, .. } => {
                for item in list {
                    self.check_comparable(expr, item)?;
                }
                ValueType::Integer
            }
            Expr::Between {
                expr, low, high, ..
            } => {
                self.check_comparable(expr, low)?;
                self.check_comparable(expr, high)?;
                ValueType::Integer
            }
            Expr::Like { expr, pattern, .. } => {
                for x in [expr, pattern] {
                    let t = self.infer(x)?;
                    if t.is_numeric() {
                        return Err(mismatch(format!("LIKE requires TEXT operands, got {x} ({t})")));
                    }
                }
                ValueType::Integer
            }
            Expr::IsNull { expr, .. } => {
                self.infer(expr)?;
                ValueType::Integer
            }
            Expr::Aggregate { func, arg, .. } => {
                let t = match arg {
                    Some(a) => self.infer(a)?,
                    None => ValueType::Integer,
                };
                match func {
                    AggFunc::Count => ValueType::Integer,
                    AggFunc::Min | AggFunc::Max => t,
                    AggFunc::Sum | AggFunc::Avg => {
                        if t == ValueType::Text {
                            return Err(mismatch(format!(
                                "{} requires a numeric argument, got TEXT",
                                func.name()
                            )));
                        }
                        match (func, t) {
                            (AggFunc::Avg, _) => ValueType::Real,
                            (_, t) => t,
                        }
                    }
                }
            }
        })
    }

    fn eval(&self, e: &Expr, scope: &dyn Scope) -> Result<Value, QueryError> {
        if let Some(v) = scope.bound(e) {
            return v;
        }
        Ok(match e {
            Expr::Column(c) => scope.column(self.column_index(c)?),
            Expr::Literal(l) => match l {
                Literal::Null => Value::Null,
                Literal::Int(i) => Value::Int(*i),
                Literal::Real(r) => Value::Real(*r),
                Literal::Text(s) => Value::Text(s.clone()),
            },
            Expr::Neg(x) => match self.eval(x, scope)? {
                Value::Null => Value::Null,
                Value::Int(i) => Value::Int(
                    i.checked_neg()
                        .ok_or_else(|| QueryError::IntegerOverflow("unary -".into()))?,
                ),
                Value::Real(r) => Value::Real(-r),
                Value::Text(_) => return Err(mismatch("unary - on TEXT".into())),
            },
            Expr::Not(x) => bool_value(truth(&self.eval(x, scope)?)?.map(|b| !b)),
            Expr::Binary { op, left, right } => {
                let l = self.eval(left, scope)?;
                match op {
                    BinOp::And => {
                        let a = truth(&l)?;
                        if a == Some(false) {
                            return Ok(Value::Int(0));
                        }
                        let b = truth(&self.eval(right, scope)?)?;
                        bool_value(match (a, b) {
                            (_, Some(false)) => Some(false),
                            (Some(true), Some(true)) => Some(true),
                            _ => None,
                        })
                    }
                    BinOp::Or => {
                        let a = truth(&l)?;
                        if a == Some(true) {
                            return Ok(Value::Int(1));
                        }
                        let b = truth(&self.eval(right, scope)?)?;
                        bool_value(match (a, b) {
                            (_, Some(true)) => Some(true),
                            (Some(false), Some(false)) => Some(false),
                            _ => None,
                        })
                    }
                    _ => {
                        let r = self.eval(right, scope)?;
                        binary(*op, &l, &r)?
                    }
                }
            }
            Expr::InList {
                expr,
                list,
                negated,
            } => {
                let v = self.eval(expr, scope)?;
                if v.is_null() {
                    return Ok(Value::Null);
                }
                let mut result = Some(false);
                for item in list {
                    match compare(&v, &self.eval(item, scope)?)? {
                        Some(Ordering::Equal) => {
                            result = Some(true);
                            break;
                        }
                        None => result = None,
                        Some(_) => {}
                    }
                }
                bool_value(result.map(|b| b != *negated))
            }
            Expr::Between {
                expr,
                low,
                high,
                negated,
            } => {
                let v = self.eval(expr, scope)?;
                let lo = compare(&v, &self.eval(low, scope)?)?.map(|o| o != Ordering::Less);
                let hi = compare(&v, &self.eval(high, scope)?)?.map(|o| o != Ordering::Greater);
                let inside = match (lo, hi) {
                    (Some(false), _) | (_, Some(false)) => Some(false),
                    (Some(true), Some(true)) => Some(true),
                    _ => None,
                };
                bool_value(inside.map(|b| b != *negated))
            }
            Expr::Like {
                expr,
                pattern,
                negated,
            } => {
                let v = self.eval(expr, scope)?;
                let p = self.eval(pattern, scope)?;
                match (&v, &p) {
                    (Value::Null, _) | (_, Value::Null) => Value::Null,
                    (Value::Text(s), Value::Text(p)) => bool_value(Some(like(s, p) != *negated)),
                    _ => return Err(mismatch("LIKE requires TEXT operands".into())),
                }
            }
            Expr::IsNull { expr, negated } => {
                bool_value(Some(self.eval(expr, scope)?.is_null() != *negated))
            }
            Expr::Aggregate { func, .. } => {
                return Err(QueryError::Invalid(format!("{} is not allowed here", func.name())))
            }
        })
    }

    fn aggregate(
        &self,
        func: AggFunc,
        arg: Option<&Expr>,
        distinct: bool,
        rows: &[usize],
    ) -> Result<Value, QueryError> {
        let Some(arg) = arg else {
            return Ok(Value::Int(rows.len() as i64));
        };
        let mut values = Vec::with_capacity(rows.len());
        let mut seen = HashSet::new();
        for &row in rows {
            let v = self.eval(arg, &RowScope { ctx: self, row })?;
            if v.is_null() || (distinct && !seen.insert(Key::of(&v))) {
                continue;
            }
            values.push(v);
        }
        Ok(match func {
            AggFunc::Count => Value::Int(values.len() as i64),
            AggFunc::Sum | AggFunc::Avg => {
                if values.is_empty() {
                    return Ok(Value::Null);
                }
                let mut acc = Sum::default();
                for v in &values {
                    acc.add(v)?;
                }
                if func == AggFunc::Avg {
                    Value::Real(acc.as_f64() / values.len() as f64)
                } else {
                    acc.finish()?
                }
            }
            AggFunc::Min | AggFunc::Max => {
                let mut best: Option<&Value> = None;
                for v in &values {
                    let better = match best {
                        None => true,
                        Some(b) => {
                            let o = sort_cmp(v, b);
                            if func == AggFunc::Min {
                                o == Ordering::Less
                            } else {
                                o == Ordering::Greater
                            }
                        }
                    };
                    if better {
                        best = Some(v);
                    }
                }
                best.cloned().unwrap_or(Value::Null)
            }
        })
    }
}

/// Running SUM/AVG state: an exact integer sum while every input is an
/// integer, alongside a plain left-to-right floating-point sum.
#[derive(Default)]
struct Sum {
    int: i64,
    overflowed: bool,
    approx: bool,
    real: f64,
}

impl Sum {
    fn add(&mut self, v: &Value) -> Result<(), QueryError> {
        match v {
            Value::Int(i) => {
                self.real += *i as f64;
                if !self.approx {
                    match self.int.checked_add(*i) {
                        Some(s) => self.int = s,
                        None => {
                            self.overflowed = true;
                            self.approx = true;
                        }
                    }
                }
            }
            Value::Real(r) => {
                self.real += r;
                self.approx = true;
            }
            Value::Text(_) => return Err(mismatch("SUM/AVG over TEXT".into())),
            Value::Null => {}
        }
        Ok(())
    }

    fn as_f64(&self) -> f64 {
        self.real
    }

    fn finish(&self) -> Result<Value, QueryError> {
        if self.overflowed {
            Err(QueryError::IntegerOverflow("SUM".into()))
        } else if self.approx {
            Ok(Value::Real(self.real))
        } else {
            Ok(Value::Int(self.int))
        }
    }
}

fn bool_value(b: Option<bool>) -> Value {
    match b {
        None => Value::Null,
        Some(b) => Value::Int(b as i64),
    }
}

fn truth(v: &Value) -> Result<Option<bool>, QueryError> {
    match v {
        Value::Null => Ok(None),
        Value::Int(i) => Ok(Some(*i != 0)),
        Value::Real(r) => Ok(Some(*r != 0.0)),
        Value::Text(_) => Err(mismatch("TEXT used as a boolean".into())),
    }
}

fn numeric_cmp(a: &Value, b: &Value) -> Ordering {
    match (a, b) {
        (Value::Int(x), Value::Int(y)) => x.cmp(y),
        (Value::Int(x), Value::Real(y)) => int_real_cmp(*x, *y),
        (Value::Real(x), Value::Int(y)) => int_real_cmp(*y, *x).reverse(),
        (Value::Real(x), Value::Real(y)) => x.partial_cmp(y).unwrap_or(Ordering::Equal),
        _ => unreachable!("numeric_cmp on non-numeric values"),
    }
}

fn int_real_cmp(i: i64, r: f64) -> Ordering {
    match (i as f64).partial_cmp(&r).unwrap_or(Ordering::Equal) {
        Ordering::Equal => (i as i128).cmp(&(r as i128)),
        o => o,
    }
}

/// SQL comparison; `None` when either side is NULL.
fn compare(a: &Value, b: &Value) -> Result<Option<Ordering>, QueryError> {
    Ok(match (a, b) {
        (Value::Null, _) | (_, Value::Null) => None,
        (Value::Text(x), Value::Text(y)) => Some(x.as_str().cmp(y.as_str())),
        (Value::Text(_), _) | (_, Value::Text(_)) => {
            return Err(mismatch(format!("cannot compare {a} with {b}")))
        }
        _ => Some(numeric_cmp(a, b)),
    })
}

/// Total order used by ORDER BY, MIN and MAX: NULL < numbers < text.
fn sort_cmp(a: &Value, b: &Value) -> Ordering {
    fn rank(v: &Value) -> u8 {
        match v {
            Value::Null => 0,
            Value::Int(_) | Value::Real(_) => 1,
            Value::Text(_) => 2,
        }
    }
    match (a, b) {
        (Value::Text(x), Value::Text(y)) => x.cmp(y),
        _ if rank(a) == 1 && rank(b) == 1 => numeric_cmp(a, b),
        _ => rank(a).cmp(&rank(b)),
    }
}

fn binary(op: BinOp, l: &Value, r: &Value) -> Result<Value, QueryError> {
    use BinOp::*;
    match op {
        Eq | NotEq | Lt | LtEq | Gt | GtEq => Ok(bool_value(compare(l, r)?.map(|o| match op {
            Eq => o == Ordering::Equal,
            NotEq => o != Ordering::Equal,
            Lt => o == Ordering::Less,
            LtEq => o != Ordering::Greater,
            Gt => o == Ordering::Greater,
            GtEq => o != Ordering::Less,
            _ => unreachable!(),
        }))),
        Add | Sub | Mul | Div => {
            if l.is_null() || r.is_null() {
                return Ok(Value::Null);
            }
            if matches!(l, Value::Text(_)) || matches!(r, Value::Text(_)) {
                return Err(mismatch(format!("operator {} on TEXT", op.symbol())));
            }
            if op == Div {
                let d = r.as_f64().unwrap();
                return Ok(if d == 0.0 {
                    Value::Null
                } else {
                    Value::Real(l.as_f64().unwrap() / d)
                });
            }
            if let (Value::Int(a), Value::Int(b)) = (l, r) {
                let v = match op {
                    Add => a.checked_add(*b),
                    Sub => a.checked_sub(*b),
                    _ => a.checked_mul(*b),
                };
                return v
                    .map(Value::Int)
                    .ok_or_else(|| QueryError::IntegerOverflow(format!("operator {}", op.symbol())));
            }
            let (a, b) = (l.as_f64().unwrap(), r.as_f64().unwrap());
            Ok(Value::Real(match op {
                Add => a + b,
                Sub => a - b,
                _ => a * b,
            }))
        }
        And | Or => unreachable!("logical operators are evaluated lazily"),
    }
}

/// Case-sensitive LIKE with `%` and `_` wildcards.
fn like(s: &str, pattern: &str) -> bool {
    let s: Vec<char> = s.chars().collect();
    let p: Vec<char> = pattern.chars().collect();
    let (mut si, mut pi) = (0, 0);
    let mut backtrack: Option<(usize, usize)> = None;
    while si < s.len() {
        if pi < p.len() && (p[pi] == '_' || (p[pi] != '%' && p[pi] == s[si])) {
            si += 1;
            pi += 1;
        } else if pi < p.len() && p[pi] == '%' {
            backtrack = Some((pi, si));
            pi += 1;
        } else if let Some((bp, bs)) = backtrack {
            pi = bp + 1;
            si = bs + 1;
            backtrack = Some((bp, bs + 1));
        } else {
            return false;
        }
    }
    p[pi..].iter().all(|&c| c == '%')
}

/// Hashable identity for grouping and DISTINCT; integral reals collapse
/// onto the equal integer.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Key {
    Null,
    Int(i64),
    Real(u64),
    Text(String),
}

impl Key {
    fn of(v: &Value) -> Key {
        match v {
            Value::Null => Key::Null,
            Value::Int(i) => Key::Int(*i),
            Value::Real(r) => {
                if r.fract() == 0.0 && r.abs() < 9.0e15 {
                    Key::Int(*r as i64)
                } else {
                    Key::Real(r.to_bits())
                }
            }
            Value::Text(s) => Key::Text(s.clone()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{classify_columns, load_csv};
    use crate::query::{describe_result, run_sql};

    fn ds(csv: &str) -> Dataset {
        classify_columns(&load_csv(csv.as_bytes(), "t").unwrap(), None).unwrap()
    }

    fn rows(csv: &str, sql: &str) -> Vec<Vec<Value>> {
        run_sql(sql, &ds(csv)).unwrap_or_else(|e| panic!("{sql}: {e}")).rows
    }

    #[test]
    fn count_star_on_three_rows() {
        assert_eq!(rows("a\n1\n2\n3\n", "SELECT COUNT(*) FROM t"), vec![vec![Value::Int(3)]]);
    }

    #[test]
    fn group_sum_order_by_position() {
        let got = rows(
            "Brand,Sale\nA,10\nB,5\nA,7\n",
            "SELECT Brand, SUM(Sale) FROM t GROUP BY Brand ORDER BY 2 DESC",
        );
        assert_eq!(
            got,
            vec![
                vec![Value::Text("A".into()), Value::Int(17)],
                vec![Value::Text("B".into()), Value::Int(5)],
            ]
        );
    }

    #[test]
    fn avg_skips_nulls() {
        assert_eq!(rows("x\n1\n\n3\n", "SELECT AVG(x) FROM t"), vec![vec![Value::Real(2.0)]]);
    }

    #[test]
    fn aggregate_on_empty_input_gives_one_row() {
        let got = rows("x\n1\n", "SELECT COUNT(*), SUM(x), MAX(x) FROM t WHERE x > 5");
        assert_eq!(got, vec![vec![Value::Int(0), Value::Null, Value::Null]]);
        assert!(rows("x\n1\n", "SELECT x, COUNT(*) FROM t WHERE x > 5 GROUP BY x").is_empty());
    }

    #[test]
    fn division_is_real_and_zero_yields_null() {
        let got = rows("a,b\n7,2\n1,0\n", "SELECT a / b FROM t");
        assert_eq!(got, vec![vec![Value::Real(3.5)], vec![Value::Null]]);
    }

    #[test]
    fn like_is_case_sensitive() {
        let csv = "s\nApple\napple\nmaple\n";
        assert_eq!(rows(csv, "SELECT s FROM t WHERE s LIKE 'A%'").len(), 1);
        assert_eq!(rows(csv, "SELECT s FROM t WHERE s LIKE '_pple'").len(), 2);
        assert_eq!(rows(csv, "SELECT s FROM t WHERE s NOT LIKE '%ple'").len(), 0);
        assert!(like("abc", "a%%c"));
        assert!(!like("abc", "a_"));
        assert!(like("", "%"));
    }

    #[test]
    fn text_number_comparison_is_exec_error() {
        let e = run_sql("SELECT s FROM t WHERE s > 1", &ds("s\nx\n")).unwrap_err();
        assert!(e.to_string().starts_with("exec: type mismatch"), "{e}");
        let e = run_sql("SELECT SUM(s) FROM t", &ds("s\nx\n")).unwrap_err();
        assert!(e.to_string().starts_with("exec: type mismatch"));
    }

    #[test]
    fn three_valued_logic() {
        let csv = "a,b\n1,\n,\n0,1\n";
        assert_eq!(rows(csv, "SELECT a FROM t WHERE b > 0 OR a = 1").len(), 2);
        assert_eq!(rows(csv, "SELECT a FROM t WHERE NOT (b > 0)").len(), 0);
        assert_eq!(rows(csv, "SELECT a FROM t WHERE a IN (0, NULL)").len(), 1);
        assert_eq!(rows(csv, "SELECT a FROM t WHERE a NOT IN (0, NULL)").len(), 0);
        assert_eq!(rows(csv, "SELECT a FROM t WHERE b IS NULL").len(), 2);
    }

    #[test]
    fn order_by_is_stable_with_nulls_first() {
        let csv = "k,v\n2,a\n1,b\n,c\n2,d\n1,e\n";
        let got: Vec<String> = rows(csv, "SELECT v FROM t ORDER BY k")
            .into_iter()
            .map(|r| r[0].to_string())
            .collect();
        assert_eq!(got, ["c", "b", "e", "a", "d"]);
        let got: Vec<String> = rows(csv, "SELECT v FROM t ORDER BY k DESC")
            .into_iter()
            .map(|r| r[0].to_string())
            .collect();
        assert_eq!(got, ["a", "d", "b", "e", "c"]);
    }

    #[test]
    fn distinct_limit_offset() {
        let csv = "a\n3\n1\n3\n2\n1\n";
        let got = rows(csv, "SELECT DISTINCT a FROM t ORDER BY a LIMIT 2 OFFSET 1");
        assert_eq!(got, vec![vec![Value::Int(2)], vec![Value::Int(3)]]);
    }

    #[test]
    fn sum_overflow_is_reported() {
        let csv = format!("a\n{}\n{}\n", i64::MAX, 1);
        let e = run_sql("SELECT SUM(a) FROM t", &ds(&csv)).unwrap_err();
        assert_eq!(e.to_string(), "exec: integer overflow in SUM");
        assert!(run_sql("SELECT AVG(a) FROM t", &ds(&csv)).is_ok());
    }

    #[test]
    fn result_types_and_names() {
        let rt = run_sql(
            "SELECT Brand, SUM(Sale) AS total, AVG(Sale), Sale * 1.5 AS x FROM t GROUP BY Brand, Sale",
            &ds("Brand,Sale\nA,1\n"),
        )
        .unwrap();
        let cols: Vec<(String, ValueType)> =
            rt.columns.iter().map(|c| (c.name.clone(), c.ty)).collect();
        assert_eq!(
            cols,
            vec![
                ("Brand".into(), ValueType::Text),
                ("total".into(), ValueType::Integer),
                ("AVG(Sale)".into(), ValueType::Real),
                ("x".into(), ValueType::Real),
            ]
        );
    }

    #[test]
    fn describe_formats() {
        let d = ds("a,b\nx,1\n");
        let empty = run_sql("SELECT a, b FROM t WHERE b > 9", &d).unwrap();
        assert_eq!(describe_result(&empty, 5), "columns: a (TEXT), b (INTEGER)\n0 rows\na,b");
        let one = run_sql("SELECT COUNT(*) AS n FROM t", &d).unwrap();
        assert_eq!(describe_result(&one, 5), "columns: n (INTEGER)\n1 row\nn\n1");

        let many = ds(&format!("v\n{}", (0..100).map(|i| format!("{i}\n")).collect::<String>()));
        let rt = run_sql("SELECT v FROM t", &many).unwrap();
        let text = describe_result(&rt, 5);
        assert!(text.starts_with("columns: v (INTEGER)\n100 rows\nv\n0\n1\n2\n3\n4\n"));
        assert!(text.ends_with("\n… 95 more"));
    }
}
