//! Lexer, parser and name resolver for SQL selects.

use std::collections::HashMap;

use crate::datamodel::{VarDecl, VarType};
use crate::relational::{SqlSchema, SqlType};

use super::{
    ColumnRef, FromClause, FromItem, FromSource, JoinClause, SelectItem, Side, SqlCmp, SqlError,
    SqlErrorKind, SqlExpr, SqlSelect,
};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i128),
    Str(String),
    Dot,
    Comma,
    LParen,
    RParen,
    Semi,
    Minus,
    Op(&'static str),
    Other(char),
    Eof,
}

const KEYWORDS: &[&str] = &[
    "SELECT", "FROM", "WHERE", "JOIN", "INNER", "ON", "AS", "AND", "OR", "NOT", "IS", "NULL",
    "TRUE", "FALSE", "CASE", "WHEN", "THEN", "ELSE", "END", "EXISTS",
];

const UNSUPPORTED: &[&str] = &[
    "GROUP",
    "BY",
    "HAVING",
    "ORDER",
    "LIMIT",
    "OFFSET",
    "UNION",
    "INTERSECT",
    "EXCEPT",
    "DISTINCT",
    "LEFT",
    "RIGHT",
    "FULL",
    "OUTER",
    "CROSS",
    "NATURAL",
    "USING",
    "IN",
    "LIKE",
    "BETWEEN",
    "ALL",
    "ANY",
    "SOME",
    "INSERT",
    "UPDATE",
    "DELETE",
    "WITH",
];

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

fn error(src: &str, offset: usize, kind: SqlErrorKind, msg: impl Into<String>) -> SqlError {
    let (line, col) = line_col(src, offset);
    SqlError {
        kind,
        msg: msg.into(),
        line,
        col,
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, SqlError> {
    let mut out = Vec::new();
    let mut pos = 0;
    loop {
        let rest = &src[pos..];
        let trimmed = rest.trim_start();
        pos += rest.len() - trimmed.len();
        if trimmed.starts_with("--") {
            pos += trimmed.find('\n').unwrap_or(trimmed.len());
            continue;
        }
        let start = pos;
        let Some(c) = trimmed.chars().next() else {
            out.push((Tok::Eof, start));
            return Ok(out);
        };
        let two: String = trimmed.chars().take(2).collect();
        let (tok, len) = match c {
            '.' => (Tok::Dot, 1),
            ',' => (Tok::Comma, 1),
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            ';' => (Tok::Semi, 1),
            '-' => (Tok::Minus, 1),
            '=' => (Tok::Op("="), 1),
            '<' if two == "<>" => (Tok::Op("<>"), 2),
            '!' if two == "!=" => (Tok::Op("<>"), 2),
            '<' if two == "<=" => (Tok::Op("<="), 2),
            '<' => (Tok::Op("<"), 1),
            '>' if two == ">=" => (Tok::Op(">="), 2),
            '>' => (Tok::Op(">"), 1),
            '\'' => {
                let mut s = String::new();
                let mut chars = src[start + 1..].char_indices().peekable();
                let end = loop {
                    match chars.next() {
                        Some((i, '\'')) => {
                            if let Some((_, '\'')) = chars.peek() {
                                chars.next();
                                s.push('\'');
                            } else {
                                break i;
                            }
                        }
                        Some((_, c)) => s.push(c),
                        None => {
                            return Err(error(
                                src,
                                start,
                                SqlErrorKind::Syntax,
                                "unterminated string literal",
                            ))
                        }
                    }
                };
                (Tok::Str(s), end + 2)
            }
            c if c.is_ascii_digit() => {
                let len = trimmed
                    .find(|c: char| !c.is_ascii_digit())
                    .unwrap_or(trimmed.len());
                let n = trimmed[..len].parse::<i128>().map_err(|_| {
                    error(
                        src,
                        start,
                        SqlErrorKind::Syntax,
                        "integer literal too large",
                    )
                })?;
                (Tok::Int(n), len)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let len = trimmed
                    .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
                    .unwrap_or(trimmed.len());
                (Tok::Ident(trimmed[..len].to_string()), len)
            }
            c => (Tok::Other(c), c.len_utf8()),
        };
        out.push((tok, start));
        pos += len;
    }
}

// Syntax tree before name resolution.

#[derive(Debug, Clone)]
enum RawKind {
    Bool(bool),
    Null,
    Int(i64),
    Str(String),
    Name(Option<String>, String),
    Not(Box<RawExpr>),
    And(Box<RawExpr>, Box<RawExpr>),
    Or(Box<RawExpr>, Box<RawExpr>),
    Cmp(SqlCmp, Box<RawExpr>, Box<RawExpr>),
    Case(Box<RawExpr>, Box<RawExpr>, Box<RawExpr>),
    IsNull(Box<RawExpr>),
    Exists(Box<RawSelect>),
    Scalar(Box<RawSelect>),
}

#[derive(Debug, Clone)]
struct RawExpr {
    kind: RawKind,
    pos: usize,
}

#[derive(Debug, Clone)]
enum RawSource {
    Table(String),
    Subselect(Box<RawSelect>),
}

#[derive(Debug, Clone)]
struct RawFrom {
    source: RawSource,
    alias: Option<String>,
    pos: usize,
}

/// A joined item and its optional ON condition.
type RawJoin = (RawFrom, Option<RawExpr>);

#[derive(Debug, Clone)]
struct RawSelect {
    items: Vec<(RawExpr, Option<String>)>,
    from: Option<(RawFrom, Option<RawJoin>)>,
    filter: Option<RawExpr>,
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<(Tok, usize)>,
    i: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn pos(&self) -> usize {
        self.toks[self.i].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].0.clone();
        if t != Tok::Eof {
            self.i += 1;
        }
        t
    }

    fn err(&self, kind: SqlErrorKind, msg: impl Into<String>) -> SqlError {
        error(self.src, self.pos(), kind, msg)
    }

    fn describe(t: &Tok) -> String {
        match t {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(i) => format!("`{i}`"),
            Tok::Str(s) => format!("'{s}'"),
            Tok::Dot => "`.`".into(),
            Tok::Comma => "`,`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Op(o) => format!("`{o}`"),
            Tok::Other(c) => format!("`{c}`"),
            Tok::Eof => "end of input".into(),
        }
    }

    fn unexpected(&self, wanted: &str) -> SqlError {
        let t = self.peek();
        if let Tok::Ident(s) = t {
            if UNSUPPORTED.contains(&s.to_ascii_uppercase().as_str()) {
                return self.err(
                    SqlErrorKind::Unsupported,
                    format!("`{}` is not supported", s.to_ascii_uppercase()),
                );
            }
        }
        if let Tok::Other(c @ ('*' | '+' | '/' | '%')) = t {
            return self.err(
                SqlErrorKind::Unsupported,
                format!("operator `{c}` is not supported"),
            );
        }
        self.err(
            SqlErrorKind::Syntax,
            format!("expected {wanted}, found {}", Self::describe(t)),
        )
    }

    fn at_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s.eq_ignore_ascii_case(kw))
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.at_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), SqlError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    fn expect(&mut self, t: Tok) -> Result<(), SqlError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&Self::describe(&t)))
        }
    }

    fn ident(&mut self) -> Result<String, SqlError> {
        match self.peek() {
            Tok::Ident(s) if !is_reserved(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected("an identifier")),
        }
    }

    fn select(&mut self) -> Result<RawSelect, SqlError> {
        self.expect_kw("SELECT")?;
        let mut items = Vec::new();
        loop {
            let e = self.expr()?;
            let alias = if self.eat_kw("AS") {
                Some(self.ident()?)
            } else {
                None
            };
            items.push((e, alias));
            if *self.peek() != Tok::Comma {
                break;
            }
            self.bump();
        }
        let from = if self.eat_kw("FROM") {
            let first = self.source_item()?;
            let join = if self.at_kw("JOIN") || self.at_kw("INNER") {
                if self.eat_kw("INNER") {
                    self.expect_kw("JOIN")?;
                } else {
                    self.bump();
                }
                let item = self.source_item()?;
                let on = if self.eat_kw("ON") {
                    Some(self.expr()?)
                } else {
                    None
                };
                Some((item, on))
            } else {
                None
            };
            Some((first, join))
        } else {
            None
        };
        let filter = if self.eat_kw("WHERE") {
            Some(self.expr()?)
        } else {
            None
        };
        Ok(RawSelect {
            items,
            from,
            filter,
        })
    }

    fn source_item(&mut self) -> Result<RawFrom, SqlError> {
        let pos = self.pos();
        let source = if *self.peek() == Tok::LParen {
            self.bump();
            let s = self.select()?;
            self.expect(Tok::RParen)?;
            RawSource::Subselect(Box::new(s))
        } else {
            RawSource::Table(self.ident()?)
        };
        let named = self.eat_kw("AS") || matches!(self.peek(), Tok::Ident(s) if !is_reserved(s));
        let alias = if named { Some(self.ident()?) } else { None };
        Ok(RawFrom { source, alias, pos })
    }

    fn expr(&mut self) -> Result<RawExpr, SqlError> {
        let mut lhs = self.and()?;
        while self.at_kw("OR") {
            let pos = self.pos();
            self.bump();
            let rhs = self.and()?;
            lhs = RawExpr {
                kind: RawKind::Or(Box::new(lhs), Box::new(rhs)),
                pos,
            };
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<RawExpr, SqlError> {
        let mut lhs = self.not()?;
        while self.at_kw("AND") {
            let pos = self.pos();
            self.bump();
            let rhs = self.not()?;
            lhs = RawExpr {
                kind: RawKind::And(Box::new(lhs), Box::new(rhs)),
                pos,
            };
        }
        Ok(lhs)
    }

    fn not(&mut self) -> Result<RawExpr, SqlError> {
        let pos = self.pos();
        if self.eat_kw("NOT") {
            let e = self.not()?;
            return Ok(RawExpr {
                kind: RawKind::Not(Box::new(e)),
                pos,
            });
        }
        self.cmp()
    }

    fn cmp(&mut self) -> Result<RawExpr, SqlError> {
        let lhs = self.is_null()?;
        let op = match self.peek() {
            Tok::Op("=") => SqlCmp::Eq,
            Tok::Op("<>") => SqlCmp::Neq,
            Tok::Op("<") => SqlCmp::Lt,
            Tok::Op("<=") => SqlCmp::Le,
            Tok::Op(">") => SqlCmp::Gt,
            Tok::Op(">=") => SqlCmp::Ge,
            _ => return Ok(lhs),
        };
        let pos = self.pos();
        self.bump();
        let rhs = self.is_null()?;
        if matches!(self.peek(), Tok::Op(_)) {
            return Err(self.err(
                SqlErrorKind::Syntax,
                "comparisons do not chain; add parentheses",
            ));
        }
        Ok(RawExpr {
            kind: RawKind::Cmp(op, Box::new(lhs), Box::new(rhs)),
            pos,
        })
    }

    fn is_null(&mut self) -> Result<RawExpr, SqlError> {
        let mut e = self.primary()?;
        while self.at_kw("IS") {
            let pos = self.pos();
            self.bump();
            let negated = self.eat_kw("NOT");
            self.expect_kw("NULL")?;
            e = RawExpr {
                kind: RawKind::IsNull(Box::new(e)),
                pos,
            };
            if negated {
                e = RawExpr {
                    kind: RawKind::Not(Box::new(e)),
                    pos,
                };
            }
        }
        Ok(e)
    }

    fn int(&self, n: i128, negative: bool) -> Result<i64, SqlError> {
        let v = if negative { -n } else { n };
        i64::try_from(v).map_err(|_| self.err(SqlErrorKind::Syntax, "integer literal out of range"))
    }

    fn primary(&mut self) -> Result<RawExpr, SqlError> {
        let pos = self.pos();
        let kind = match self.peek().clone() {
            Tok::Int(n) => {
                let v = self.int(n, false)?;
                self.bump();
                RawKind::Int(v)
            }
            Tok::Minus => {
                self.bump();
                match self.peek().clone() {
                    Tok::Int(n) => {
                        let v = self.int(n, true)?;
                        self.bump();
                        RawKind::Int(v)
                    }
                    _ => {
                        return Err(self.err(
                            SqlErrorKind::Unsupported,
                            "unary minus is only supported on integer literals",
                        ))
                    }
                }
            }
            Tok::Str(s) => {
                self.bump();
                RawKind::Str(s)
            }
            Tok::LParen => {
                self.bump();
                let kind = if self.at_kw("SELECT") {
                    RawKind::Scalar(Box::new(self.select()?))
                } else {
                    self.expr()?.kind
                };
                self.expect(Tok::RParen)?;
                kind
            }
            Tok::Ident(s) => {
                let up = s.to_ascii_uppercase();
                match up.as_str() {
                    "TRUE" => {
                        self.bump();
                        RawKind::Bool(true)
                    }
                    "FALSE" => {
                        self.bump();
                        RawKind::Bool(false)
                    }
                    "NULL" => {
                        self.bump();
                        RawKind::Null
                    }
                    "EXISTS" => {
                        self.bump();
                        self.expect(Tok::LParen)?;
                        let s = self.select()?;
                        self.expect(Tok::RParen)?;
                        RawKind::Exists(Box::new(s))
                    }
                    "CASE" => {
                        self.bump();
                        self.expect_kw("WHEN")?;
                        let when = self.expr()?;
                        self.expect_kw("THEN")?;
                        let then = self.expr()?;
                        if self.at_kw("WHEN") {
                            return Err(self.err(
                                SqlErrorKind::Unsupported,
                                "CASE with several WHEN branches; nest CASE expressions instead",
                            ));
                        }
                        self.expect_kw("ELSE")?;
                        let otherwise = self.expr()?;
                        self.expect_kw("END")?;
                        RawKind::Case(Box::new(when), Box::new(then), Box::new(otherwise))
                    }
                    _ if is_reserved(&s) => return Err(self.unexpected("an expression")),
                    _ => {
                        self.bump();
                        if *self.peek() == Tok::LParen {
                            return Err(error(
                                self.src,
                                pos,
                                SqlErrorKind::Unsupported,
                                format!("function `{s}` is not supported"),
                            ));
                        }
                        if *self.peek() == Tok::Dot {
                            self.bump();
                            let col = self.ident()?;
                            RawKind::Name(Some(s), col)
                        } else {
                            RawKind::Name(None, s)
                        }
                    }
                }
            }
            _ => return Err(self.unexpected("an expression")),
        };
        Ok(RawExpr { kind, pos })
    }
}

fn is_reserved(s: &str) -> bool {
    let up = s.to_ascii_uppercase();
    KEYWORDS.contains(&up.as_str()) || UNSUPPORTED.contains(&up.as_str())
}

// Name resolution and typing.

/// Columns visible through one from-item.
struct Source {
    qualifier: Option<String>,
    columns: Vec<(Option<String>, SqlType)>,
}

#[derive(Default)]
struct Scope {
    sources: Vec<Source>,
}

impl Scope {
    fn mentions(&self, qualifier: Option<&str>, name: &str) -> bool {
        self.sources.iter().any(|s| {
            qualifier.is_none_or(|q| s.qualifier.as_deref() == Some(q))
                && s.columns.iter().any(|(c, _)| c.as_deref() == Some(name))
        })
    }
}

struct Checker<'a> {
    src: &'a str,
    schema: &'a SqlSchema,
    vars: HashMap<&'a str, SqlType>,
    outer: Vec<Scope>,
}

pub(crate) fn var_sql_type(ty: &VarType) -> SqlType {
    match ty {
        VarType::Integer => SqlType::Int,
        VarType::String => SqlType::Varchar,
        VarType::Boolean => SqlType::Bool,
        VarType::Class(_) => SqlType::Id,
    }
}

impl<'a> Checker<'a> {
    fn err(&self, pos: usize, kind: SqlErrorKind, msg: impl Into<String>) -> SqlError {
        error(self.src, pos, kind, msg)
    }

    fn select(&mut self, s: &RawSelect) -> Result<(SqlSelect, Scope), SqlError> {
        let mut scope = Scope::default();
        let mut resolved = None;
        if let Some((first, join)) = &s.from {
            let (item, src) = self.source_item(first)?;
            scope.sources.push(src);
            let join = match join {
                None => None,
                Some((j, on)) => {
                    let (jitem, src) = self.source_item(j)?;
                    if src.qualifier.is_some() && src.qualifier == scope.sources[0].qualifier {
                        return Err(self.err(
                            j.pos,
                            SqlErrorKind::Ambiguous,
                            format!(
                                "`{}` names both joined items; add an alias",
                                src.qualifier.as_deref().unwrap_or_default()
                            ),
                        ));
                    }
                    scope.sources.push(src);
                    Some((jitem, on))
                }
            };
            resolved = Some((item, join));
        }
        let from = match resolved {
            None => None,
            Some((item, join)) => {
                let join = match join {
                    None => None,
                    Some((jitem, on)) => Some(JoinClause {
                        item: jitem,
                        on: on.as_ref().map(|e| self.condition(e, &scope)).transpose()?,
                    }),
                };
                Some(FromClause { item, join })
            }
        };
        let filter = match &s.filter {
            Some(e) => Some(self.condition(e, &scope)?),
            None => None,
        };
        let mut items = Vec::new();
        for (e, alias) in &s.items {
            items.push(SelectItem {
                expr: self.expr(e, &scope, None)?,
                alias: alias.clone(),
            });
        }
        let sel = SqlSelect {
            items,
            from,
            filter,
        };
        let out = Scope {
            sources: vec![Source {
                qualifier: None,
                columns: sel
                    .items
                    .iter()
                    .map(|it| (it.output_name().map(str::to_string), it.expr.ty()))
                    .collect(),
            }],
        };
        Ok((sel, out))
    }

    fn source_item(&mut self, f: &RawFrom) -> Result<(FromItem, Source), SqlError> {
        match &f.source {
            RawSource::Table(t) => {
                let table = self.schema.table(t).ok_or_else(|| {
                    self.err(f.pos, SqlErrorKind::Unknown, format!("unknown table `{t}`"))
                })?;
                let src = Source {
                    qualifier: Some(f.alias.clone().unwrap_or_else(|| t.clone())),
                    columns: table
                        .columns
                        .iter()
                        .map(|c| (Some(c.name.clone()), c.ty))
                        .collect(),
                };
                Ok((
                    FromItem {
                        source: FromSource::Table(t.clone()),
                        alias: f.alias.clone(),
                    },
                    src,
                ))
            }
            RawSource::Subselect(s) => {
                let (sel, out) = self.select(s)?;
                let mut src = out.sources.into_iter().next().expect("one output source");
                src.qualifier = f.alias.clone();
                Ok((
                    FromItem {
                        source: FromSource::Subselect(Box::new(sel)),
                        alias: f.alias.clone(),
                    },
                    src,
                ))
            }
        }
    }

    fn subselect(&mut self, s: &RawSelect, scope: &Scope) -> Result<SqlSelect, SqlError> {
        // Only names are needed to report correlation, so a shallow copy of
        // the enclosing scope is pushed.
        self.outer.push(Scope {
            sources: scope
                .sources
                .iter()
                .map(|s| Source {
                    qualifier: s.qualifier.clone(),
                    columns: s.columns.clone(),
                })
                .collect(),
        });
        let r = self.select(s);
        self.outer.pop();
        Ok(r?.0)
    }

    fn condition(&mut self, e: &RawExpr, scope: &Scope) -> Result<SqlExpr, SqlError> {
        let c = self.expr(e, scope, Some(SqlType::Bool))?;
        if c.ty() != SqlType::Bool {
            return Err(self.err(
                e.pos,
                SqlErrorKind::Type,
                format!("condition must be boolean, found {}", c.ty()),
            ));
        }
        Ok(c)
    }

    fn boolean(&mut self, e: &RawExpr, scope: &Scope, what: &str) -> Result<SqlExpr, SqlError> {
        let c = self.expr(e, scope, Some(SqlType::Bool))?;
        if c.ty() != SqlType::Bool {
            return Err(self.err(
                e.pos,
                SqlErrorKind::Type,
                format!("operand of {what} must be boolean, found {}", c.ty()),
            ));
        }
        Ok(c)
    }

    /// Checks `a` and `b` against each other, letting a bare `NULL` take
    /// the type of the other side.
    fn pair(
        &mut self,
        a: &RawExpr,
        b: &RawExpr,
        scope: &Scope,
        default: SqlType,
    ) -> Result<(SqlExpr, SqlExpr), SqlError> {
        let (x, y) = if matches!(a.kind, RawKind::Null) && !matches!(b.kind, RawKind::Null) {
            let y = self.expr(b, scope, None)?;
            (self.expr(a, scope, Some(y.ty()))?, y)
        } else {
            let x = self.expr(a, scope, Some(default))?;
            let hint = x.ty();
            (x, self.expr(b, scope, Some(hint))?)
        };
        if x.ty() != y.ty() {
            return Err(self.err(
                b.pos,
                SqlErrorKind::Type,
                format!("cannot combine {} with {}", x.ty(), y.ty()),
            ));
        }
        Ok((x, y))
    }

    fn expr(
        &mut self,
        e: &RawExpr,
        scope: &Scope,
        hint: Option<SqlType>,
    ) -> Result<SqlExpr, SqlError> {
        Ok(match &e.kind {
            RawKind::Bool(b) => SqlExpr::Bool(*b),
            RawKind::Null => SqlExpr::Null(hint.unwrap_or(SqlType::Bool)),
            RawKind::Int(i) => SqlExpr::Int(*i),
            RawKind::Str(s) => SqlExpr::Str(s.clone()),
            RawKind::Name(q, n) => self.name(e.pos, q.as_deref(), n, scope)?,
            RawKind::Not(a) => SqlExpr::Not(Box::new(self.boolean(a, scope, "NOT")?)),
            RawKind::And(a, b) => SqlExpr::And(
                Box::new(self.boolean(a, scope, "AND")?),
                Box::new(self.boolean(b, scope, "AND")?),
            ),
            RawKind::Or(a, b) => SqlExpr::Or(
                Box::new(self.boolean(a, scope, "OR")?),
                Box::new(self.boolean(b, scope, "OR")?),
            ),
            RawKind::Cmp(op, a, b) => {
                let (x, y) = self.pair(a, b, scope, SqlType::Int)?;
                if op.is_ordering() && x.ty() != SqlType::Int {
                    return Err(self.err(
                        e.pos,
                        SqlErrorKind::Type,
                        format!("`{}` needs int operands, found {}", op.symbol(), x.ty()),
                    ));
                }
                SqlExpr::Cmp(*op, Box::new(x), Box::new(y))
            }
            RawKind::Case(w, t, o) => {
                let when = self.boolean(w, scope, "CASE WHEN")?;
                let (then, otherwise) = self.pair(t, o, scope, hint.unwrap_or(SqlType::Bool))?;
                SqlExpr::Case {
                    when: Box::new(when),
                    then: Box::new(then),
                    otherwise: Box::new(otherwise),
                }
            }
            RawKind::IsNull(a) => SqlExpr::IsNull(Box::new(self.expr(a, scope, None)?)),
            RawKind::Exists(s) => SqlExpr::Exists(Box::new(self.subselect(s, scope)?)),
            RawKind::Scalar(s) => {
                let sel = self.subselect(s, scope)?;
                if sel.items.len() != 1 {
                    return Err(self.err(
                        e.pos,
                        SqlErrorKind::Type,
                        "a subselect used as a value must select exactly one item",
                    ));
                }
                SqlExpr::Scalar(Box::new(sel))
            }
        })
    }

    fn name(
        &self,
        pos: usize,
        q: Option<&str>,
        n: &str,
        scope: &Scope,
    ) -> Result<SqlExpr, SqlError> {
        let mut found = Vec::new();
        for (k, src) in scope.sources.iter().enumerate() {
            if q.is_some() && src.qualifier.as_deref() != q {
                continue;
            }
            for (i, (c, ty)) in src.columns.iter().enumerate() {
                if c.as_deref() == Some(n) {
                    found.push((k, i, *ty));
                }
            }
        }
        let shown = match q {
            Some(q) => format!("{q}.{n}"),
            None => n.to_string(),
        };
        match found.as_slice() {
            [(k, i, ty)] => {
                return Ok(SqlExpr::Column(ColumnRef {
                    qualifier: q.map(str::to_string),
                    name: n.to_string(),
                    side: if *k == 0 { Side::From } else { Side::Join },
                    index: *i,
                    ty: *ty,
                }))
            }
            [] => {}
            _ => {
                return Err(self.err(
                    pos,
                    SqlErrorKind::Ambiguous,
                    format!("column `{shown}` is ambiguous"),
                ))
            }
        }
        if q.is_none() {
            if let Some(ty) = self.vars.get(n) {
                return Ok(SqlExpr::Var(n.to_string(), *ty));
            }
        }
        if self.outer.iter().any(|s| s.mentions(q, n)) {
            return Err(self.err(
                pos,
                SqlErrorKind::Correlated,
                format!("`{shown}` refers to an enclosing select; correlated subqueries are not supported"),
            ));
        }
        if let Some(q) = q {
            if !scope
                .sources
                .iter()
                .any(|s| s.qualifier.as_deref() == Some(q))
            {
                return Err(self.err(
                    pos,
                    SqlErrorKind::Unknown,
                    format!("unknown table or alias `{q}`"),
                ));
            }
        }
        Err(self.err(
            pos,
            SqlErrorKind::Unknown,
            format!("unknown column or variable `{shown}`"),
        ))
    }
}

/// Parses and resolves a select against `schema`. Names that are not
/// columns of the select's from-items resolve to the declared variables.
pub fn parse_select(
    text: &str,
    schema: &SqlSchema,
    vars: &[VarDecl],
) -> Result<SqlSelect, SqlError> {
    let mut p = Parser {
        src: text,
        toks: lex(text)?,
        i: 0,
    };
    let raw = p.select()?;
    if *p.peek() == Tok::Semi {
        p.bump();
    }
    if *p.peek() != Tok::Eof {
        return Err(p.unexpected("end of input"));
    }
    let mut c = Checker {
        src: text,
        schema,
        vars: vars
            .iter()
            .map(|v| (v.name.as_str(), var_sql_type(&v.ty)))
            .collect(),
        outer: Vec::new(),
    };
    Ok(c.select(&raw)?.0)
}
