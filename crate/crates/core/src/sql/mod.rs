//! The supported SQL subset: typed AST, parser and three-valued executor.
//!
//! Selects have at most one join, no grouping and no correlated
//! subqueries. Column references are resolved at parse time against the
//! relational schema of a data model.

mod exec;
mod parser;

use std::fmt;

use thiserror::Error;

pub use crate::relational::{SqlType, SqlValue};
pub use exec::{exec_sql, ExecError, ResultTable};
pub use parser::parse_select;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SqlCmp {
    Eq,
    Neq,
    Lt,
    Le,
    Gt,
    Ge,
}

impl SqlCmp {
    pub fn symbol(self) -> &'static str {
        match self {
            SqlCmp::Eq => "=",
            SqlCmp::Neq => "<>",
            SqlCmp::Lt => "<",
            SqlCmp::Le => "<=",
            SqlCmp::Gt => ">",
            SqlCmp::Ge => ">=",
        }
    }

    pub fn is_ordering(self) -> bool {
        !matches!(self, SqlCmp::Eq | SqlCmp::Neq)
    }
}

/// Which from-item of the enclosing select a column comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    From,
    Join,
}

/// A resolved column reference. `qualifier` and `name` are kept as written.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ColumnRef {
    pub qualifier: Option<String>,
    pub name: String,
    pub side: Side,
    /// Position of the column in its from-item.
    pub index: usize,
    pub ty: SqlType,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SqlExpr {
    Bool(bool),
    /// `NULL`, typed by its context.
    Null(SqlType),
    Int(i64),
    Str(String),
    Var(String, SqlType),
    Column(ColumnRef),
    Not(Box<SqlExpr>),
    And(Box<SqlExpr>, Box<SqlExpr>),
    Or(Box<SqlExpr>, Box<SqlExpr>),
    Cmp(SqlCmp, Box<SqlExpr>, Box<SqlExpr>),
    Case {
        when: Box<SqlExpr>,
        then: Box<SqlExpr>,
        otherwise: Box<SqlExpr>,
    },
    IsNull(Box<SqlExpr>),
    Exists(Box<SqlSelect>),
    /// A subselect used as a value; it must yield exactly one row.
    Scalar(Box<SqlSelect>),
}

impl SqlExpr {
    pub fn ty(&self) -> SqlType {
        match self {
            SqlExpr::Bool(_)
            | SqlExpr::Not(_)
            | SqlExpr::And(..)
            | SqlExpr::Or(..)
            | SqlExpr::Cmp(..)
            | SqlExpr::IsNull(_)
            | SqlExpr::Exists(_) => SqlType::Bool,
            SqlExpr::Null(t) | SqlExpr::Var(_, t) => *t,
            SqlExpr::Int(_) => SqlType::Int,
            SqlExpr::Str(_) => SqlType::Varchar,
            SqlExpr::Column(c) => c.ty,
            SqlExpr::Case { then, .. } => then.ty(),
            SqlExpr::Scalar(s) => s.items[0].expr.ty(),
        }
    }

    /// Direct subexpressions, not descending into subselects.
    pub fn children(&self) -> Vec<&SqlExpr> {
        match self {
            SqlExpr::Not(a) | SqlExpr::IsNull(a) => vec![a],
            SqlExpr::And(a, b) | SqlExpr::Or(a, b) | SqlExpr::Cmp(_, a, b) => vec![a, b],
            SqlExpr::Case {
                when,
                then,
                otherwise,
            } => vec![when, then, otherwise],
            _ => vec![],
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            SqlExpr::Or(..) => 1,
            SqlExpr::And(..) => 2,
            SqlExpr::Not(_) => 3,
            SqlExpr::Cmp(..) => 4,
            SqlExpr::IsNull(_) => 5,
            SqlExpr::Int(i) if *i < 0 => 5,
            _ => 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SelectItem {
    pub expr: SqlExpr,
    pub alias: Option<String>,
}

impl SelectItem {
    /// The name under which an enclosing select can refer to this item.
    pub fn output_name(&self) -> Option<&str> {
        match (&self.alias, &self.expr) {
            (Some(a), _) => Some(a),
            (None, SqlExpr::Column(c)) => Some(&c.name),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FromSource {
    Table(String),
    Subselect(Box<SqlSelect>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FromItem {
    pub source: FromSource,
    pub alias: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct JoinClause {
    pub item: FromItem,
    pub on: Option<SqlExpr>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FromClause {
    pub item: FromItem,
    pub join: Option<JoinClause>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SqlSelect {
    pub items: Vec<SelectItem>,
    pub from: Option<FromClause>,
    pub filter: Option<SqlExpr>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqlErrorKind {
    Syntax,
    Type,
    Unknown,
    Ambiguous,
    Correlated,
    Unsupported,
}

impl fmt::Display for SqlErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SqlErrorKind::Syntax => "syntax",
            SqlErrorKind::Type => "type",
            SqlErrorKind::Unknown => "name",
            SqlErrorKind::Ambiguous => "ambiguity",
            SqlErrorKind::Correlated => "correlation",
            SqlErrorKind::Unsupported => "unsupported-construct",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("SQL {kind} error at line {line}, column {col}: {msg}")]
pub struct SqlError {
    pub kind: SqlErrorKind,
    pub msg: String,
    pub line: usize,
    pub col: usize,
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &SqlExpr, min: u8) -> fmt::Result {
    let paren = e.precedence() < min;
    if paren {
        f.write_str("(")?;
    }
    match e {
        SqlExpr::Bool(true) => f.write_str("TRUE")?,
        SqlExpr::Bool(false) => f.write_str("FALSE")?,
        SqlExpr::Null(_) => f.write_str("NULL")?,
        SqlExpr::Int(i) => write!(f, "{i}")?,
        SqlExpr::Str(s) => write!(f, "'{}'", s.replace('\'', "''"))?,
        SqlExpr::Var(v, _) => f.write_str(v)?,
        SqlExpr::Column(c) => match &c.qualifier {
            Some(q) => write!(f, "{q}.{}", c.name)?,
            None => f.write_str(&c.name)?,
        },
        SqlExpr::Not(a) => {
            f.write_str("NOT ")?;
            write_expr(f, a, 3)?;
        }
        SqlExpr::And(a, b) => {
            write_expr(f, a, 2)?;
            f.write_str(" AND ")?;
            write_expr(f, b, 3)?;
        }
        SqlExpr::Or(a, b) => {
            write_expr(f, a, 1)?;
            f.write_str(" OR ")?;
            write_expr(f, b, 2)?;
        }
        SqlExpr::Cmp(op, a, b) => {
            write_expr(f, a, 5)?;
            write!(f, " {} ", op.symbol())?;
            write_expr(f, b, 5)?;
        }
        SqlExpr::Case {
            when,
            then,
            otherwise,
        } => {
            f.write_str("CASE WHEN ")?;
            write_expr(f, when, 0)?;
            f.write_str(" THEN ")?;
            write_expr(f, then, 0)?;
            f.write_str(" ELSE ")?;
            write_expr(f, otherwise, 0)?;
            f.write_str(" END")?;
        }
        SqlExpr::IsNull(a) => {
            write_expr(f, a, 6)?;
            f.write_str(" IS NULL")?;
        }
        SqlExpr::Exists(s) => write!(f, "EXISTS ({s})")?,
        SqlExpr::Scalar(s) => write!(f, "({s})")?,
    }
    if paren {
        f.write_str(")")?;
    }
    Ok(())
}

impl fmt::Display for SqlExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self, 0)
    }
}

impl fmt::Display for FromItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.source {
            FromSource::Table(t) => f.write_str(t)?,
            FromSource::Subselect(s) => write!(f, "({s})")?,
        }
        if let Some(a) = &self.alias {
            write!(f, " AS {a}")?;
        }
        Ok(())
    }
}

impl fmt::Display for SqlSelect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SELECT ")?;
        for (i, it) in self.items.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}", it.expr)?;
            if let Some(a) = &it.alias {
                write!(f, " AS {a}")?;
            }
        }
        if let Some(from) = &self.from {
            write!(f, " FROM {}", from.item)?;
            if let Some(j) = &from.join {
                write!(f, " JOIN {}", j.item)?;
                if let Some(on) = &j.on {
                    write!(f, " ON {on}")?;
                }
            }
        }
        if let Some(w) = &self.filter {
            write!(f, " WHERE {w}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
pub(crate) mod tests;
