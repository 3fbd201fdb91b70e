//! Direct three-valued execution of selects over an in-memory database.

use std::cmp::Ordering;

use thiserror::Error;

use crate::relational::{DatabaseInstance, SqlAssignment, SqlValue};

use super::{FromItem, FromSource, Side, SqlCmp, SqlExpr, SqlSelect};

/// Column labels and rows of a select result. Row `i` has index `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultTable {
    pub columns: Vec<Option<String>>,
    pub rows: Vec<Vec<SqlValue>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExecError {
    #[error("subselect `{select}` used as a value returned {rows} rows")]
    ScalarSubselect { select: String, rows: usize },
    #[error("variable `{0}` is not assigned")]
    Unassigned(String),
}

struct Row<'a> {
    from: &'a [SqlValue],
    join: &'a [SqlValue],
}

struct Exec<'a> {
    db: &'a DatabaseInstance,
    env: &'a SqlAssignment,
}

fn truth(v: &SqlValue) -> Option<bool> {
    match v {
        SqlValue::Bool(b) => Some(*b),
        _ => None,
    }
}

fn of_truth(t: Option<bool>) -> SqlValue {
    t.map_or(SqlValue::Null, SqlValue::Bool)
}

impl<'a> Exec<'a> {
    fn rows_of(&self, f: &FromItem) -> Result<Vec<Vec<SqlValue>>, ExecError> {
        match &f.source {
            FromSource::Table(t) => Ok(self.db.rows(t).to_vec()),
            FromSource::Subselect(s) => Ok(self.select(s)?.rows),
        }
    }

    fn select(&self, s: &SqlSelect) -> Result<ResultTable, ExecError> {
        let columns = s
            .items
            .iter()
            .map(|it| it.output_name().map(str::to_string))
            .collect();
        let empty: Vec<SqlValue> = Vec::new();
        let mut rows = Vec::new();
        let mut emit = |row: &Row<'_>| -> Result<(), ExecError> {
            if let Some(w) = &s.filter {
                if truth(&self.expr(w, row)?) != Some(true) {
                    return Ok(());
                }
            }
            let out = s
                .items
                .iter()
                .map(|it| self.expr(&it.expr, row))
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(out);
            Ok(())
        };
        match &s.from {
            None => emit(&Row {
                from: &empty,
                join: &empty,
            })?,
            Some(from) => {
                let left = self.rows_of(&from.item)?;
                match &from.join {
                    None => {
                        for l in &left {
                            emit(&Row {
                                from: l,
                                join: &empty,
                            })?;
                        }
                    }
                    Some(j) => {
                        let right = self.rows_of(&j.item)?;
                        for l in &left {
                            for r in &right {
                                let row = Row { from: l, join: r };
                                if let Some(on) = &j.on {
                                    if truth(&self.expr(on, &row)?) != Some(true) {
                                        continue;
                                    }
                                }
                                emit(&row)?;
                            }
                        }
                    }
                }
            }
        }
        Ok(ResultTable { columns, rows })
    }

    fn expr(&self, e: &SqlExpr, row: &Row<'_>) -> Result<SqlValue, ExecError> {
        Ok(match e {
            SqlExpr::Bool(b) => SqlValue::Bool(*b),
            SqlExpr::Null(_) => SqlValue::Null,
            SqlExpr::Int(i) => SqlValue::Int(*i),
            SqlExpr::Str(s) => SqlValue::Str(s.clone()),
            SqlExpr::Var(v, _) => self
                .env
                .get(v)
                .cloned()
                .ok_or_else(|| ExecError::Unassigned(v.clone()))?,
            SqlExpr::Column(c) => match c.side {
                Side::From => row.from[c.index].clone(),
                Side::Join => row.join[c.index].clone(),
            },
            SqlExpr::Not(a) => of_truth(truth(&self.expr(a, row)?).map(|b| !b)),
            SqlExpr::And(a, b) => {
                let (x, y) = (truth(&self.expr(a, row)?), truth(&self.expr(b, row)?));
                of_truth(match (x, y) {
                    (Some(false), _) | (_, Some(false)) => Some(false),
                    (Some(true), Some(true)) => Some(true),
                    _ => None,
                })
            }
            SqlExpr::Or(a, b) => {
                let (x, y) = (truth(&self.expr(a, row)?), truth(&self.expr(b, row)?));
                of_truth(match (x, y) {
                    (Some(true), _) | (_, Some(true)) => Some(true),
                    (Some(false), Some(false)) => Some(false),
                    _ => None,
                })
            }
            SqlExpr::Cmp(op, a, b) => {
                let (x, y) = (self.expr(a, row)?, self.expr(b, row)?);
                if x.is_null() || y.is_null() {
                    SqlValue::Null
                } else {
                    let ord = x.cmp(&y);
                    SqlValue::Bool(match op {
                        SqlCmp::Eq => ord == Ordering::Equal,
                        SqlCmp::Neq => ord != Ordering::Equal,
                        SqlCmp::Lt => ord == Ordering::Less,
                        SqlCmp::Le => ord != Ordering::Greater,
                        SqlCmp::Gt => ord == Ordering::Greater,
                        SqlCmp::Ge => ord != Ordering::Less,
                    })
                }
            }
            SqlExpr::Case {
                when,
                then,
                otherwise,
            } => {
                if truth(&self.expr(when, row)?) == Some(true) {
                    self.expr(then, row)?
                } else {
                    self.expr(otherwise, row)?
                }
            }
            SqlExpr::IsNull(a) => SqlValue::Bool(self.expr(a, row)?.is_null()),
            SqlExpr::Exists(s) => SqlValue::Bool(!self.select(s)?.rows.is_empty()),
            SqlExpr::Scalar(s) => {
                let r = self.select(s)?;
                if r.rows.len() != 1 {
                    return Err(ExecError::ScalarSubselect {
                        select: s.to_string(),
                        rows: r.rows.len(),
                    });
                }
                r.rows[0][0].clone()
            }
        })
    }
}

/// Executes `s` with SQL's three-valued logic. Join rows are produced in
/// left-major order; WHERE and ON keep only rows whose condition is TRUE.
pub fn exec_sql(
    db: &DatabaseInstance,
    env: &SqlAssignment,
    s: &SqlSelect,
) -> Result<ResultTable, ExecError> {
    Exec { db, env }.select(s)
}
