//! Bounded brute-force cross-check by direct evaluation and execution.

use std::fmt;

use crate::datamodel::{
    enumerate_assignments, enumerate_object_models, Assignment, EnumerationBounds, ObjectModel,
    Value, VarType,
};
use crate::ocl::eval_ocl;
use crate::relational::{o2s_inst, o2s_inst_assignment, SqlValue};
use crate::sql::{exec_sql, ExecError};

use super::CorrectnessProblem;

/// How many witnesses of each kind a report keeps verbatim.
const KEPT: usize = 5;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OracleReport {
    pub object_models: usize,
    /// Instances (object model and assignment) satisfying the assumptions.
    pub instances: usize,
    /// The constraint is true exactly when the select does not yield a
    /// single TRUE cell.
    pub discrepancies: usize,
    /// The select returned zero or several rows.
    pub row_count_witnesses: usize,
    /// A scalar subselect returned zero or several rows.
    pub obligation_witnesses: usize,
    /// A few witnesses, described.
    pub examples: Vec<String>,
}

impl OracleReport {
    pub fn agrees_with_correct(&self) -> bool {
        self.discrepancies == 0 && self.row_count_witnesses == 0 && self.obligation_witnesses == 0
    }
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "object models: {}", self.object_models)?;
        writeln!(f, "instances: {}", self.instances)?;
        writeln!(f, "discrepancies: {}", self.discrepancies)?;
        writeln!(f, "row-count witnesses: {}", self.row_count_witnesses)?;
        writeln!(f, "obligation witnesses: {}", self.obligation_witnesses)?;
        for e in &self.examples {
            writeln!(f, "  {e}")?;
        }
        Ok(())
    }
}

fn describe(om: &ObjectModel, sigma: &Assignment, what: &str) -> String {
    let objs: Vec<String> = om
        .objects()
        .iter()
        .map(|o| {
            let vals: Vec<String> = om
                .values()
                .iter()
                .filter(|((id, _), _)| *id == o.id)
                .map(|((_, a), v)| format!("{a}={v}"))
                .collect();
            format!("{}#{}({})", o.class, o.id, vals.join(","))
        })
        .collect();
    let links: Vec<String> = om
        .links()
        .iter()
        .map(|l| format!("{}(#{},#{})", l.assoc, l.left, l.right))
        .collect();
    let vars: Vec<String> = sigma.iter().map(|(n, v)| format!("{n}={v}")).collect();
    format!(
        "{what}: objects [{}] links [{}] vars [{}]",
        objs.join(" "),
        links.join(" "),
        vars.join(" ")
    )
}

/// Evaluates the constraint and executes the select on every object model
/// and assignment within `bounds` whose assumptions are all true.
/// Non-nullable object variables are never bound to null.
pub fn cross_check(p: &CorrectnessProblem, bounds: &EnumerationBounds) -> OracleReport {
    let mut r = OracleReport::default();
    let keep = |r: &mut OracleReport, s: String| {
        if r.examples.len() < KEPT {
            r.examples.push(s);
        }
    };
    for om in enumerate_object_models(&p.dm, bounds) {
        r.object_models += 1;
        let db = o2s_inst(&om, &p.dm);
        for sigma in enumerate_assignments(&p.frees, &om, bounds) {
            let null_object = p.frees.iter().any(|v| {
                matches!(v.ty, VarType::Class(_))
                    && !v.nullable
                    && sigma.get(&v.name) == Some(&Value::Null)
            });
            if null_object
                || !p
                    .assumptions
                    .iter()
                    .all(|a| eval_ocl(&om, &sigma, a).is_true())
            {
                continue;
            }
            r.instances += 1;
            let ocl_true = eval_ocl(&om, &sigma, &p.expr).is_true();
            let sql_true = match exec_sql(&db, &o2s_inst_assignment(&sigma), &p.sel) {
                Ok(t) if t.rows.len() == 1 => t.rows[0][0] == SqlValue::Bool(true),
                Ok(t) => {
                    r.row_count_witnesses += 1;
                    let s = describe(&om, &sigma, &format!("{} rows", t.rows.len()));
                    keep(&mut r, s);
                    false
                }
                Err(e @ ExecError::ScalarSubselect { .. }) => {
                    r.obligation_witnesses += 1;
                    keep(&mut r, describe(&om, &sigma, &e.to_string()));
                    false
                }
                Err(e @ ExecError::Unassigned(_)) => {
                    unreachable!("every free variable is assigned: {e}")
                }
            };
            if ocl_true != sql_true {
                r.discrepancies += 1;
                let what = if ocl_true {
                    "constraint true, select not TRUE"
                } else {
                    "select TRUE, constraint not true"
                };
                keep(&mut r, describe(&om, &sigma, what));
            }
        }
    }
    r
}
