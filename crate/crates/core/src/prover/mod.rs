//! Correctness problems, their satisfiability theories and the verdict.
//!
//! A select `sel` correctly implements a Boolean OCL constraint `expr` when,
//! in every instance satisfying the assumptions, `sel` returns exactly one
//! row and its single cell is TRUE exactly when `expr` evaluates to true.
//! Each way of failing is a theory; `Correct` requires all to be UNSAT.

mod oracle;
mod pin;
mod solver;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::datamodel::{DataModel, VarDecl};
use crate::msfol::{Formula, Sort, Term, Theory, TheoryError};
use crate::ocl::{parse_ocl, OclError, OclExpr, OclType};
use crate::ocl2msfol::{declare_frees, o2f_data, OclTranslator, TranslateError};
use crate::relational::o2s;
use crate::sql::{parse_select, SqlError, SqlSelect, SqlType};
use crate::sql2msfol::{
    exactly_one_row, s2f_schema, s2f_select, NamingRegistry, S2fError, SelectTranslation,
};

pub use oracle::{cross_check, OracleReport};
pub use pin::{exclusivity_theories, object_constant, outcome_formula, pin_instance, SqlOutcome};
pub use solver::{check, check_all, check_file, SolverConfig, SolverError, SolverResult};

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error(transparent)]
    Ocl(#[from] OclError),
    #[error(transparent)]
    Sql(#[from] SqlError),
    #[error(transparent)]
    Translate(#[from] TranslateError),
    #[error(transparent)]
    S2f(#[from] S2fError),
    #[error(transparent)]
    Theory(#[from] TheoryError),
    #[error("the select must have exactly one item, found {0}")]
    ItemCount(usize),
    #[error("the select item has type {0}, expected BOOLEAN")]
    ItemType(SqlType),
    #[error("`{0}` is not a Boolean OCL expression")]
    NotBoolean(String),
    #[error("variable `{0}` is declared twice")]
    DuplicateVar(String),
    #[error("variable `{0}` clashes with a symbol of the data model")]
    VarClash(String),
}

/// A data model, a Boolean OCL constraint with its assumptions, and a
/// single-item select over the same free variables.
#[derive(Debug, Clone)]
pub struct CorrectnessProblem {
    pub dm: DataModel,
    pub expr: OclExpr,
    pub assumptions: Vec<OclExpr>,
    pub sel: SqlSelect,
    pub frees: Vec<VarDecl>,
}

impl CorrectnessProblem {
    pub fn new(
        dm: DataModel,
        expr: OclExpr,
        assumptions: Vec<OclExpr>,
        sel: SqlSelect,
        frees: Vec<VarDecl>,
    ) -> Result<Self, ProblemError> {
        if sel.items.len() != 1 {
            return Err(ProblemError::ItemCount(sel.items.len()));
        }
        let ty = sel.items[0].expr.ty();
        if ty != SqlType::Bool {
            return Err(ProblemError::ItemType(ty));
        }
        for e in std::iter::once(&expr).chain(&assumptions) {
            if e.ty() != OclType::Boolean {
                return Err(ProblemError::NotBoolean(e.to_string()));
            }
        }
        let mut seen = BTreeSet::new();
        let mut symbols = o2f_data(&dm);
        symbols.extend(&s2f_schema(&dm))?;
        for v in &frees {
            if !seen.insert(v.name.as_str()) {
                return Err(ProblemError::DuplicateVar(v.name.clone()));
            }
            if symbols.decl(&v.name).is_some() {
                return Err(ProblemError::VarClash(v.name.clone()));
            }
        }
        Ok(CorrectnessProblem {
            dm,
            expr,
            assumptions,
            sel,
            frees,
        })
    }

    /// Parses the constraint, assumptions and select against `dm` and `frees`.
    pub fn parse(
        dm: DataModel,
        ocl: &str,
        assumptions: &[impl AsRef<str>],
        sql: &str,
        frees: Vec<VarDecl>,
    ) -> Result<Self, ProblemError> {
        let expr = parse_ocl(ocl, &dm, &frees)?;
        let assumptions = assumptions
            .iter()
            .map(|a| parse_ocl(a.as_ref(), &dm, &frees))
            .collect::<Result<Vec<_>, _>>()?;
        let sel = parse_select(sql, &o2s(&dm), &frees)?;
        Self::new(dm, expr, assumptions, sel, frees)
    }

    /// All theories to check: obligations first, then C1, C2 and C3.
    pub fn theories(&self) -> Result<Vec<(TheoryKind, Theory)>, ProblemError> {
        Theories::build(self)?.all()
    }
}

/// Which satisfiability problem a theory encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TheoryKind {
    /// The select does not return exactly one row.
    C1,
    /// The constraint is true but the select's cell is not TRUE.
    C2,
    /// The select's cell is TRUE but the constraint is not true.
    C3,
    /// The `n`-th scalar subselect (from 1) does not return exactly one row.
    Obligation(usize),
}

impl TheoryKind {
    fn describe(self) -> &'static str {
        match self {
            TheoryKind::C1 => "the select does not return exactly one row",
            TheoryKind::C2 => "the constraint is true but the select does not return TRUE",
            TheoryKind::C3 => "the select returns TRUE but the constraint is not true",
            TheoryKind::Obligation(_) => "a scalar subselect does not return exactly one row",
        }
    }
}

impl fmt::Display for TheoryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TheoryKind::C1 => f.write_str("C1"),
            TheoryKind::C2 => f.write_str("C2"),
            TheoryKind::C3 => f.write_str("C3"),
            TheoryKind::Obligation(n) => write!(f, "O{n}"),
        }
    }
}

/// The shared parts of a problem's theories.
struct Theories {
    /// Data model, schema and free variables.
    base: Theory,
    /// Assumption definitions and truths.
    assumed: Theory,
    /// Definitions of the constraint's set predicates.
    ocl_defs: Theory,
    expr_true: Formula,
    sel: SelectTranslation,
}

impl Theories {
    fn build(p: &CorrectnessProblem) -> Result<Self, ProblemError> {
        let mut base = o2f_data(&p.dm);
        base.extend(&s2f_schema(&p.dm))?;
        declare_frees(&p.frees, &mut base)?;
        let mut tr = OclTranslator::new(&p.dm, &p.frees);
        let truths = p
            .assumptions
            .iter()
            .map(|a| tr.o2f_true(a))
            .collect::<Result<Vec<_>, _>>()?;
        let mut assumed = tr.defs().clone();
        for (a, f) in p.assumptions.iter().zip(truths) {
            assumed.assert_noted(f, Some(format!("assume {a}")));
        }
        let expr_true = tr.o2f_true(&p.expr)?;
        let ocl_defs = tr.defs().clone();
        let sel = s2f_select(&p.sel, &p.dm, &mut NamingRegistry::new())?;
        Ok(Theories {
            base,
            assumed,
            ocl_defs,
            expr_true,
            sel,
        })
    }

    fn start(&self, kind: TheoryKind) -> Result<Theory, ProblemError> {
        let mut t = Theory::named(format!("{kind}: {}", kind.describe()));
        t.extend(&self.base)?;
        t.extend(&self.assumed)?;
        Ok(t)
    }

    fn cell_true(&self) -> Formula {
        let x = Term::var("x", Sort::Int);
        Formula::forall(
            vec![("x".into(), Sort::Int)],
            Formula::implies(
                self.sel.index.holds(vec![x.clone()]),
                Formula::eq(self.sel.items[0].app(vec![x]), Term::sql_true()),
            ),
        )
    }

    fn theory(&self, kind: TheoryKind) -> Result<Theory, ProblemError> {
        let mut t = self.start(kind)?;
        if let TheoryKind::Obligation(n) = kind {
            t.extend(&self.sel.obligations[n - 1].theory)?;
            return Ok(t);
        }
        if kind != TheoryKind::C1 {
            t.extend(&self.ocl_defs)?;
        }
        t.extend(&self.sel.axioms)?;
        match kind {
            TheoryKind::C1 => t.assert_noted(
                Formula::not(exactly_one_row(&self.sel.index)),
                Some("goal: not exactly one row"),
            ),
            TheoryKind::C2 => {
                t.assert_noted(self.expr_true.clone(), Some("goal: the constraint is true"));
                t.assert_noted(
                    Formula::not(self.cell_true()),
                    Some("goal: some row is not TRUE"),
                );
            }
            TheoryKind::C3 => {
                t.assert_noted(self.cell_true(), Some("goal: every row is TRUE"));
                t.assert_noted(
                    Formula::not(self.expr_true.clone()),
                    Some("goal: the constraint is not true"),
                );
            }
            TheoryKind::Obligation(_) => unreachable!(),
        }
        Ok(t)
    }

    fn all(&self) -> Result<Vec<(TheoryKind, Theory)>, ProblemError> {
        let kinds = (1..=self.sel.obligations.len())
            .map(TheoryKind::Obligation)
            .chain([TheoryKind::C1, TheoryKind::C2, TheoryKind::C3]);
        kinds.map(|k| Ok((k, self.theory(k)?))).collect()
    }
}

/// Builds one theory of `p`.
pub fn build_theory(kind: TheoryKind, p: &CorrectnessProblem) -> Result<Theory, ProblemError> {
    Theories::build(p)?.theory(kind)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Correct,
    /// Witnessed by the first satisfiable theory.
    Incorrect(TheoryKind),
    /// No theory is satisfiable but these could not be decided.
    Inconclusive(Vec<TheoryKind>),
}

impl Verdict {
    /// 0 for `Correct`, 1 for `Incorrect`, 2 for `Inconclusive`.
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::Correct => 0,
            Verdict::Incorrect(_) => 1,
            Verdict::Inconclusive(_) => 2,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Correct => f.write_str("Correct"),
            Verdict::Incorrect(k) => write!(f, "Incorrect ({k})"),
            Verdict::Inconclusive(ks) => {
                let ks: Vec<String> = ks.iter().map(ToString::to_string).collect();
                write!(f, "Inconclusive ({})", ks.join(", "))
            }
        }
    }
}

/// Any SAT makes the verdict `Incorrect`, witnessed by the first SAT theory
/// in `results` order; otherwise any UNKNOWN or TIMEOUT makes it
/// `Inconclusive`; otherwise it is `Correct`.
pub fn decide(results: &[(TheoryKind, SolverResult)]) -> Verdict {
    if let Some((k, _)) = results.iter().find(|(_, r)| *r == SolverResult::Sat) {
        return Verdict::Incorrect(*k);
    }
    let open: Vec<TheoryKind> = results
        .iter()
        .filter(|(_, r)| *r != SolverResult::Unsat)
        .map(|(k, _)| *k)
        .collect();
    if open.is_empty() {
        Verdict::Correct
    } else {
        Verdict::Inconclusive(open)
    }
}

#[cfg(test)]
mod tests;
