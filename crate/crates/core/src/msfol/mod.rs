//! Many-sorted first-order logic: terms, formulas and theories.
//!
//! Terms carry their sort, and function application checks argument sorts
//! against the declaration, so ill-sorted terms cannot be built.

mod smtlib;

use std::collections::HashSet;
use std::fmt;

use indexmap::IndexMap;
use thiserror::Error;

pub use smtlib::{emit_smtlib, escape_symbol, formula_text, unescape_symbol};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Int,
    String,
    Classifier,
    /// The three SQL truth values, as a datatype with constructors
    /// `TRUE`, `FALSE` and `NULL`.
    SqlBool,
    /// Formula-level truth values; the result sort of predicates.
    Bool,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sort::Int => "Int",
            Sort::String => "String",
            Sort::Classifier => "Classifier",
            Sort::SqlBool => "SqlBool",
            Sort::Bool => "Bool",
        })
    }
}

/// Constructors of [`Sort::SqlBool`].
pub const SQL_BOOL_CONSTRUCTORS: [&str; 3] = ["TRUE", "FALSE", "NULL"];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SortError {
    #[error("`{symbol}` expects {expected} argument(s), got {got}")]
    Arity {
        symbol: String,
        expected: usize,
        got: usize,
    },
    #[error("argument {index} of `{symbol}` has sort {got}, expected {expected}")]
    Argument {
        symbol: String,
        index: usize,
        expected: Sort,
        got: Sort,
    },
    #[error("cannot compare {0} with {1}")]
    Mismatch(Sort, Sort),
    #[error("`{0}` is not a predicate")]
    NotPredicate(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TheoryError {
    #[error("symbol `{0}` is declared with two different signatures")]
    Conflict(String),
    #[error("symbol `{0}` is used but not declared")]
    Undeclared(String),
    #[error("symbol `{name}` is used with a signature that differs from its declaration")]
    Misused { name: String },
    #[error("variable `{0}` occurs free")]
    FreeVariable(String),
}

/// A constant (no arguments), function or predicate (result [`Sort::Bool`]).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Decl {
    pub name: String,
    pub args: Vec<Sort>,
    pub result: Sort,
}

impl Decl {
    pub fn constant(name: impl Into<String>, sort: Sort) -> Self {
        Decl {
            name: name.into(),
            args: vec![],
            result: sort,
        }
    }

    pub fn function(name: impl Into<String>, args: Vec<Sort>, result: Sort) -> Self {
        Decl {
            name: name.into(),
            args,
            result,
        }
    }

    pub fn predicate(name: impl Into<String>, args: Vec<Sort>) -> Self {
        Decl::function(name, args, Sort::Bool)
    }

    pub fn try_app(&self, args: Vec<Term>) -> Result<Term, SortError> {
        if args.len() != self.args.len() {
            return Err(SortError::Arity {
                symbol: self.name.clone(),
                expected: self.args.len(),
                got: args.len(),
            });
        }
        for (i, (a, s)) in args.iter().zip(&self.args).enumerate() {
            if a.sort != *s {
                return Err(SortError::Argument {
                    symbol: self.name.clone(),
                    index: i,
                    expected: *s,
                    got: a.sort,
                });
            }
        }
        Ok(Term {
            kind: TermKind::App(self.name.clone(), args),
            sort: self.result,
        })
    }

    /// Applies the symbol; panics on ill-sorted arguments, which would be a
    /// bug in the caller.
    pub fn app(&self, args: Vec<Term>) -> Term {
        self.try_app(args).unwrap_or_else(|e| panic!("{e}"))
    }

    /// The constant itself, as a term.
    pub fn term(&self) -> Term {
        self.app(vec![])
    }

    /// Applies a predicate and wraps it as an atomic formula.
    pub fn holds(&self, args: Vec<Term>) -> Formula {
        Formula::atom(self.app(args))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TermKind {
    Var(String),
    App(String, Vec<Term>),
    Int(i64),
    Str(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Term {
    kind: TermKind,
    sort: Sort,
}

impl Term {
    pub fn var(name: impl Into<String>, sort: Sort) -> Self {
        Term {
            kind: TermKind::Var(name.into()),
            sort,
        }
    }

    pub fn int(i: i64) -> Self {
        Term {
            kind: TermKind::Int(i),
            sort: Sort::Int,
        }
    }

    pub fn string(s: impl Into<String>) -> Self {
        Term {
            kind: TermKind::Str(s.into()),
            sort: Sort::String,
        }
    }

    fn sql_bool(name: &str) -> Self {
        Term {
            kind: TermKind::App(name.to_string(), vec![]),
            sort: Sort::SqlBool,
        }
    }

    pub fn sql_true() -> Self {
        Self::sql_bool("TRUE")
    }

    pub fn sql_false() -> Self {
        Self::sql_bool("FALSE")
    }

    pub fn sql_null() -> Self {
        Self::sql_bool("NULL")
    }

    pub fn sort(&self) -> Sort {
        self.sort
    }

    pub fn kind(&self) -> &TermKind {
        &self.kind
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn holds(self, a: i64, b: i64) -> bool {
        match self {
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
        }
    }

    pub fn smt(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    /// A predicate application.
    Atom(Term),
    Eq(Term, Term),
    Distinct(Vec<Term>),
    Cmp(CmpOp, Term, Term),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Forall(Vec<(String, Sort)>, Box<Formula>),
    Exists(Vec<(String, Sort)>, Box<Formula>),
}

impl Formula {
    pub fn atom(t: Term) -> Self {
        assert_eq!(t.sort, Sort::Bool, "atom over a non-Boolean term");
        Formula::Atom(t)
    }

    pub fn try_eq(a: Term, b: Term) -> Result<Self, SortError> {
        if a.sort != b.sort || a.sort == Sort::Bool {
            return Err(SortError::Mismatch(a.sort, b.sort));
        }
        Ok(Formula::Eq(a, b))
    }

    pub fn eq(a: Term, b: Term) -> Self {
        Self::try_eq(a, b).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn neq(a: Term, b: Term) -> Self {
        Formula::not(Formula::eq(a, b))
    }

    pub fn distinct(ts: Vec<Term>) -> Self {
        assert!(ts.windows(2).all(|w| w[0].sort == w[1].sort));
        Formula::Distinct(ts)
    }

    pub fn cmp(op: CmpOp, a: Term, b: Term) -> Self {
        assert!(a.sort == Sort::Int && b.sort == Sort::Int);
        Formula::Cmp(op, a, b)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        match f {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Not(g) => *g,
            g => Formula::Not(Box::new(g)),
        }
    }

    /// Conjunction, dropping `True` operands and short-circuiting on `False`.
    pub fn and(fs: impl IntoIterator<Item = Formula>) -> Self {
        let mut out = Vec::new();
        for f in fs {
            match f {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(gs) => out.extend(gs),
                g => out.push(g),
            }
        }
        match out.len() {
            0 => Formula::True,
            1 => out.pop().unwrap(),
            _ => Formula::And(out),
        }
    }

    /// Disjunction, dropping `False` operands and short-circuiting on `True`.
    pub fn or(fs: impl IntoIterator<Item = Formula>) -> Self {
        let mut out = Vec::new();
        for f in fs {
            match f {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(gs) => out.extend(gs),
                g => out.push(g),
            }
        }
        match out.len() {
            0 => Formula::False,
            1 => out.pop().unwrap(),
            _ => Formula::Or(out),
        }
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        match (a, b) {
            (Formula::True, b) => b,
            (Formula::False, _) | (_, Formula::True) => Formula::True,
            (a, b) => Formula::Implies(Box::new(a), Box::new(b)),
        }
    }

    pub fn iff(a: Formula, b: Formula) -> Self {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn forall(vars: Vec<(String, Sort)>, body: Formula) -> Self {
        if vars.is_empty() || matches!(body, Formula::True | Formula::False) {
            return body;
        }
        Formula::Forall(vars, Box::new(body))
    }

    pub fn exists(vars: Vec<(String, Sort)>, body: Formula) -> Self {
        if vars.is_empty() || matches!(body, Formula::True | Formula::False) {
            return body;
        }
        Formula::Exists(vars, Box::new(body))
    }

    fn visit_terms<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(t) => f(t),
            Formula::Eq(a, b) | Formula::Cmp(_, a, b) => {
                f(a);
                f(b);
            }
            Formula::Distinct(ts) => ts.iter().for_each(f),
            Formula::Not(g) => g.visit_terms(f),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| g.visit_terms(f)),
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.visit_terms(f);
                b.visit_terms(f);
            }
            Formula::Forall(_, g) | Formula::Exists(_, g) => g.visit_terms(f),
        }
    }
}

fn visit_subterms<'a>(t: &'a Term, f: &mut impl FnMut(&'a Term)) {
    f(t);
    if let TermKind::App(_, args) = &t.kind {
        for a in args {
            visit_subterms(a, f);
        }
    }
}

/// An axiom with an optional human-readable note printed above it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Axiom {
    pub formula: Formula,
    pub note: Option<String>,
}

/// Declarations plus asserted formulas, both kept in insertion order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Theory {
    pub name: Option<String>,
    decls: IndexMap<String, Decl>,
    axioms: Vec<Axiom>,
    seen: HashSet<Formula>,
}

impl Theory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn named(name: impl Into<String>) -> Self {
        Theory {
            name: Some(name.into()),
            ..Self::default()
        }
    }

    /// Adds a declaration; re-declaring with the same signature is a no-op.
    pub fn declare(&mut self, d: Decl) -> Result<Decl, TheoryError> {
        match self.decls.get(&d.name) {
            Some(old) if *old != d => Err(TheoryError::Conflict(d.name)),
            Some(_) => Ok(d),
            None => {
                self.decls.insert(d.name.clone(), d.clone());
                Ok(d)
            }
        }
    }

    pub fn decl(&self, name: &str) -> Option<&Decl> {
        self.decls.get(name)
    }

    pub fn decls(&self) -> impl Iterator<Item = &Decl> {
        self.decls.values()
    }

    /// Asserts `f` unless an identical formula is already present.
    pub fn assert(&mut self, f: Formula) {
        self.assert_noted(f, None::<String>);
    }

    pub fn assert_noted(&mut self, f: Formula, note: Option<impl Into<String>>) {
        if f == Formula::True || !self.seen.insert(f.clone()) {
            return;
        }
        self.axioms.push(Axiom {
            formula: f,
            note: note.map(Into::into),
        });
    }

    pub fn axioms(&self) -> &[Axiom] {
        &self.axioms
    }

    pub fn is_empty(&self) -> bool {
        self.decls.is_empty() && self.axioms.is_empty()
    }

    /// Appends `other`'s declarations and axioms, skipping duplicates.
    pub fn extend(&mut self, other: &Theory) -> Result<(), TheoryError> {
        for d in other.decls.values() {
            self.declare(d.clone())?;
        }
        for a in &other.axioms {
            self.assert_noted(a.formula.clone(), a.note.clone());
        }
        Ok(())
    }

    /// Order-preserving union; `a`'s name is kept.
    pub fn union(a: &Theory, b: &Theory) -> Result<Theory, TheoryError> {
        let mut t = a.clone();
        t.extend(b)?;
        Ok(t)
    }

    /// Sorts occurring in declarations or axioms.
    pub fn sorts_used(&self) -> HashSet<Sort> {
        let mut out = HashSet::new();
        for d in self.decls.values() {
            out.extend(d.args.iter().copied());
            out.insert(d.result);
        }
        for a in &self.axioms {
            let mut add_formula_sorts = |f: &Formula| {
                let mut stack = vec![f];
                while let Some(g) = stack.pop() {
                    match g {
                        Formula::Forall(vs, b) | Formula::Exists(vs, b) => {
                            out.extend(vs.iter().map(|v| v.1));
                            stack.push(b);
                        }
                        Formula::Not(b) => stack.push(b),
                        Formula::And(gs) | Formula::Or(gs) => stack.extend(gs),
                        Formula::Implies(x, y) | Formula::Iff(x, y) => {
                            stack.push(x);
                            stack.push(y);
                        }
                        _ => {}
                    }
                }
            };
            add_formula_sorts(&a.formula);
            a.formula.visit_terms(&mut |t| {
                visit_subterms(t, &mut |s| {
                    out.insert(s.sort);
                })
            });
        }
        out
    }

    /// Checks that every symbol used is declared with a matching signature
    /// and every variable is bound.
    pub fn check_closed(&self) -> Result<(), TheoryError> {
        for a in &self.axioms {
            self.check_formula(&a.formula, &mut Vec::new())?;
        }
        Ok(())
    }

    fn check_formula<'a>(
        &self,
        f: &'a Formula,
        bound: &mut Vec<&'a (String, Sort)>,
    ) -> Result<(), TheoryError> {
        match f {
            Formula::Forall(vs, b) | Formula::Exists(vs, b) => {
                let n = bound.len();
                bound.extend(vs.iter());
                let r = self.check_formula(b, bound);
                bound.truncate(n);
                r
            }
            Formula::Not(b) => self.check_formula(b, bound),
            Formula::And(gs) | Formula::Or(gs) => {
                gs.iter().try_for_each(|g| self.check_formula(g, bound))
            }
            Formula::Implies(x, y) | Formula::Iff(x, y) => {
                self.check_formula(x, bound)?;
                self.check_formula(y, bound)
            }
            other => {
                let mut err = Ok(());
                other.visit_terms(&mut |t| {
                    if err.is_ok() {
                        err = self.check_term(t, bound);
                    }
                });
                err
            }
        }
    }

    fn check_term(&self, t: &Term, bound: &[&(String, Sort)]) -> Result<(), TheoryError> {
        match &t.kind {
            TermKind::Var(v) => {
                if bound.iter().rev().any(|(n, s)| n == v && *s == t.sort) {
                    Ok(())
                } else {
                    Err(TheoryError::FreeVariable(v.clone()))
                }
            }
            TermKind::Int(_) | TermKind::Str(_) => Ok(()),
            TermKind::App(name, args) => {
                if t.sort == Sort::SqlBool
                    && args.is_empty()
                    && SQL_BOOL_CONSTRUCTORS.contains(&name.as_str())
                {
                    return Ok(());
                }
                let d = self
                    .decls
                    .get(name)
                    .ok_or_else(|| TheoryError::Undeclared(name.clone()))?;
                let sig_ok = d.result == t.sort
                    && d.args.len() == args.len()
                    && d.args.iter().zip(args).all(|(s, a)| *s == a.sort);
                if !sig_ok {
                    return Err(TheoryError::Misused { name: name.clone() });
                }
                args.iter().try_for_each(|a| self.check_term(a, bound))
            }
        }
    }
}

/// Hands out fresh names of the form `<prefix>!<n>`.
///
/// User identifiers never contain `!`, so generated names cannot collide
/// with them.
#[derive(Debug, Clone, Default)]
pub struct Fresh {
    next: usize,
}

impl Fresh {
    pub fn name(&mut self, prefix: &str) -> String {
        self.next += 1;
        format!("{prefix}!{}", self.next)
    }
}
