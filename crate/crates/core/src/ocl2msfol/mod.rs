//! OCL to MSFOL: the data-model theory and the four valuation mappings.
//!
//! A Boolean expression is translated into four formulas ([`Four`]) stating
//! when it evaluates to true, false, null and invalid. Scalar expressions
//! become terms whose null/invalid status is encoded by the distinguished
//! constants `nullInt`, `invalInt`, etc. Set-valued expressions become fresh
//! predicates `set!<n>` whose defining axioms are collected in the
//! translator's definition theory.

mod data;

use std::collections::HashMap;

use thiserror::Error;

use crate::datamodel::{DataModel, VarDecl};
use crate::msfol::{Decl, Formula, Fresh, Sort, Term, Theory, TheoryError};
use crate::ocl::{BinOp, CollOp, IterKind, OclExpr, OclType};

pub use data::{
    assoc_decl, attr_decl, class_decl, declare_frees, free_constant, inval_of, null_of, o2f_data,
    sort_of_var,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TranslateError {
    #[error("unsupported construct: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Theory(#[from] TheoryError),
}

/// When a Boolean expression is true, false, null or invalid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Four {
    pub t: Formula,
    pub f: Formula,
    pub n: Formula,
    pub i: Formula,
}

impl Four {
    fn constant(which: usize) -> Four {
        let pick = |k| {
            if k == which {
                Formula::True
            } else {
                Formula::False
            }
        };
        Four {
            t: pick(0),
            f: pick(1),
            n: pick(2),
            i: pick(3),
        }
    }

    pub fn all(&self) -> [&Formula; 4] {
        [&self.t, &self.f, &self.n, &self.i]
    }
}

/// A set-valued expression: membership is `pred(args.., element)`.
#[derive(Debug, Clone)]
pub struct SetRep {
    pub pred: Decl,
    pub args: Vec<Term>,
    pub elem: Sort,
    pub inval: Formula,
}

impl SetRep {
    pub fn contains(&self, t: Term) -> Formula {
        let mut args = self.args.clone();
        args.push(t);
        self.pred.holds(args)
    }
}

/// Result of evaluating a non-Boolean expression.
#[derive(Debug, Clone)]
pub enum Evaluated {
    Term(Term),
    Set(SetRep),
}

type Env = Vec<(String, Term)>;

pub struct OclTranslator<'a> {
    dm: &'a DataModel,
    frees: HashMap<String, Term>,
    defs: Theory,
    cache: HashMap<(String, Vec<(String, Sort)>), Decl>,
    fresh: Fresh,
}

fn ocl_sort(t: &OclType) -> Result<Sort, TranslateError> {
    match t {
        OclType::Integer => Ok(Sort::Int),
        OclType::String => Ok(Sort::String),
        OclType::Class(_) => Ok(Sort::Classifier),
        OclType::Boolean => Ok(Sort::SqlBool),
        other => Err(TranslateError::Unsupported(format!(
            "values of type {other} have no logic sort"
        ))),
    }
}

fn exists(v: &str, s: Sort, body: Formula) -> Formula {
    Formula::exists(vec![(v.to_string(), s)], body)
}

fn forall(v: &str, s: Sort, body: Formula) -> Formula {
    Formula::forall(vec![(v.to_string(), s)], body)
}

fn is_undef(t: &Term) -> Formula {
    Formula::or([
        Formula::eq(t.clone(), null_of(t.sort())),
        Formula::eq(t.clone(), inval_of(t.sort())),
    ])
}

impl<'a> OclTranslator<'a> {
    /// A translator whose top-level variables are `vars`, mapped to the
    /// constants of the same name.
    pub fn new(dm: &'a DataModel, vars: &[VarDecl]) -> Self {
        OclTranslator {
            dm,
            frees: vars
                .iter()
                .map(|v| (v.name.clone(), free_constant(v).term()))
                .collect(),
            defs: Theory::new(),
            cache: HashMap::new(),
            fresh: Fresh::default(),
        }
    }

    /// Definitions accumulated so far: set predicates and literal axioms.
    pub fn defs(&self) -> &Theory {
        &self.defs
    }

    pub fn o2f_true(&mut self, e: &OclExpr) -> Result<Formula, TranslateError> {
        Ok(self.four(e)?.t)
    }

    pub fn o2f_false(&mut self, e: &OclExpr) -> Result<Formula, TranslateError> {
        Ok(self.four(e)?.f)
    }

    pub fn o2f_null(&mut self, e: &OclExpr) -> Result<Formula, TranslateError> {
        Ok(self.four(e)?.n)
    }

    pub fn o2f_inval(&mut self, e: &OclExpr) -> Result<Formula, TranslateError> {
        Ok(self.four(e)?.i)
    }

    pub fn four(&mut self, e: &OclExpr) -> Result<Four, TranslateError> {
        self.four_in(e, &mut Vec::new())
    }

    pub fn o2f_eval(&mut self, e: &OclExpr) -> Result<Evaluated, TranslateError> {
        if e.ty().is_set() {
            Ok(Evaluated::Set(self.set_in(e, &mut Vec::new())?))
        } else {
            let s = ocl_sort(&e.ty())?;
            Ok(Evaluated::Term(self.term_in(e, s, &mut Vec::new())?))
        }
    }

    fn bound(&mut self, env: &Env, var: &str) -> Option<Term> {
        env.iter()
            .rev()
            .find(|(n, _)| n == var)
            .map(|(_, t)| t.clone())
            .or_else(|| self.frees.get(var).cloned())
    }

    fn four_in(&mut self, e: &OclExpr, env: &mut Env) -> Result<Four, TranslateError> {
        Ok(match e {
            OclExpr::Bool(true) => Four::constant(0),
            OclExpr::Bool(false) => Four::constant(1),
            OclExpr::Null => Four::constant(2),
            OclExpr::Invalid => Four::constant(3),
            OclExpr::Var(v, _) => {
                let x = self.bound(env, v).ok_or_else(|| {
                    TranslateError::Unsupported(format!("unbound variable `{v}`"))
                })?;
                Four {
                    t: Formula::eq(x.clone(), Term::sql_true()),
                    f: Formula::eq(x.clone(), Term::sql_false()),
                    n: Formula::eq(x, Term::sql_null()),
                    i: Formula::False,
                }
            }
            OclExpr::Not(a) => {
                let a = self.four_in(a, env)?;
                Four {
                    t: a.f,
                    f: a.t,
                    n: a.n,
                    i: a.i,
                }
            }
            OclExpr::Bin(op, a, b) => self.binary(*op, a, b, env)?,
            OclExpr::IsUndefined(a) => {
                let t = match a.ty() {
                    OclType::Boolean => {
                        let a = self.four_in(a, env)?;
                        Formula::or([a.n, a.i])
                    }
                    OclType::Void | OclType::Invalid => Formula::True,
                    t if t.is_set() => self.set_in(a, env)?.inval,
                    t => {
                        let term = self.term_in(a, ocl_sort(&t)?, env)?;
                        is_undef(&term)
                    }
                };
                Four {
                    f: Formula::not(t.clone()),
                    t,
                    n: Formula::False,
                    i: Formula::False,
                }
            }
            OclExpr::Coll {
                op: op @ (CollOp::IsEmpty | CollOp::NotEmpty),
                src,
                ..
            } => {
                let s = self.set_in(src, env)?;
                let v = self.fresh.name("v");
                let some = exists(&v, s.elem, s.contains(Term::var(&v, s.elem)));
                let empty =
                    Formula::and([Formula::not(s.inval.clone()), Formula::not(some.clone())]);
                let nonempty = Formula::and([Formula::not(s.inval.clone()), some]);
                let (t, f) = if *op == CollOp::IsEmpty {
                    (empty, nonempty)
                } else {
                    (nonempty, empty)
                };
                Four {
                    t,
                    f,
                    n: Formula::False,
                    i: s.inval,
                }
            }
            OclExpr::Iterate {
                kind: kind @ (IterKind::ForAll | IterKind::Exists),
                src,
                var,
                body,
                ..
            } => {
                let s = self.set_in(src, env)?;
                let v = self.fresh.name("v");
                let x = Term::var(&v, s.elem);
                env.push((var.clone(), x.clone()));
                let b = self.four_in(body, env);
                env.pop();
                let b = b?;
                let member = s.contains(x);
                let some =
                    |g: &Formula| exists(&v, s.elem, Formula::and([member.clone(), g.clone()]));
                let every =
                    |g: &Formula| forall(&v, s.elem, Formula::implies(member.clone(), g.clone()));
                // forAll folds with `and` (false dominates), exists with `or`
                // (true dominates); invalid beats null in both.
                let (dominant, all_other) = if *kind == IterKind::ForAll {
                    (&b.f, &b.t)
                } else {
                    (&b.t, &b.f)
                };
                let ok = Formula::not(s.inval.clone());
                let dom = Formula::and([ok.clone(), some(dominant)]);
                let inval = Formula::or([
                    s.inval.clone(),
                    Formula::and([Formula::not(some(dominant)), some(&b.i)]),
                ]);
                let null = Formula::and([
                    ok.clone(),
                    Formula::not(some(dominant)),
                    Formula::not(some(&b.i)),
                    some(&b.n),
                ]);
                let rest = Formula::and([ok, every(all_other)]);
                if *kind == IterKind::ForAll {
                    Four {
                        t: rest,
                        f: dom,
                        n: null,
                        i: inval,
                    }
                } else {
                    Four {
                        t: dom,
                        f: rest,
                        n: null,
                        i: inval,
                    }
                }
            }
            other => {
                return Err(TranslateError::Unsupported(format!(
                    "`{other}` is not a Boolean expression"
                )))
            }
        })
    }

    fn binary(
        &mut self,
        op: BinOp,
        a: &OclExpr,
        b: &OclExpr,
        env: &mut Env,
    ) -> Result<Four, TranslateError> {
        let and = |fs: Vec<Formula>| Formula::and(fs);
        let or = |fs: Vec<Formula>| Formula::or(fs);
        let not = Formula::not;
        Ok(match op {
            BinOp::And => {
                let (a, b) = (self.four_in(a, env)?, self.four_in(b, env)?);
                let f = or(vec![a.f.clone(), b.f.clone()]);
                let i = and(vec![not(f.clone()), or(vec![a.i.clone(), b.i.clone()])]);
                let n = and(vec![
                    not(f.clone()),
                    not(a.i.clone()),
                    not(b.i.clone()),
                    or(vec![a.n, b.n]),
                ]);
                Four {
                    t: and(vec![a.t, b.t]),
                    f,
                    n,
                    i,
                }
            }
            BinOp::Or => {
                let (a, b) = (self.four_in(a, env)?, self.four_in(b, env)?);
                let t = or(vec![a.t.clone(), b.t.clone()]);
                let i = and(vec![not(t.clone()), or(vec![a.i.clone(), b.i.clone()])]);
                let n = and(vec![
                    not(t.clone()),
                    not(a.i.clone()),
                    not(b.i.clone()),
                    or(vec![a.n, b.n]),
                ]);
                Four {
                    t,
                    f: and(vec![a.f, b.f]),
                    n,
                    i,
                }
            }
            BinOp::Xor => {
                let (a, b) = (self.four_in(a, env)?, self.four_in(b, env)?);
                let i = or(vec![a.i.clone(), b.i.clone()]);
                Four {
                    t: or(vec![
                        and(vec![a.t.clone(), b.f.clone()]),
                        and(vec![a.f.clone(), b.t.clone()]),
                    ]),
                    f: or(vec![
                        and(vec![a.t.clone(), b.t.clone()]),
                        and(vec![a.f.clone(), b.f.clone()]),
                    ]),
                    n: and(vec![not(i.clone()), or(vec![a.n, b.n])]),
                    i,
                }
            }
            BinOp::Implies => {
                let not_a = OclExpr::Not(Box::new(a.clone()));
                return self.binary(BinOp::Or, &not_a, b, env);
            }
            BinOp::Eq | BinOp::Neq => {
                let eq = self.equality(a, b, env)?;
                if op == BinOp::Eq {
                    eq
                } else {
                    Four {
                        t: eq.f,
                        f: eq.t,
                        n: eq.n,
                        i: eq.i,
                    }
                }
            }
            BinOp::Cmp(c) => {
                let x = self.term_in(a, Sort::Int, env)?;
                let y = self.term_in(b, Sort::Int, env)?;
                let i = or(vec![is_undef(&x), is_undef(&y)]);
                let holds = Formula::cmp(c, x, y);
                Four {
                    t: and(vec![not(i.clone()), holds.clone()]),
                    f: and(vec![not(i.clone()), not(holds)]),
                    n: Formula::False,
                    i,
                }
            }
        })
    }

    fn equality(
        &mut self,
        a: &OclExpr,
        b: &OclExpr,
        env: &mut Env,
    ) -> Result<Four, TranslateError> {
        let ty = a.ty().join(&b.ty()).ok_or_else(|| {
            TranslateError::Unsupported(format!("comparison of {} with {}", a.ty(), b.ty()))
        })?;
        let defined = |i: &Formula, same: Formula| -> Four {
            Four {
                t: Formula::and([Formula::not(i.clone()), same.clone()]),
                f: Formula::and([Formula::not(i.clone()), Formula::not(same)]),
                n: Formula::False,
                i: i.clone(),
            }
        };
        Ok(match ty {
            OclType::Void | OclType::Invalid => {
                let invalid = matches!(a, OclExpr::Invalid) || matches!(b, OclExpr::Invalid);
                Four::constant(if invalid { 3 } else { 0 })
            }
            OclType::Boolean => {
                let (x, y) = (self.four_in(a, env)?, self.four_in(b, env)?);
                let i = Formula::or([x.i.clone(), y.i.clone()]);
                let same = Formula::or([
                    Formula::and([x.t, y.t]),
                    Formula::and([x.f, y.f]),
                    Formula::and([x.n, y.n]),
                ]);
                defined(&i, same)
            }
            OclType::Set(_) => {
                let (x, y) = (self.set_in(a, env)?, self.set_in(b, env)?);
                let v = self.fresh.name("v");
                let t = Term::var(&v, x.elem);
                let i = Formula::or([x.inval.clone(), y.inval.clone()]);
                let same = forall(
                    &v,
                    x.elem,
                    Formula::iff(x.contains(t.clone()), y.contains(t)),
                );
                defined(&i, same)
            }
            scalar => {
                let s = ocl_sort(&scalar)?;
                let x = self.term_in(a, s, env)?;
                let y = self.term_in(b, s, env)?;
                let i = Formula::or([
                    Formula::eq(x.clone(), inval_of(s)),
                    Formula::eq(y.clone(), inval_of(s)),
                ]);
                defined(&i, Formula::eq(x, y))
            }
        })
    }

    /// Translates a scalar expression to a term of sort `sort`.
    fn term_in(&mut self, e: &OclExpr, sort: Sort, env: &mut Env) -> Result<Term, TranslateError> {
        let t = match e {
            OclExpr::Int(i) => {
                let t = Term::int(*i);
                self.literal_axiom(&t);
                t
            }
            OclExpr::Str(s) => {
                let t = Term::string(s.clone());
                self.literal_axiom(&t);
                t
            }
            OclExpr::Null => null_of(sort),
            OclExpr::Invalid => inval_of(sort),
            OclExpr::Var(v, _) => self
                .bound(env, v)
                .ok_or_else(|| TranslateError::Unsupported(format!("unbound variable `{v}`")))?,
            OclExpr::Attr {
                src, class, attr, ..
            } => {
                let obj = self.term_in(src, Sort::Classifier, env)?;
                let a = self.dm.attribute(class, attr).ok_or_else(|| {
                    TranslateError::Unsupported(format!("attribute {class}.{attr}"))
                })?;
                attr_decl(self.dm, a).app(vec![obj])
            }
            other => {
                return Err(TranslateError::Unsupported(format!(
                    "`{other}` used as a scalar value"
                )))
            }
        };
        if t.sort() != sort {
            return Err(TranslateError::Unsupported(format!(
                "`{e}` has sort {} where {sort} is expected",
                t.sort()
            )));
        }
        Ok(t)
    }

    fn literal_axiom(&mut self, t: &Term) {
        let s = t.sort();
        self.defs.assert(Formula::and([
            Formula::neq(t.clone(), null_of(s)),
            Formula::neq(t.clone(), inval_of(s)),
        ]));
    }

    /// Translates a set-valued expression, defining its predicate on first
    /// use. The predicate is parameterized by the iterator variables free in
    /// `e`, so one definition serves every binding of them.
    fn set_in(&mut self, e: &OclExpr, env: &mut Env) -> Result<SetRep, TranslateError> {
        let elem =
            ocl_sort(e.ty().element().ok_or_else(|| {
                TranslateError::Unsupported(format!("`{e}` is not a collection"))
            })?)?;
        let mut params: Vec<(String, Term)> = Vec::new();
        for (name, _) in e.free_vars() {
            if let Some((_, t)) = env.iter().rev().find(|(n, _)| *n == name) {
                params.push((name, t.clone()));
            }
        }
        let key = (
            e.to_string(),
            params
                .iter()
                .map(|(n, t)| (n.clone(), t.sort()))
                .collect::<Vec<_>>(),
        );
        let pred = match self.cache.get(&key) {
            Some(d) => d.clone(),
            None => {
                let mut arg_sorts: Vec<Sort> = params.iter().map(|(_, t)| t.sort()).collect();
                arg_sorts.push(elem);
                let pred = self
                    .defs
                    .declare(Decl::predicate(self.fresh.name("set"), arg_sorts))?;
                self.cache.insert(key, pred.clone());
                let mut inner: Env = Vec::new();
                let mut bound = Vec::new();
                let mut args = Vec::new();
                for (n, t) in &params {
                    let v = self.fresh.name("v");
                    bound.push((v.clone(), t.sort()));
                    args.push(Term::var(&v, t.sort()));
                    inner.push((n.clone(), Term::var(&v, t.sort())));
                }
                let u = self.fresh.name("v");
                let ut = Term::var(&u, elem);
                bound.push((u, elem));
                let body = self.membership(e, ut.clone(), &mut inner)?;
                args.push(ut);
                let def = Formula::forall(bound, Formula::iff(pred.holds(args), body));
                self.defs
                    .assert_noted(def, Some(format!("{} := {}", pred.name, e)));
                pred
            }
        };
        let inval = self.set_inval(e, env)?;
        Ok(SetRep {
            pred,
            args: params.into_iter().map(|(_, t)| t).collect(),
            elem,
            inval,
        })
    }

    /// When `u` belongs to the set denoted by `e`.
    fn membership(
        &mut self,
        e: &OclExpr,
        u: Term,
        env: &mut Env,
    ) -> Result<Formula, TranslateError> {
        let elem = u.sort();
        Ok(match e {
            OclExpr::AllInstances(c) => class_decl(c).holds(vec![u]),
            OclExpr::Nav {
                src,
                assoc,
                towards_right,
                ..
            } => {
                let t = self.term_in(src, Sort::Classifier, env)?;
                let args = if *towards_right {
                    vec![t, u]
                } else {
                    vec![u, t]
                };
                assoc_decl(assoc).holds(args)
            }
            OclExpr::Iterate {
                kind,
                src,
                var,
                body,
                ..
            } => {
                let s = self.set_in(src, env)?;
                match kind {
                    IterKind::Select | IterKind::Reject => {
                        env.push((var.clone(), u.clone()));
                        let b = self.four_in(body, env);
                        env.pop();
                        let b = b?;
                        let keep = if *kind == IterKind::Select { b.t } else { b.f };
                        Formula::and([s.contains(u), keep])
                    }
                    IterKind::Collect => {
                        let v = self.fresh.name("v");
                        let x = Term::var(&v, s.elem);
                        env.push((var.clone(), x.clone()));
                        let t = self.term_in(body, elem, env);
                        env.pop();
                        exists(
                            &v,
                            s.elem,
                            Formula::and([s.contains(x), Formula::eq(u, t?)]),
                        )
                    }
                    _ => unreachable!("Boolean iterators are not sets"),
                }
            }
            OclExpr::Coll { op, src, arg } => {
                let s = self.set_in(src, env)?;
                let arg = arg.as_deref().expect("set operations take an argument");
                match op {
                    CollOp::Including | CollOp::Excluding => {
                        let t = self.term_in(arg, elem, env)?;
                        if *op == CollOp::Including {
                            Formula::or([s.contains(u.clone()), Formula::eq(u, t)])
                        } else {
                            Formula::and([s.contains(u.clone()), Formula::neq(u, t)])
                        }
                    }
                    CollOp::Union | CollOp::Intersection => {
                        let r = self.set_in(arg, env)?;
                        let both = [s.contains(u.clone()), r.contains(u)];
                        if *op == CollOp::Union {
                            Formula::or(both)
                        } else {
                            Formula::and(both)
                        }
                    }
                    _ => unreachable!("emptiness tests are not sets"),
                }
            }
            other => {
                return Err(TranslateError::Unsupported(format!(
                    "set expression `{other}`"
                )))
            }
        })
    }

    /// When the set denoted by `e` is invalid.
    fn set_inval(&mut self, e: &OclExpr, env: &mut Env) -> Result<Formula, TranslateError> {
        Ok(match e {
            OclExpr::AllInstances(_) => Formula::False,
            OclExpr::Nav { src, .. } => {
                let t = self.term_in(src, Sort::Classifier, env)?;
                is_undef(&t)
            }
            OclExpr::Iterate {
                kind,
                src,
                var,
                body,
                ..
            } => {
                let s = self.set_in(src, env)?;
                let v = self.fresh.name("v");
                let x = Term::var(&v, s.elem);
                env.push((var.clone(), x.clone()));
                let bad = match kind {
                    IterKind::Select | IterKind::Reject => {
                        self.four_in(body, env).map(|b| Formula::or([b.n, b.i]))
                    }
                    _ => {
                        let body_sort = ocl_sort(&body.ty());
                        body_sort.and_then(|bs| {
                            self.term_in(body, bs, env)
                                .map(|t| Formula::eq(t, inval_of(bs)))
                        })
                    }
                };
                env.pop();
                Formula::or([
                    s.inval.clone(),
                    exists(&v, s.elem, Formula::and([s.contains(x), bad?])),
                ])
            }
            OclExpr::Coll { op, src, arg } => {
                let s = self.set_in(src, env)?;
                let arg = arg.as_deref().expect("set operations take an argument");
                let other = match op {
                    CollOp::Including | CollOp::Excluding => {
                        let t = self.term_in(arg, s.elem, env)?;
                        Formula::eq(t, inval_of(s.elem))
                    }
                    _ => self.set_in(arg, env)?.inval,
                };
                Formula::or([s.inval, other])
            }
            other => {
                return Err(TranslateError::Unsupported(format!(
                    "set expression `{other}`"
                )))
            }
        })
    }
}

#[cfg(test)]
mod tests;
