//! SQL to MSFOL: schema axioms and the translation of selects.
//!
//! Rows of every table, subselect and join are numbered by integers; the
//! predicate `index_<T>` says which integers number a row of `T`. Columns
//! and expressions become unary functions from row numbers to values whose
//! defining axioms follow the executor's three-valued semantics.

use std::collections::HashMap;

use thiserror::Error;

use crate::datamodel::DataModel;
use crate::msfol::{CmpOp, Decl, Formula, Fresh, Sort, Term, Theory, TheoryError};
use crate::ocl2msfol::{assoc_decl, attr_decl, class_decl, inval_of, null_of};
use crate::relational::{o2s, ColumnSource, SqlSchema, SqlType, Table, TableKind};
use crate::sql::{FromItem, FromSource, Side, SqlCmp, SqlExpr, SqlSelect};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum S2fError {
    #[error("unknown table `{0}`")]
    UnknownTable(String),
    #[error("column `{0}` has no enclosing from-item")]
    UnboundColumn(String),
    #[error(transparent)]
    Theory(#[from] TheoryError),
}

/// Generated symbol names, handed out in preorder over the select AST, and
/// the source text each one stands for.
#[derive(Debug, Clone, Default)]
pub struct NamingRegistry {
    fresh: Fresh,
    entries: Vec<(String, String)>,
}

impl NamingRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    fn name(&mut self, prefix: &str, node: impl Into<String>) -> String {
        let n = self.fresh.name(prefix);
        self.entries.push((n.clone(), node.into()));
        n
    }

    /// `(symbol, source text)` pairs in allocation order.
    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn source_of(&self, symbol: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(s, _)| s == symbol)
            .map(|(_, src)| src.as_str())
    }
}

/// A theory whose unsatisfiability licenses the translation of a scalar
/// subselect: it asserts that the subselect does not return exactly one row.
#[derive(Debug, Clone)]
pub struct ProofObligation {
    pub subselect: SqlSelect,
    pub index: Decl,
    pub theory: Theory,
}

/// The translation of a select: its index predicate, one value function per
/// item, the defining axioms and the obligations of its scalar subselects.
#[derive(Debug, Clone)]
pub struct SelectTranslation {
    pub index: Decl,
    pub items: Vec<Decl>,
    pub axioms: Theory,
    pub obligations: Vec<ProofObligation>,
}

pub fn sql_sort(t: SqlType) -> Sort {
    match t {
        SqlType::Int => Sort::Int,
        SqlType::Varchar => Sort::String,
        SqlType::Bool => Sort::SqlBool,
        SqlType::Id => Sort::Classifier,
    }
}

pub fn id_decl() -> Decl {
    Decl::function("id", vec![Sort::Int], Sort::Classifier)
}

pub fn index_decl(table: &str) -> Decl {
    Decl::predicate(format!("index_{table}"), vec![Sort::Int])
}

/// `left_<assoc>` or `right_<assoc>`: the row number whose id is the
/// object at that end of an association row.
pub fn end_decl(assoc: &str, right: bool) -> Decl {
    let side = if right { "right" } else { "left" };
    Decl::function(format!("{side}_{assoc}"), vec![Sort::Int], Sort::Int)
}

pub fn column_decl(table: &str, column: &str, ty: SqlType) -> Decl {
    Decl::function(
        format!("val_{table}.{column}"),
        vec![Sort::Int],
        sql_sort(ty),
    )
}

fn ivar(n: &str) -> Term {
    Term::var(n, Sort::Int)
}

fn ints(ns: &[&str]) -> Vec<(String, Sort)> {
    ns.iter().map(|n| (n.to_string(), Sort::Int)).collect()
}

fn objs(ns: &[&str]) -> Vec<(String, Sort)> {
    ns.iter()
        .map(|n| (n.to_string(), Sort::Classifier))
        .collect()
}

/// `index` holds for exactly one row number.
pub fn exactly_one_row(index: &Decl) -> Formula {
    Formula::exists(
        ints(&["x"]),
        Formula::and([
            index.holds(vec![ivar("x")]),
            Formula::forall(
                ints(&["y"]),
                Formula::implies(
                    Formula::neq(ivar("y"), ivar("x")),
                    Formula::not(index.holds(vec![ivar("y")])),
                ),
            ),
        ]),
    )
}

fn declare(t: &mut Theory, d: Decl) -> Decl {
    // Schema symbols are derived from a validated data model.
    t.declare(d).expect("schema symbols are unique")
}

/// Index and column axioms for the tables of `o2s(dm)`.
pub fn s2f_schema(dm: &DataModel) -> Theory {
    let mut t = Theory::new();
    let id = declare(&mut t, id_decl());
    let idx = |v: &str| id.app(vec![ivar(v)]);
    for table in o2s(dm).tables {
        let index = declare(&mut t, index_decl(&table.name));
        let at = |v: &str| index.holds(vec![ivar(v)]);
        match table.kind {
            TableKind::Class => {
                let class = class_decl(&table.name);
                let c = || Term::var("c", Sort::Classifier);
                t.assert(Formula::forall(
                    ints(&["x"]),
                    Formula::implies(
                        at("x"),
                        Formula::exists(
                            objs(&["c"]),
                            Formula::and([class.holds(vec![c()]), Formula::eq(c(), idx("x"))]),
                        ),
                    ),
                ));
                t.assert(Formula::forall(
                    objs(&["c"]),
                    Formula::implies(
                        class.holds(vec![c()]),
                        Formula::exists(
                            ints(&["x"]),
                            Formula::and([at("x"), Formula::eq(c(), idx("x"))]),
                        ),
                    ),
                ));
                t.assert(Formula::forall(
                    ints(&["x", "y"]),
                    Formula::implies(
                        Formula::and([at("x"), at("y"), Formula::eq(idx("x"), idx("y"))]),
                        Formula::eq(ivar("x"), ivar("y")),
                    ),
                ));
            }
            TableKind::Association => {
                let assoc = assoc_decl(&table.name);
                let l = declare(&mut t, end_decl(&table.name, false));
                let r = declare(&mut t, end_decl(&table.name, true));
                let end = |f: &Decl, v: &str| id.app(vec![f.app(vec![ivar(v)])]);
                let (c1, c2) = (
                    || Term::var("c1", Sort::Classifier),
                    || Term::var("c2", Sort::Classifier),
                );
                t.assert(Formula::forall(
                    ints(&["x", "y"]),
                    Formula::implies(
                        Formula::and([
                            at("x"),
                            at("y"),
                            Formula::eq(end(&l, "x"), end(&l, "y")),
                            Formula::eq(end(&r, "x"), end(&r, "y")),
                        ]),
                        Formula::eq(ivar("x"), ivar("y")),
                    ),
                ));
                t.assert(Formula::forall(
                    ints(&["x"]),
                    Formula::implies(
                        at("x"),
                        Formula::exists(
                            objs(&["c1", "c2"]),
                            Formula::and([
                                assoc.holds(vec![c1(), c2()]),
                                Formula::eq(c1(), end(&l, "x")),
                                Formula::eq(c2(), end(&r, "x")),
                            ]),
                        ),
                    ),
                ));
                t.assert(Formula::forall(
                    objs(&["c1", "c2"]),
                    Formula::implies(
                        assoc.holds(vec![c1(), c2()]),
                        Formula::exists(
                            ints(&["x"]),
                            Formula::and([
                                at("x"),
                                Formula::eq(c1(), end(&l, "x")),
                                Formula::eq(c2(), end(&r, "x")),
                            ]),
                        ),
                    ),
                ));
            }
        }
        for col in &table.columns {
            let f = declare(&mut t, column_decl(&table.name, &col.name, col.ty));
            let value = match &col.source {
                ColumnSource::ObjectId => idx("x"),
                ColumnSource::Attribute(a) => {
                    let a = dm
                        .attribute(&table.name, a)
                        .expect("attribute columns come from the data model");
                    attr_decl(dm, a).app(vec![idx("x")])
                }
                ColumnSource::End { right } => {
                    id.app(vec![end_decl(&table.name, *right).app(vec![ivar("x")])])
                }
            };
            t.assert(Formula::forall(
                ints(&["x"]),
                Formula::eq(f.app(vec![ivar("x")]), value),
            ));
        }
    }
    t
}

/// A from-item seen from the select that uses it.
#[derive(Debug, Clone)]
struct Source {
    name: String,
    index: Decl,
    cols: Vec<(String, Decl)>,
}

/// The rows a select's filters and items are evaluated over.
enum Row {
    Empty,
    Single(Source),
    Join(Box<JoinRow>),
}

struct JoinRow {
    name: String,
    index: Decl,
    left: Decl,
    right: Decl,
    a: Source,
    b: Source,
    cols: HashMap<(Side, usize), Decl>,
}

struct S2f<'a> {
    schema: SqlSchema,
    reg: &'a mut NamingRegistry,
    obligations: Vec<ProofObligation>,
}

/// Translates `s`; generated names come from `reg`. The axioms mention the
/// symbols of [`s2f_schema`] without declaring them.
pub fn s2f_select(
    s: &SqlSelect,
    dm: &DataModel,
    reg: &mut NamingRegistry,
) -> Result<SelectTranslation, S2fError> {
    let mut tr = S2f {
        schema: o2s(dm),
        reg,
        obligations: Vec::new(),
    };
    let (src, axioms) = tr.select(s)?;
    Ok(SelectTranslation {
        index: src.index,
        items: src.cols.into_iter().map(|(_, d)| d).collect(),
        axioms,
        obligations: tr.obligations,
    })
}

fn sql_val(t: &Term, v: bool) -> Formula {
    Formula::eq(
        t.clone(),
        if v {
            Term::sql_true()
        } else {
            Term::sql_false()
        },
    )
}

fn sql_null(t: &Term) -> Formula {
    Formula::eq(t.clone(), Term::sql_null())
}

impl S2f<'_> {
    fn table(&self, name: &str) -> Result<&Table, S2fError> {
        self.schema
            .table(name)
            .ok_or_else(|| S2fError::UnknownTable(name.to_string()))
    }

    fn source_item(&mut self, item: &FromItem, th: &mut Theory) -> Result<Source, S2fError> {
        match &item.source {
            FromSource::Table(name) => {
                let table = self.table(name)?;
                Ok(Source {
                    name: name.clone(),
                    index: index_decl(name),
                    cols: table
                        .columns
                        .iter()
                        .map(|c| (c.name.clone(), column_decl(name, &c.name, c.ty)))
                        .collect(),
                })
            }
            FromSource::Subselect(s) => {
                let (src, sub) = self.select(s)?;
                th.extend(&sub)?;
                Ok(src)
            }
        }
    }

    fn select(&mut self, s: &SqlSelect) -> Result<(Source, Theory), S2fError> {
        let name = self.reg.name("sel", s.to_string());
        let index = Decl::predicate(format!("index_{name}"), vec![Sort::Int]);
        let mut th = Theory::new();
        th.declare(index.clone())?;
        let mut row = match &s.from {
            None => Row::Empty,
            Some(from) => {
                let a = self.source_item(&from.item, &mut th)?;
                match &from.join {
                    None => Row::Single(a),
                    Some(j) => {
                        let b = self.source_item(&j.item, &mut th)?;
                        self.join(a, b, &format!("{} JOIN {}", from.item, j.item), &mut th)?
                    }
                }
            }
        };
        let base = match &row {
            Row::Empty if s.filter.is_none() => None,
            Row::Empty => {
                let one = self.reg.name("row", format!("FROM-less rows of {s}"));
                let one = th.declare(Decl::predicate(format!("index_{one}"), vec![Sort::Int]))?;
                th.assert(exactly_one_row(&one));
                Some((name.clone(), one))
            }
            Row::Single(src) => Some((src.name.clone(), src.index.clone())),
            Row::Join(j) => Some((j.name.clone(), j.index.clone())),
        };
        match base {
            None => th.assert_noted(exactly_one_row(&index), Some(format!("{name}: one row"))),
            Some((ctx, base)) => {
                let mut conds = vec![base.holds(vec![ivar("x")])];
                let on = s
                    .from
                    .as_ref()
                    .and_then(|f| f.join.as_ref())
                    .and_then(|j| j.on.as_ref());
                for cond in on.into_iter().chain(s.filter.as_ref()) {
                    let f = self.expr(cond, &mut row, &ctx, &base, &mut th)?;
                    conds.push(sql_val(&f.app(vec![ivar("x")]), true));
                }
                th.assert_noted(
                    Formula::forall(
                        ints(&["x"]),
                        Formula::iff(index.holds(vec![ivar("x")]), Formula::and(conds)),
                    ),
                    Some(format!("{name}: {s}")),
                );
            }
        }
        let mut cols = Vec::new();
        for (i, item) in s.items.iter().enumerate() {
            let f = self.expr(&item.expr, &mut row, &name, &index, &mut th)?;
            let label = item
                .output_name()
                .map_or_else(|| format!("c{i}"), str::to_string);
            cols.push((label, f));
        }
        Ok((Source { name, index, cols }, th))
    }

    /// Declares the join of `a` and `b` with its pairing axioms: the join's
    /// rows correspond one-to-one with pairs of rows of `a` and `b`.
    fn join(&mut self, a: Source, b: Source, text: &str, th: &mut Theory) -> Result<Row, S2fError> {
        let name = self.reg.name("join", text);
        let index = th.declare(Decl::predicate(format!("index_{name}"), vec![Sort::Int]))?;
        let left = th.declare(Decl::function(
            format!("left_{name}"),
            vec![Sort::Int],
            Sort::Int,
        ))?;
        let right = th.declare(Decl::function(
            format!("right_{name}"),
            vec![Sort::Int],
            Sort::Int,
        ))?;
        let at = |d: &Decl, t: Term| d.holds(vec![t]);
        let l = |v: &str| left.app(vec![ivar(v)]);
        let r = |v: &str| right.app(vec![ivar(v)]);
        th.assert_noted(
            Formula::forall(
                ints(&["x", "y"]),
                Formula::implies(
                    Formula::and([
                        at(&index, ivar("x")),
                        at(&index, ivar("y")),
                        Formula::eq(l("x"), l("y")),
                        Formula::eq(r("x"), r("y")),
                    ]),
                    Formula::eq(ivar("x"), ivar("y")),
                ),
            ),
            Some(format!("{name}: {text}")),
        );
        th.assert(Formula::forall(
            ints(&["x"]),
            Formula::implies(
                at(&index, ivar("x")),
                Formula::and([at(&a.index, l("x")), at(&b.index, r("x"))]),
            ),
        ));
        th.assert(Formula::forall(
            ints(&["y", "z"]),
            Formula::implies(
                Formula::and([at(&a.index, ivar("y")), at(&b.index, ivar("z"))]),
                Formula::exists(
                    ints(&["x"]),
                    Formula::and([
                        at(&index, ivar("x")),
                        Formula::eq(l("x"), ivar("y")),
                        Formula::eq(r("x"), ivar("z")),
                    ]),
                ),
            ),
        ));
        Ok(Row::Join(Box::new(JoinRow {
            name,
            index,
            left,
            right,
            a,
            b,
            cols: HashMap::new(),
        })))
    }

    /// The value of column `(side, i)` in row `x`. Join columns get their own
    /// functions defined through `left_<join>`/`right_<join>`.
    fn column(
        &mut self,
        row: &mut Row,
        side: Side,
        i: usize,
        th: &mut Theory,
    ) -> Result<Term, S2fError> {
        let x = ivar("x");
        match row {
            Row::Empty => Err(S2fError::UnboundColumn(format!("#{i}"))),
            Row::Single(src) => Ok(src.cols[i].1.app(vec![x])),
            Row::Join(j) => {
                let JoinRow {
                    name,
                    left,
                    right,
                    a,
                    b,
                    cols,
                    ..
                } = &mut **j;
                if let Some(f) = cols.get(&(side, i)) {
                    return Ok(f.app(vec![x]));
                }
                let (src, step) = match side {
                    Side::From => (&*a, &*left),
                    Side::Join => (&*b, &*right),
                };
                let (col, inner) = &src.cols[i];
                let f = th.declare(Decl::function(
                    format!("val_{name}.{}.{col}", src.name),
                    vec![Sort::Int],
                    inner.result,
                ))?;
                th.assert(Formula::forall(
                    ints(&["x"]),
                    Formula::eq(
                        f.app(vec![x.clone()]),
                        inner.app(vec![step.app(vec![x.clone()])]),
                    ),
                ));
                cols.insert((side, i), f.clone());
                Ok(f.app(vec![x]))
            }
        }
    }

    /// Declares `val_<ctx>!n` for `e` with its defining axiom and returns it.
    /// `guard` is the index predicate of the rows `e` is evaluated over.
    fn expr(
        &mut self,
        e: &SqlExpr,
        row: &mut Row,
        ctx: &str,
        guard: &Decl,
        th: &mut Theory,
    ) -> Result<Decl, S2fError> {
        let sort = sql_sort(e.ty());
        let f = th.declare(Decl::function(
            self.reg.name(&format!("val_{ctx}"), e.to_string()),
            vec![Sort::Int],
            sort,
        ))?;
        let x = ivar("x");
        let v = f.app(vec![x.clone()]);
        let sub = |tr: &mut Self, row: &mut Row, th: &mut Theory, a: &SqlExpr| {
            tr.expr(a, row, ctx, guard, th)
                .map(|d| d.app(vec![ivar("x")]))
        };
        let body = match e {
            SqlExpr::Bool(b) => sql_val(&v, *b),
            SqlExpr::Null(_) => Formula::eq(v, null_of(sort)),
            SqlExpr::Int(i) => {
                literal_axiom(th, Term::int(*i));
                Formula::eq(v, Term::int(*i))
            }
            SqlExpr::Str(s) => {
                literal_axiom(th, Term::string(s.clone()));
                Formula::eq(v, Term::string(s.clone()))
            }
            SqlExpr::Var(n, _) => Formula::eq(v, Decl::constant(n.clone(), sort).term()),
            SqlExpr::Column(c) => {
                let t = self.column(row, c.side, c.index, th)?;
                Formula::eq(v, t)
            }
            SqlExpr::Not(a) => {
                let a = sub(self, row, th, a)?;
                Formula::and([
                    Formula::iff(sql_val(&v, true), sql_val(&a, false)),
                    Formula::iff(sql_val(&v, false), sql_val(&a, true)),
                    Formula::iff(sql_null(&v), sql_null(&a)),
                ])
            }
            SqlExpr::And(a, b) | SqlExpr::Or(a, b) => {
                // OR is AND with the roles of TRUE and FALSE exchanged.
                let dominant = matches!(e, SqlExpr::Or(..));
                let (a, b) = (sub(self, row, th, a)?, sub(self, row, th, b)?);
                let some = Formula::or([sql_val(&a, dominant), sql_val(&b, dominant)]);
                Formula::and([
                    Formula::iff(sql_val(&v, dominant), some.clone()),
                    Formula::iff(
                        sql_val(&v, !dominant),
                        Formula::and([sql_val(&a, !dominant), sql_val(&b, !dominant)]),
                    ),
                    Formula::iff(
                        sql_null(&v),
                        Formula::and([
                            Formula::not(some),
                            Formula::or([sql_null(&a), sql_null(&b)]),
                        ]),
                    ),
                ])
            }
            SqlExpr::Cmp(op, a, b) => {
                let (a, b) = (sub(self, row, th, a)?, sub(self, row, th, b)?);
                let s = a.sort();
                let undef = Formula::or([
                    Formula::eq(a.clone(), null_of(s)),
                    Formula::eq(b.clone(), null_of(s)),
                ]);
                let holds = match op {
                    SqlCmp::Eq => Formula::eq(a, b),
                    SqlCmp::Neq => Formula::neq(a, b),
                    SqlCmp::Lt => Formula::cmp(CmpOp::Lt, a, b),
                    SqlCmp::Le => Formula::cmp(CmpOp::Le, a, b),
                    SqlCmp::Gt => Formula::cmp(CmpOp::Gt, a, b),
                    SqlCmp::Ge => Formula::cmp(CmpOp::Ge, a, b),
                };
                Formula::and([
                    Formula::iff(sql_null(&v), undef.clone()),
                    Formula::iff(
                        sql_val(&v, true),
                        Formula::and([Formula::not(undef.clone()), holds.clone()]),
                    ),
                    Formula::iff(
                        sql_val(&v, false),
                        Formula::and([Formula::not(undef), Formula::not(holds)]),
                    ),
                ])
            }
            SqlExpr::Case {
                when,
                then,
                otherwise,
            } => {
                let w = sub(self, row, th, when)?;
                let t = sub(self, row, th, then)?;
                let o = sub(self, row, th, otherwise)?;
                Formula::and([
                    Formula::implies(sql_val(&w, true), Formula::eq(v.clone(), t)),
                    Formula::implies(Formula::not(sql_val(&w, true)), Formula::eq(v, o)),
                ])
            }
            SqlExpr::IsNull(a) => {
                let a = sub(self, row, th, a)?;
                let null = Formula::eq(a.clone(), null_of(a.sort()));
                Formula::and([
                    Formula::iff(sql_val(&v, true), null.clone()),
                    Formula::iff(sql_val(&v, false), Formula::not(null)),
                ])
            }
            SqlExpr::Exists(s) => {
                let (src, sub_th) = self.select(s)?;
                th.extend(&sub_th)?;
                let some = Formula::exists(ints(&["y"]), src.index.holds(vec![ivar("y")]));
                Formula::and([
                    Formula::iff(sql_val(&v, true), some.clone()),
                    Formula::iff(sql_val(&v, false), Formula::not(some)),
                ])
            }
            SqlExpr::Scalar(s) => {
                let (src, sub_th) = self.select(s)?;
                let mut goal = sub_th.clone();
                goal.assert_noted(
                    Formula::not(exactly_one_row(&src.index)),
                    Some(format!("{}: not exactly one row", src.name)),
                );
                self.obligations.push(ProofObligation {
                    subselect: (**s).clone(),
                    index: src.index.clone(),
                    theory: goal,
                });
                th.extend(&sub_th)?;
                let w = th.declare(Decl::constant(self.reg.name("w", s.to_string()), sort))?;
                th.assert_noted(
                    Formula::forall(
                        ints(&["x"]),
                        Formula::implies(guard.holds(vec![x.clone()]), Formula::eq(v, w.term())),
                    ),
                    Some(format!("{}: ({s})", f.name)),
                );
                th.assert(Formula::exists(
                    ints(&["y"]),
                    Formula::and([
                        src.index.holds(vec![ivar("y")]),
                        Formula::eq(src.cols[0].1.app(vec![ivar("y")]), w.term()),
                    ]),
                ));
                return Ok(f);
            }
        };
        th.assert_noted(
            Formula::forall(ints(&["x"]), body),
            Some(format!("{}: {e}", f.name)),
        );
        Ok(f)
    }
}

/// Literals denote proper values, distinct from null and invalid.
fn literal_axiom(th: &mut Theory, t: Term) {
    let s = t.sort();
    th.assert(Formula::and([
        Formula::neq(t.clone(), null_of(s)),
        Formula::neq(t, inval_of(s)),
    ]));
}
