//! Ground theories for checking the translations against the oracles.

use crate::datamodel::{AttrType, DataModel, ObjectModel, Value, VarDecl};
use crate::msfol::{Decl, Formula, Sort, Term, Theory, TheoryError};
use crate::ocl::OclExpr;
use crate::ocl2msfol::{
    assoc_decl, attr_decl, class_decl, declare_frees, free_constant, inval_of, null_of, o2f_data,
    OclTranslator, TranslateError,
};
use crate::relational::SqlValue;
use crate::sql2msfol::{exactly_one_row, SelectTranslation};

/// The constant standing for object `id` in pinned theories.
pub fn object_constant(id: i64) -> Decl {
    Decl::constant(format!("obj!{id}"), Sort::Classifier)
}

fn proper(t: &mut Theory, term: Term) -> Term {
    t.assert(Formula::and([
        Formula::neq(term.clone(), null_of(term.sort())),
        Formula::neq(term.clone(), inval_of(term.sort())),
    ]));
    term
}

fn value_term(t: &mut Theory, v: &Value, sort: Sort) -> Term {
    match v {
        Value::Null => null_of(sort),
        Value::Int(i) => proper(t, Term::int(*i)),
        Value::Str(s) => proper(t, Term::string(s.clone())),
        Value::Obj(o) => object_constant(*o).term(),
        Value::Bool(true) => Term::sql_true(),
        Value::Bool(false) => Term::sql_false(),
    }
}

/// Ground axioms fixing the data-model symbols to the finite `om` and the
/// free variables to `sigma`. Meant to be added to a theory that already
/// declares the data model and the free variables.
pub fn pin_instance(
    dm: &DataModel,
    om: &ObjectModel,
    sigma: &crate::datamodel::Assignment,
    frees: &[VarDecl],
) -> Result<Theory, TheoryError> {
    let mut t = Theory::named("instance");
    let c = || Term::var("c", Sort::Classifier);
    let d = || Term::var("d", Sort::Classifier);
    let mut objs = Vec::new();
    for o in om.objects() {
        objs.push(t.declare(object_constant(o.id))?.term());
    }
    let mut all = objs.clone();
    all.extend([null_of(Sort::Classifier), inval_of(Sort::Classifier)]);
    t.assert(Formula::distinct(all));
    for class in dm.classes() {
        let members = om
            .objects_of(class)
            .map(|o| Formula::eq(c(), object_constant(o.id).term()));
        t.assert(Formula::forall(
            vec![("c".into(), Sort::Classifier)],
            Formula::iff(class_decl(class).holds(vec![c()]), Formula::or(members)),
        ));
    }
    for a in dm.attributes() {
        let f = attr_decl(dm, a);
        for o in om.objects_of(&a.owner) {
            let v = om.value(o.id, &a.name);
            let sort = match a.ty {
                AttrType::Integer => Sort::Int,
                AttrType::String => Sort::String,
                AttrType::Class(_) => Sort::Classifier,
            };
            let v = value_term(&mut t, &v, sort);
            t.assert(Formula::eq(f.app(vec![object_constant(o.id).term()]), v));
        }
    }
    for s in dm.associations() {
        let pairs = om.links().iter().filter(|l| l.assoc == s.name).map(|l| {
            Formula::and([
                Formula::eq(c(), object_constant(l.left).term()),
                Formula::eq(d(), object_constant(l.right).term()),
            ])
        });
        t.assert(Formula::forall(
            vec![
                ("c".into(), Sort::Classifier),
                ("d".into(), Sort::Classifier),
            ],
            Formula::iff(
                assoc_decl(&s.name).holds(vec![c(), d()]),
                Formula::or(pairs),
            ),
        ));
    }
    for v in frees {
        let k = free_constant(v);
        let val = sigma.get(&v.name).cloned().unwrap_or(Value::Null);
        let val = value_term(&mut t, &val, k.result);
        t.assert(Formula::eq(k.term(), val));
    }
    Ok(t)
}

/// What executing a select produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SqlOutcome {
    NoRows,
    SeveralRows,
    /// A single row whose first cell holds this value. Object ids are
    /// given as integers.
    One(SqlValue),
}

/// States `outcome` about a translated select.
pub fn outcome_formula(sel: &SelectTranslation, outcome: &SqlOutcome) -> Formula {
    let x = || Term::var("x", Sort::Int);
    let y = || Term::var("y", Sort::Int);
    let at = |t: Term| sel.index.holds(vec![t]);
    match outcome {
        SqlOutcome::NoRows => Formula::not(Formula::exists(vec![("x".into(), Sort::Int)], at(x()))),
        SqlOutcome::SeveralRows => Formula::exists(
            vec![("x".into(), Sort::Int), ("y".into(), Sort::Int)],
            Formula::and([Formula::neq(x(), y()), at(x()), at(y())]),
        ),
        SqlOutcome::One(v) => {
            let item = &sel.items[0];
            let v = match v {
                SqlValue::Null => null_of(item.result),
                SqlValue::Bool(true) => Term::sql_true(),
                SqlValue::Bool(false) => Term::sql_false(),
                SqlValue::Int(i) if item.result == Sort::Classifier => object_constant(*i).term(),
                SqlValue::Int(i) => Term::int(*i),
                SqlValue::Str(s) => Term::string(s.clone()),
            };
            Formula::and([
                exactly_one_row(&sel.index),
                Formula::forall(
                    vec![("x".into(), Sort::Int)],
                    Formula::implies(at(x()), Formula::eq(item.app(vec![x()]), v)),
                ),
            ])
        }
    }
}

/// For each pair of the four valuations of `e`, a theory asserting both.
/// All six are unsatisfiable when the valuations are exclusive.
pub fn exclusivity_theories(
    dm: &DataModel,
    frees: &[VarDecl],
    e: &OclExpr,
) -> Result<Vec<(String, Theory)>, TranslateError> {
    let mut base = o2f_data(dm);
    declare_frees(frees, &mut base)?;
    let mut tr = OclTranslator::new(dm, frees);
    let four = tr.four(e)?;
    base.extend(tr.defs())?;
    let names = ["true", "false", "null", "invalid"];
    let fs = four.all();
    let mut out = Vec::new();
    for i in 0..4 {
        for j in i + 1..4 {
            let mut t = base.clone();
            t.name = Some(format!("{e}: {} and {}", names[i], names[j]));
            t.assert(Formula::and([fs[i].clone(), fs[j].clone()]));
            out.push((format!("{}-{}", names[i], names[j]), t));
        }
    }
    Ok(out)
}
