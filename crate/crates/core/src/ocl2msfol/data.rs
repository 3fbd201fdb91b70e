//! Symbols and axioms describing a data model.

use crate::datamodel::{AttrType, Attribute, DataModel, VarDecl, VarType};
use crate::msfol::{Decl, Formula, Sort, Term, Theory};

pub fn null_of(s: Sort) -> Term {
    match s {
        Sort::Int => Decl::constant("nullInt", s).term(),
        Sort::String => Decl::constant("nullString", s).term(),
        Sort::Classifier => Decl::constant("nullClassifier", s).term(),
        Sort::SqlBool => Term::sql_null(),
        Sort::Bool => panic!("formulas have no null"),
    }
}

/// The invalid constant of `s`. SQL truth values are never invalid, so
/// there is no such constant for [`Sort::SqlBool`].
pub fn inval_of(s: Sort) -> Term {
    match s {
        Sort::Int => Decl::constant("invalInt", s).term(),
        Sort::String => Decl::constant("invalString", s).term(),
        Sort::Classifier => Decl::constant("invalClassifier", s).term(),
        Sort::SqlBool | Sort::Bool => panic!("no invalid constant of sort {s}"),
    }
}

pub fn class_decl(class: &str) -> Decl {
    Decl::predicate(class, vec![Sort::Classifier])
}

pub fn assoc_decl(assoc: &str) -> Decl {
    Decl::predicate(assoc, vec![Sort::Classifier, Sort::Classifier])
}

pub fn attr_sort(t: &AttrType) -> Sort {
    match t {
        AttrType::Integer => Sort::Int,
        AttrType::String => Sort::String,
        AttrType::Class(_) => Sort::Classifier,
    }
}

pub fn attr_decl(dm: &DataModel, a: &Attribute) -> Decl {
    Decl::function(
        dm.attribute_symbol(a),
        vec![Sort::Classifier],
        attr_sort(&a.ty),
    )
}

pub fn sort_of_var(v: &VarDecl) -> Sort {
    match v.ty {
        VarType::Integer => Sort::Int,
        VarType::String => Sort::String,
        VarType::Boolean => Sort::SqlBool,
        VarType::Class(_) => Sort::Classifier,
    }
}

pub fn free_constant(v: &VarDecl) -> Decl {
    Decl::constant(v.name.clone(), sort_of_var(v))
}

/// The theory of `dm`: sorts, null/invalid constants, class and association
/// predicates, attribute functions and their framing axioms.
pub fn o2f_data(dm: &DataModel) -> Theory {
    let mut t = Theory::new();
    let x = || Term::var("x", Sort::Classifier);
    let y = || Term::var("y", Sort::Classifier);
    let cx = || vec![("x".to_string(), Sort::Classifier)];
    let cxy = || {
        vec![
            ("x".to_string(), Sort::Classifier),
            ("y".to_string(), Sort::Classifier),
        ]
    };
    for s in [Sort::Int, Sort::String, Sort::Classifier] {
        for c in [null_of(s), inval_of(s)] {
            if let crate::msfol::TermKind::App(name, _) = c.kind() {
                declare(&mut t, Decl::constant(name.clone(), s));
            }
        }
    }
    for s in [Sort::Int, Sort::String, Sort::Classifier] {
        t.assert(Formula::distinct(vec![null_of(s), inval_of(s)]));
    }
    for c in dm.classes() {
        let d = declare(&mut t, class_decl(c));
        t.assert(Formula::not(d.holds(vec![null_of(Sort::Classifier)])));
        t.assert(Formula::not(d.holds(vec![inval_of(Sort::Classifier)])));
    }
    let classes = dm.classes();
    for (i, a) in classes.iter().enumerate() {
        for b in &classes[i + 1..] {
            t.assert(Formula::forall(
                cx(),
                Formula::not(Formula::and([
                    class_decl(a).holds(vec![x()]),
                    class_decl(b).holds(vec![x()]),
                ])),
            ));
        }
    }
    for a in dm.attributes() {
        let f = declare(&mut t, attr_decl(dm, a));
        let s = f.result;
        let owner = class_decl(&a.owner);
        let mut facts = vec![Formula::neq(f.app(vec![x()]), inval_of(s))];
        if let AttrType::Class(target) = &a.ty {
            facts.push(Formula::or([
                class_decl(target).holds(vec![f.app(vec![x()])]),
                Formula::eq(f.app(vec![x()]), null_of(s)),
            ]));
        }
        t.assert(Formula::forall(
            cx(),
            Formula::implies(owner.holds(vec![x()]), Formula::and(facts)),
        ));
        for undefined in [null_of(Sort::Classifier), inval_of(Sort::Classifier)] {
            t.assert(Formula::eq(f.app(vec![undefined]), inval_of(s)));
        }
    }
    for s in dm.associations() {
        let d = declare(&mut t, assoc_decl(&s.name));
        t.assert(Formula::forall(
            cxy(),
            Formula::implies(
                d.holds(vec![x(), y()]),
                Formula::and([
                    class_decl(&s.left_class).holds(vec![x()]),
                    class_decl(&s.right_class).holds(vec![y()]),
                ]),
            ),
        ));
    }
    t
}

fn declare(t: &mut Theory, d: Decl) -> Decl {
    // Symbols derived from a validated data model never conflict.
    t.declare(d).expect("data-model symbols are unique")
}

/// Declares one constant per variable. Object-typed variables denote an
/// object of their class, or possibly null when declared nullable; scalar
/// variables are left unconstrained.
pub fn declare_frees(vars: &[VarDecl], t: &mut Theory) -> Result<(), crate::msfol::TheoryError> {
    for v in vars {
        let c = t.declare(free_constant(v))?;
        if let VarType::Class(class) = &v.ty {
            let member = class_decl(class).holds(vec![c.term()]);
            if v.nullable {
                t.assert(Formula::or([
                    member,
                    Formula::eq(c.term(), null_of(Sort::Classifier)),
                ]));
            } else {
                t.assert(member);
            }
        }
    }
    Ok(())
}
