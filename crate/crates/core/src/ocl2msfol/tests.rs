use super::*;
use crate::datamodel::tests::university;
use crate::datamodel::VarType;
use crate::msfol::emit_smtlib;
use crate::ocl::parse_ocl;

fn vars() -> Vec<VarDecl> {
    vec![
        VarDecl::new("self", VarType::Class("Student".into())),
        VarDecl::new("p", VarType::Class("Student".into())),
        VarDecl::new("user", VarType::String),
        VarDecl::new("x", VarType::Boolean),
    ]
}

fn parse(s: &str) -> OclExpr {
    parse_ocl(s, &university(), &vars()).unwrap()
}

fn smt(f: &Formula) -> String {
    crate::msfol::formula_text(f)
}

#[test]
fn empty_data_model_theory() {
    let dm = DataModel::default();
    let t = o2f_data(&dm);
    let names: Vec<&str> = t.decls().map(|d| d.name.as_str()).collect();
    assert_eq!(
        names,
        [
            "nullInt",
            "invalInt",
            "nullString",
            "invalString",
            "nullClassifier",
            "invalClassifier"
        ]
    );
    assert_eq!(t.axioms().len(), 3);
    assert!(t
        .axioms()
        .iter()
        .all(|a| matches!(a.formula, Formula::Distinct(_))));
}

#[test]
fn university_theory_symbols() {
    let t = o2f_data(&university());
    assert_eq!(t.decl("Student"), Some(&class_decl("Student")));
    assert_eq!(t.decl("Lecturer"), Some(&class_decl("Lecturer")));
    assert_eq!(t.decl("Enrolment"), Some(&assoc_decl("Enrolment")));
    assert_eq!(
        t.decl("age"),
        Some(&Decl::function("age", vec![Sort::Classifier], Sort::Int))
    );
    assert_eq!(
        t.decl("name"),
        Some(&Decl::function(
            "name",
            vec![Sort::Classifier],
            Sort::String
        ))
    );
    assert_eq!(t.check_closed(), Ok(()));
}

#[test]
fn class_typed_attribute_has_classifier_result() {
    let dm = crate::datamodel::load_data_model(
        r#"{"classes": {"A": [{"name": "peer", "type": "B"}], "B": []}}"#,
    )
    .unwrap();
    let t = o2f_data(&dm);
    assert_eq!(t.decl("peer").unwrap().result, Sort::Classifier);
}

#[test]
fn not_empty_of_all_instances() {
    let dm = university();
    let mut tr = OclTranslator::new(&dm, &vars());
    let t = tr
        .o2f_true(&parse("Student.allInstances()->notEmpty()"))
        .unwrap();
    assert_eq!(smt(&t), "(exists ((v!3 Classifier)) (set!1 v!3))");
    let defs = tr.defs().axioms();
    assert_eq!(defs.len(), 1);
    assert_eq!(
        smt(&defs[0].formula),
        "(forall ((v!2 Classifier)) (= (set!1 v!2) (Student v!2)))"
    );
}

#[test]
fn true_literal_is_top() {
    let dm = university();
    let mut tr = OclTranslator::new(&dm, &vars());
    let f = tr.four(&parse("true")).unwrap();
    assert_eq!(f.t, Formula::True);
    assert_eq!(
        [f.f, f.n, f.i],
        [Formula::False, Formula::False, Formula::False]
    );
}

#[test]
fn attribute_access_is_function_application() {
    let dm = university();
    let mut tr = OclTranslator::new(&dm, &vars());
    match tr.o2f_eval(&parse("p.age")).unwrap() {
        Evaluated::Term(t) => {
            assert_eq!(
                t,
                attr_decl(&dm, dm.attribute("Student", "age").unwrap()).app(vec![Decl::constant(
                    "p",
                    Sort::Classifier
                )
                .term()])
            )
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn integer_literals_get_distinctness_axioms() {
    let dm = university();
    let mut tr = OclTranslator::new(&dm, &vars());
    tr.four(&parse("self.age >= 18")).unwrap();
    let texts: Vec<String> = tr.defs().axioms().iter().map(|a| smt(&a.formula)).collect();
    assert_eq!(texts, ["(and (not (= 18 nullInt)) (not (= 18 invalInt)))"]);
}

#[test]
fn select_defines_a_biconditional() {
    let dm = university();
    let mut tr = OclTranslator::new(&dm, &vars());
    let e = parse("Student.allInstances()->select(s | s.age.oclIsUndefined())");
    let Evaluated::Set(s) = tr.o2f_eval(&e).unwrap() else {
        panic!()
    };
    assert!(s.args.is_empty());
    assert_eq!(s.inval, Formula::False);
    let defs: Vec<String> = tr.defs().axioms().iter().map(|a| smt(&a.formula)).collect();
    assert_eq!(
        defs,
        [
            "(forall ((v!4 Classifier)) (= (set!3 v!4) (Student v!4)))",
            "(forall ((v!2 Classifier)) (= (set!1 v!2) (and (set!3 v!2) (or (= (age v!2) nullInt) (= (age v!2) invalInt)))))",
        ]
    );
}

#[test]
fn repeated_subexpressions_share_symbols() {
    let dm = university();
    let mut tr = OclTranslator::new(&dm, &vars());
    let e = parse("Student.allInstances()->notEmpty() and Student.allInstances()->isEmpty()");
    tr.four(&e).unwrap();
    let n = tr.defs().decls().count();
    tr.four(&e).unwrap();
    assert_eq!(tr.defs().decls().count(), n);
    assert_eq!(n, 1);
}

#[test]
fn nested_sets_are_parameterized_by_iterators() {
    let dm = university();
    let mut tr = OclTranslator::new(&dm, &vars());
    let e = parse("Student.allInstances()->forAll(s | s.lecturers->forAll(l | s.age < l.age))");
    tr.four(&e).unwrap();
    let nav = tr
        .defs()
        .decls()
        .find(|d| d.args.len() == 2)
        .expect("navigation predicate takes the iterator as a parameter");
    assert_eq!(nav.args, vec![Sort::Classifier, Sort::Classifier]);
}

#[test]
fn free_variable_declarations() {
    let mut t = Theory::new();
    declare_frees(&[], &mut t).unwrap();
    assert!(t.is_empty());

    let mut t = Theory::new();
    declare_frees(
        &[
            VarDecl::new("self", VarType::Class("Student".into())),
            VarDecl::nullable("caller", VarType::Class("Lecturer".into())),
            VarDecl::new("user", VarType::String),
        ],
        &mut t,
    )
    .unwrap();
    assert_eq!(t.decl("self").unwrap().result, Sort::Classifier);
    assert_eq!(t.decl("user").unwrap().result, Sort::String);
    let texts: Vec<String> = t.axioms().iter().map(|a| smt(&a.formula)).collect();
    assert_eq!(
        texts,
        [
            "(Student self)",
            "(or (Lecturer caller) (= caller nullClassifier))"
        ]
    );
}

#[test]
fn translations_only_use_defined_symbols() {
    let dm = university();
    for src in [
        "self.name = user",
        "Student.allInstances()->select(s | s.name = user)->collect(s | s.age)->including(3)->excluding(self.age)->isEmpty()",
        "Student.allInstances()->collect(s | s.age)->including(3)->notEmpty()",
        "self.lecturers->union(Lecturer.allInstances())->collect(l | l.age)->isEmpty()",
        "self.lecturers->exists(l | l.students->excluding(self)->notEmpty())",
        "Student.allInstances()->reject(s | s = self)->intersection(Student.allInstances())->isEmpty() xor x",
        "not (x implies self.age.oclIsUndefined()) or self.lecturers = self.lecturers",
    ] {
        let e = parse_ocl(src, &dm, &vars()).unwrap_or_else(|e| panic!("{src}: {e}"));
        let mut tr = OclTranslator::new(&dm, &vars());
        let four = tr.four(&e).unwrap();
        let mut t = o2f_data(&dm);
        declare_frees(&vars(), &mut t).unwrap();
        t.extend(tr.defs()).unwrap();
        for f in four.all() {
            t.assert(f.clone());
        }
        assert_eq!(t.check_closed(), Ok(()), "{src}");
        assert!(emit_smtlib(&t).ends_with("(check-sat)\n"));
    }
}
