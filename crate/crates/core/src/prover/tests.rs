use super::*;
use crate::datamodel::{enumerate_object_models, Assignment, EnumerationBounds, VarType};
use crate::examples::{case, university, CASES};
use crate::msfol::{emit_smtlib, formula_text, Decl};
use std::os::unix::fs::PermissionsExt;
use std::time::Duration;

fn z3() -> SolverConfig {
    SolverConfig::from_env().unwrap_or_else(|| SolverConfig::new("z3"))
}

fn verdict(p: &CorrectnessProblem) -> Verdict {
    let rs: Vec<(TheoryKind, SolverResult)> = p
        .theories()
        .unwrap()
        .into_iter()
        .map(|(k, t)| (k, check(&t, &z3()).unwrap()))
        .collect();
    decide(&rs)
}

fn goals(t: &Theory) -> Vec<String> {
    t.axioms()
        .iter()
        .filter(|a| a.note.as_deref().is_some_and(|n| n.starts_with("goal")))
        .map(|a| formula_text(&a.formula))
        .collect()
}

#[test]
fn decide_follows_the_verdict_rule() {
    use SolverResult::*;
    use TheoryKind::*;
    assert_eq!(
        decide(&[(C1, Unsat), (C2, Unsat), (C3, Unsat)]),
        Verdict::Correct
    );
    assert_eq!(
        decide(&[(C1, Unsat), (C2, Sat), (C3, Unsat)]),
        Verdict::Incorrect(C2)
    );
    assert_eq!(
        decide(&[(C1, Unknown), (C2, Unsat), (C3, Unsat)]),
        Verdict::Inconclusive(vec![C1])
    );
    assert_eq!(
        decide(&[(Obligation(1), Sat), (C1, Sat), (C2, Unsat), (C3, Timeout)]),
        Verdict::Incorrect(Obligation(1))
    );
    assert_eq!(
        decide(&[(C1, Timeout), (C2, Sat), (C3, Unknown)]),
        Verdict::Incorrect(C2)
    );
    assert_eq!(Verdict::Inconclusive(vec![C3]).exit_code(), 2);
    assert_eq!(
        Verdict::Incorrect(Obligation(2)).to_string(),
        "Incorrect (O2)"
    );
}

#[test]
fn theory_goals() {
    let p = case("exm1").unwrap().problem().unwrap();
    let one = "(exists ((x Int)) (and (index_sel!1 x) (forall ((y Int)) (=> (not (= y x)) (not (index_sel!1 y))))))";
    assert_eq!(
        goals(&build_theory(TheoryKind::C1, &p).unwrap()),
        [format!("(not {one})")]
    );
    let cell = "(forall ((x Int)) (=> (index_sel!1 x) (= (val_sel!1!2 x) TRUE)))";
    let c2 = build_theory(TheoryKind::C2, &p).unwrap();
    assert_eq!(goals(&c2), [format!("(not {cell})")]);
    assert!(emit_smtlib(&c2).contains("(forall ((x Int)) (= (val_sel!1!2 x) TRUE))"));
    let p = case("exm3").unwrap().problem().unwrap();
    let c3 = build_theory(TheoryKind::C3, &p).unwrap();
    let g = goals(&c3);
    assert_eq!(
        g[0],
        "(forall ((x Int)) (=> (index_sel!1 x) (= (val_sel!1!5 x) TRUE)))"
    );
    assert!(g[1].starts_with("(not "), "{g:?}");
    assert!(g[1].contains("(age self)"), "{g:?}");
}

#[test]
fn theories_put_obligations_first() {
    let kinds: Vec<String> = case("exm5")
        .unwrap()
        .problem()
        .unwrap()
        .theories()
        .unwrap()
        .iter()
        .map(|(k, _)| k.to_string())
        .collect();
    assert_eq!(kinds, ["O1", "C1", "C2", "C3"]);
}

#[test]
fn assumptions_reach_every_theory() {
    let p = case("exm5").unwrap().problem().unwrap();
    for (k, t) in p.theories().unwrap() {
        let notes: Vec<&str> = t
            .axioms()
            .iter()
            .filter_map(|a| a.note.as_deref())
            .collect();
        assert!(notes.contains(&"assume user <> null"), "{k}");
    }
}

#[test]
fn c1_leaves_out_the_constraint() {
    let p = case("exm4").unwrap().problem().unwrap();
    let c1 = emit_smtlib(&build_theory(TheoryKind::C1, &p).unwrap());
    let c2 = emit_smtlib(&build_theory(TheoryKind::C2, &p).unwrap());
    assert!(!c1.contains("set!"));
    assert!(c2.contains("set!"));
}

#[test]
fn problems_are_validated() {
    let dm = university();
    let err = |ocl: &str, sql: &str, vars: Vec<VarDecl>| {
        CorrectnessProblem::parse(dm.clone(), ocl, &[] as &[&str], sql, vars).unwrap_err()
    };
    assert!(matches!(
        err("true", "SELECT TRUE, FALSE", vec![]),
        ProblemError::ItemCount(2)
    ));
    assert!(matches!(
        err("true", "SELECT 1", vec![]),
        ProblemError::ItemType(SqlType::Int)
    ));
    assert!(matches!(
        err("1", "SELECT TRUE", vec![]),
        ProblemError::NotBoolean(_)
    ));
    let s = || VarDecl::new("s", VarType::Integer);
    assert!(matches!(
        err("true", "SELECT TRUE", vec![s(), s()]),
        ProblemError::DuplicateVar(_)
    ));
    for name in ["age", "nullInt", "id", "Student"] {
        let v = VarDecl::new(name, VarType::Integer);
        assert!(
            matches!(
                err("true", "SELECT TRUE", vec![v]),
                ProblemError::VarClash(_)
            ),
            "{name}"
        );
    }
    assert!(matches!(
        err("true", "SELECT x", vec![]),
        ProblemError::Sql(_)
    ));
    assert!(matches!(
        err("x", "SELECT TRUE", vec![]),
        ProblemError::Ocl(_)
    ));
}

#[test]
fn theories_are_byte_stable() {
    for c in CASES {
        let a = c.problem().unwrap().theories().unwrap();
        let b = c.problem().unwrap().theories().unwrap();
        for ((_, x), (_, y)) in a.iter().zip(&b) {
            assert_eq!(emit_smtlib(x), emit_smtlib(y));
        }
        for (_, t) in &a {
            t.check_closed().unwrap();
        }
    }
}

fn fake_solver(dir: &tempfile::TempDir, name: &str, body: &str) -> SolverConfig {
    let path = dir.path().join(name);
    std::fs::write(&path, format!("#!/bin/sh\n{body}\n")).unwrap();
    std::fs::set_permissions(&path, std::fs::Permissions::from_mode(0o755)).unwrap();
    SolverConfig::new(path)
}

#[test]
fn solver_output_is_parsed() {
    let dir = tempfile::tempdir().unwrap();
    let t = Theory::new();
    let run = |body: &str| check(&t, &fake_solver(&dir, "s", body));
    assert_eq!(run("echo sat").unwrap(), SolverResult::Sat);
    assert_eq!(
        run("echo; echo unsat; echo extra").unwrap(),
        SolverResult::Unsat
    );
    assert_eq!(
        run("echo 'unknown (INCOMPLETE)'").unwrap(),
        SolverResult::Unknown
    );
    assert!(matches!(
        run("echo '(error \"bad\")'"),
        Err(SolverError::Output { .. })
    ));
    assert!(matches!(run("true"), Err(SolverError::Output { .. })));
}

#[test]
fn solver_is_killed_after_the_timeout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fake_solver(&dir, "slow", "exec sleep 30").with_timeout(Duration::from_millis(200));
    let start = std::time::Instant::now();
    assert_eq!(check(&Theory::new(), &cfg).unwrap(), SolverResult::Timeout);
    assert!(start.elapsed() < Duration::from_secs(10));
}

#[test]
fn missing_solver_is_a_launch_error() {
    let cfg = SolverConfig::new("/nonexistent/solver");
    assert!(matches!(
        check(&Theory::new(), &cfg),
        Err(SolverError::Launch { .. })
    ));
}

#[test]
fn check_all_keeps_order() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fake_solver(
        &dir,
        "s",
        "case \"$1\" in *a.smt2) echo sat;; *) echo unsat;; esac",
    );
    let files: Vec<(usize, std::path::PathBuf)> = ["a", "b", "c"]
        .iter()
        .enumerate()
        .map(|(i, n)| {
            let p = dir.path().join(format!("{n}.smt2"));
            std::fs::write(&p, "").unwrap();
            (i, p)
        })
        .collect();
    let rs: Vec<(usize, SolverResult)> = check_all(&cfg, &files)
        .into_iter()
        .map(|(k, r)| (k, r.unwrap()))
        .collect();
    assert_eq!(
        rs,
        [
            (0, SolverResult::Sat),
            (1, SolverResult::Unsat),
            (2, SolverResult::Unsat)
        ]
    );
}

#[test]
fn contradiction_is_unsat() {
    let mut t = Theory::new();
    let b = t.declare(Decl::constant("b", Sort::SqlBool)).unwrap();
    let is_true = Formula::eq(b.term(), Term::sql_true());
    t.assert(Formula::and([Formula::not(is_true.clone()), is_true]));
    assert_eq!(check(&t, &z3()).unwrap(), SolverResult::Unsat);
}

#[test]
fn provable_cases_are_correct() {
    for name in ["exm1", "exm2", "exm3", "exm5", "exm6", "exm7"] {
        let p = case(name).unwrap().problem().unwrap();
        assert_eq!(verdict(&p), Verdict::Correct, "{name}");
    }
}

#[test]
fn null_user_breaks_cases_five_and_six() {
    for name in ["exm5", "exm6"] {
        let p = case(name).unwrap().unassumed().problem().unwrap();
        assert_eq!(verdict(&p), Verdict::Incorrect(TheoryKind::C2), "{name}");
    }
}

#[test]
fn case_four_has_a_null_age_counterexample() {
    let p = case("exm4").unwrap().problem().unwrap();
    let b = EnumerationBounds::default();
    let om = enumerate_object_models(&p.dm, &b)
        .find(|om| om.objects().len() == 2 && !om.links().is_empty())
        .unwrap();
    assert!(om.values().is_empty(), "ages are null");
    let mut t = build_theory(TheoryKind::C3, &p).unwrap();
    t.extend(&pin_instance(&p.dm, &om, &Assignment::new(), &p.frees).unwrap())
        .unwrap();
    assert_eq!(check(&t, &z3()).unwrap(), SolverResult::Sat);
}

#[test]
fn case_four_is_correct_for_defined_ages() {
    let c = case("exm4").unwrap();
    let defined = [
        "Student.allInstances()->forAll(s | s.age <> null)",
        "Lecturer.allInstances()->forAll(l | l.age <> null)",
    ];
    let p = CorrectnessProblem::parse(university(), c.ocl, &defined, c.sql, vec![]).unwrap();
    assert_eq!(verdict(&p), Verdict::Correct);
    let r = cross_check(&p, &EnumerationBounds::default());
    assert!(r.instances > 0);
    assert!(r.agrees_with_correct(), "{r}");
}

#[test]
fn oracle_finds_the_null_user_scenario() {
    let p = case("exm5").unwrap().unassumed().problem().unwrap();
    let r = cross_check(&p, &EnumerationBounds::uniform(1));
    assert!(r.discrepancies > 0);
    assert!(r.examples.iter().any(|e| e.contains("user=null")), "{r}");
}

#[test]
fn oracle_over_the_empty_instance() {
    let p = case("exm1").unwrap().problem().unwrap();
    let r = cross_check(&p, &EnumerationBounds::uniform(0));
    assert_eq!((r.object_models, r.instances), (1, 1));
    assert!(r.agrees_with_correct());
}

#[test]
fn oracle_skips_null_objects_unless_nullable() {
    let c = case("exm3").unwrap();
    let b = EnumerationBounds::uniform(1);
    let strict = cross_check(&c.problem().unwrap(), &b);
    let vars = vec![VarDecl::nullable("self", VarType::Class("Student".into()))];
    let loose =
        CorrectnessProblem::parse(university(), c.ocl, &[] as &[&str], c.sql, vars).unwrap();
    let loose = cross_check(&loose, &b);
    assert!(loose.instances > strict.instances);
    assert!(loose.row_count_witnesses > 0);
    assert_eq!(strict.row_count_witnesses, 0);
}

#[test]
fn exclusivity_pairs() {
    let dm = university();
    let vars = vec![VarDecl::new("self", VarType::Class("Student".into()))];
    let e = crate::ocl::parse_ocl("self.age >= 18", &dm, &vars).unwrap();
    let ts = exclusivity_theories(&dm, &vars, &e).unwrap();
    assert_eq!(ts.len(), 6);
    for (name, t) in ts {
        assert_eq!(check(&t, &z3()).unwrap(), SolverResult::Unsat, "{name}");
    }
}
