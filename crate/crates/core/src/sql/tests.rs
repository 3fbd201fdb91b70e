use super::*;
use crate::datamodel::tests::university;
use crate::datamodel::{Assignment, Link, Object, ObjectModel, Value, VarDecl, VarType};
use crate::relational::{o2s, o2s_inst, o2s_inst_assignment, SqlAssignment};
use proptest::prelude::*;
use std::collections::BTreeMap;

pub(crate) const EX2: &str =
    "SELECT NOT EXISTS (SELECT students FROM Enrolment WHERE lecturers = caller);";
pub(crate) const EX3: &str = "SELECT age >= 18 FROM Student WHERE Student_id = self;";
pub(crate) const EX4: &str = "SELECT NOT EXISTS (SELECT 1 FROM \
    (SELECT s.age, e.lecturers FROM Student s JOIN Enrolment e ON e.students = s.Student_id) AS TEMP \
    JOIN Lecturer l WHERE TEMP.age >= l.age AND l.Lecturer_id = TEMP.lecturers);";
pub(crate) const EX5: &str = "SELECT (SELECT name FROM Student WHERE Student_id = self) = user;";
pub(crate) const EX7: &str = "SELECT CASE WHEN name IS NULL THEN user IS NULL \
    ELSE CASE WHEN user IS NULL THEN FALSE ELSE name = user END END \
    FROM Student WHERE Student_id = self;";

fn vars() -> Vec<VarDecl> {
    vec![
        VarDecl::new("self", VarType::Class("Student".into())),
        VarDecl::new("caller", VarType::Class("Lecturer".into())),
        VarDecl::new("user", VarType::String),
        VarDecl::new("b", VarType::Boolean),
    ]
}

fn parse(s: &str) -> Result<SqlSelect, SqlError> {
    parse_select(s, &o2s(&university()), &vars())
}

fn run(s: &str, om: &ObjectModel, env: &SqlAssignment) -> Result<ResultTable, ExecError> {
    exec_sql(&o2s_inst(om, &university()), env, &parse(s).unwrap())
}

fn single(s: &str) -> SqlValue {
    let r = run(s, &ObjectModel::default(), &SqlAssignment::new()).unwrap();
    assert_eq!(r.rows.len(), 1);
    r.rows[0][0].clone()
}

#[test]
fn select_true() {
    let s = parse("SELECT TRUE;").unwrap();
    assert_eq!(s.items[0].expr, SqlExpr::Bool(true));
    assert!(s.from.is_none());
    assert_eq!(single("SELECT TRUE"), SqlValue::Bool(true));
}

#[test]
fn null_equals_null_is_null() {
    assert_eq!(single("SELECT NULL = NULL"), SqlValue::Null);
}

#[test]
fn example_four_shape() {
    let s = parse(EX4).unwrap();
    let SqlExpr::Not(e) = &s.items[0].expr else {
        panic!()
    };
    let SqlExpr::Exists(sub) = &**e else { panic!() };
    let from = sub.from.as_ref().unwrap();
    assert_eq!(from.item.alias.as_deref(), Some("TEMP"));
    assert!(matches!(from.item.source, FromSource::Subselect(_)));
    let j = from.join.as_ref().unwrap();
    assert_eq!(j.item.source, FromSource::Table("Lecturer".into()));
    assert_eq!(j.item.alias.as_deref(), Some("l"));
    assert!(j.on.is_none());
    assert!(sub.filter.is_some());
}

#[test]
fn column_resolution() {
    let s = parse(EX3).unwrap();
    let SqlExpr::Cmp(SqlCmp::Ge, age, _) = &s.items[0].expr else {
        panic!()
    };
    assert_eq!(
        **age,
        SqlExpr::Column(ColumnRef {
            qualifier: None,
            name: "age".into(),
            side: Side::From,
            index: 2,
            ty: SqlType::Int,
        })
    );
    let Some(SqlExpr::Cmp(_, id, v)) = &s.filter else {
        panic!()
    };
    assert_eq!(id.ty(), SqlType::Id);
    assert_eq!(**v, SqlExpr::Var("self".into(), SqlType::Id));
}

#[test]
fn rejects_correlated_subquery() {
    let e = parse("SELECT EXISTS (SELECT 1 FROM Lecturer l WHERE l.age = s.age) FROM Student s")
        .unwrap_err();
    assert_eq!(e.kind, SqlErrorKind::Correlated);
    let e = parse("SELECT age FROM Student WHERE EXISTS (SELECT 1 FROM Enrolment WHERE students = Student_id)")
        .unwrap_err();
    assert_eq!(e.kind, SqlErrorKind::Correlated);
}

#[test]
fn resolution_errors() {
    let cases = [
        ("SELECT salary FROM Student", SqlErrorKind::Unknown),
        ("SELECT 1 FROM Course", SqlErrorKind::Unknown),
        (
            "SELECT name FROM Student s JOIN Lecturer l",
            SqlErrorKind::Ambiguous,
        ),
        ("SELECT x.name FROM Student s", SqlErrorKind::Unknown),
        ("SELECT age = 'a' FROM Student", SqlErrorKind::Type),
        ("SELECT name < user FROM Student", SqlErrorKind::Type),
        ("SELECT 1 FROM Student WHERE age", SqlErrorKind::Type),
        ("SELECT NOT 1", SqlErrorKind::Type),
        ("SELECT (SELECT name, age FROM Student)", SqlErrorKind::Type),
        ("SELECT COUNT(age) FROM Student", SqlErrorKind::Unsupported),
        (
            "SELECT age FROM Student ORDER BY age",
            SqlErrorKind::Unsupported,
        ),
        ("SELECT age + 1 FROM Student", SqlErrorKind::Unsupported),
        (
            "SELECT CASE WHEN b THEN 1 WHEN b THEN 2 ELSE 3 END",
            SqlErrorKind::Unsupported,
        ),
        ("SELECT", SqlErrorKind::Syntax),
        ("SELECT 1 = 2 = 3", SqlErrorKind::Syntax),
        (
            "SELECT 1 FROM Student Student JOIN Student",
            SqlErrorKind::Ambiguous,
        ),
    ];
    for (src, kind) in cases {
        match parse(src) {
            Err(e) => assert_eq!(e.kind, kind, "{src}: {e}"),
            Ok(s) => panic!("{src} parsed as {s}"),
        }
    }
}

#[test]
fn error_positions() {
    let e = parse("SELECT age\nFROM Student\nWHERE salary = 1").unwrap_err();
    assert_eq!((e.line, e.col), (3, 7));
    assert!(e
        .to_string()
        .starts_with("SQL name error at line 3, column 7"));
}

#[test]
fn null_literals_take_their_context_type() {
    let s = parse("SELECT name = NULL FROM Student").unwrap();
    let SqlExpr::Cmp(_, _, n) = &s.items[0].expr else {
        panic!()
    };
    assert_eq!(**n, SqlExpr::Null(SqlType::Varchar));
    let s = parse("SELECT CASE WHEN b THEN NULL ELSE user END").unwrap();
    assert_eq!(s.items[0].expr.ty(), SqlType::Varchar);
    assert_eq!(
        parse("SELECT NULL").unwrap().items[0].expr.ty(),
        SqlType::Bool
    );
}

fn university_om(lecturer_age: i64, enrolled: bool) -> ObjectModel {
    let mut values = BTreeMap::new();
    values.insert((1, "age".to_string()), Value::Int(20));
    values.insert((2, "age".to_string()), Value::Int(25));
    values.insert((3, "age".to_string()), Value::Int(lecturer_age));
    values.insert((1, "name".to_string()), Value::Str("a".into()));
    let links = if enrolled {
        [1, 2]
            .into_iter()
            .map(|s| Link {
                assoc: "Enrolment".into(),
                left: s,
                right: 3,
            })
            .collect()
    } else {
        Default::default()
    };
    ObjectModel::new(
        &university(),
        vec![
            Object {
                id: 1,
                class: "Student".into(),
            },
            Object {
                id: 2,
                class: "Student".into(),
            },
            Object {
                id: 3,
                class: "Lecturer".into(),
            },
        ],
        values,
        links,
    )
    .unwrap()
}

#[test]
fn example_two_by_hand() {
    let env = o2s_inst_assignment(&Assignment::new().bind("caller", Value::Obj(3)));
    let r = run(EX2, &university_om(30, false), &env).unwrap();
    assert_eq!(r.rows, [vec![SqlValue::Bool(true)]]);
    let r = run(EX2, &university_om(30, true), &env).unwrap();
    assert_eq!(r.rows, [vec![SqlValue::Bool(false)]]);
}

#[test]
fn example_three_filters_on_self() {
    let env = o2s_inst_assignment(&Assignment::new().bind("self", Value::Obj(2)));
    let r = run(EX3, &university_om(30, false), &env).unwrap();
    assert_eq!(r.rows, [vec![SqlValue::Bool(true)]]);
    let env = o2s_inst_assignment(&Assignment::new().bind("self", Value::Null));
    let r = run(EX3, &university_om(30, false), &env).unwrap();
    assert!(r.rows.is_empty());
}

#[test]
fn example_four_join() {
    let r = run(EX4, &university_om(30, true), &SqlAssignment::new()).unwrap();
    assert_eq!(r.rows, [vec![SqlValue::Bool(true)]]);
    let r = run(EX4, &university_om(22, true), &SqlAssignment::new()).unwrap();
    assert_eq!(r.rows, [vec![SqlValue::Bool(false)]]);
    let inner =
        "SELECT s.age, e.lecturers FROM Student s JOIN Enrolment e ON e.students = s.Student_id";
    let r = run(inner, &university_om(22, true), &SqlAssignment::new()).unwrap();
    assert_eq!(r.columns, [Some("age".into()), Some("lecturers".into())]);
    assert_eq!(
        r.rows,
        [
            vec![SqlValue::Int(20), SqlValue::Int(3)],
            vec![SqlValue::Int(25), SqlValue::Int(3)]
        ]
    );
}

#[test]
fn scalar_subselect_needs_one_row() {
    let om = university_om(30, false);
    let env = o2s_inst_assignment(
        &Assignment::new()
            .bind("self", Value::Obj(1))
            .bind("user", Value::Str("a".into())),
    );
    assert_eq!(
        run(EX5, &om, &env).unwrap().rows,
        [vec![SqlValue::Bool(true)]]
    );
    let env = o2s_inst_assignment(
        &Assignment::new()
            .bind("self", Value::Obj(9))
            .bind("user", Value::Null),
    );
    assert!(matches!(
        run(EX5, &om, &env),
        Err(ExecError::ScalarSubselect { rows: 0, .. })
    ));
    let e = run("SELECT (SELECT age FROM Student) = 1", &om, &env).unwrap_err();
    assert!(matches!(e, ExecError::ScalarSubselect { rows: 2, .. }));
}

#[test]
fn case_takes_else_on_null() {
    let om = university_om(30, false);
    let env = o2s_inst_assignment(
        &Assignment::new()
            .bind("self", Value::Obj(2))
            .bind("user", Value::Null),
    );
    // Student 2 has a null name: both null, so TRUE.
    assert_eq!(
        run(EX7, &om, &env).unwrap().rows,
        [vec![SqlValue::Bool(true)]]
    );
    let env = o2s_inst_assignment(
        &Assignment::new()
            .bind("self", Value::Obj(1))
            .bind("user", Value::Null),
    );
    assert_eq!(
        run(EX7, &om, &env).unwrap().rows,
        [vec![SqlValue::Bool(false)]]
    );
    assert_eq!(
        single("SELECT CASE WHEN NULL THEN 1 ELSE 2 END"),
        SqlValue::Int(2)
    );
}

#[test]
fn unassigned_variable() {
    assert_eq!(
        run(
            "SELECT user IS NULL",
            &ObjectModel::default(),
            &SqlAssignment::new()
        ),
        Err(ExecError::Unassigned("user".into()))
    );
}

const TRUTHS: [&str; 3] = ["TRUE", "FALSE", "NULL"];

fn value(s: &str) -> SqlValue {
    match s {
        "TRUE" => SqlValue::Bool(true),
        "FALSE" => SqlValue::Bool(false),
        _ => SqlValue::Null,
    }
}

#[test]
fn three_valued_tables() {
    // Expected results, row-major over TRUE, FALSE, NULL.
    let and = [
        "TRUE", "FALSE", "NULL", "FALSE", "FALSE", "FALSE", "NULL", "FALSE", "NULL",
    ];
    let or = [
        "TRUE", "TRUE", "TRUE", "TRUE", "FALSE", "NULL", "TRUE", "NULL", "NULL",
    ];
    for (i, a) in TRUTHS.iter().enumerate() {
        for (j, b) in TRUTHS.iter().enumerate() {
            assert_eq!(
                single(&format!("SELECT {a} AND {b}")),
                value(and[3 * i + j]),
                "{a} AND {b}"
            );
            assert_eq!(
                single(&format!("SELECT {a} OR {b}")),
                value(or[3 * i + j]),
                "{a} OR {b}"
            );
        }
    }
    let not = ["FALSE", "TRUE", "NULL"];
    for (a, r) in TRUTHS.iter().zip(not) {
        assert_eq!(single(&format!("SELECT NOT {a}")), value(r));
    }
}

#[test]
fn comparisons_with_null_are_null() {
    for op in ["=", "<>", "<", "<=", ">", ">="] {
        assert_eq!(single(&format!("SELECT 1 {op} NULL")), SqlValue::Null);
        assert_eq!(single(&format!("SELECT NULL {op} 1")), SqlValue::Null);
    }
    assert_eq!(single("SELECT NULL IS NULL"), SqlValue::Bool(true));
    assert_eq!(single("SELECT 1 IS NOT NULL"), SqlValue::Bool(true));
    assert_eq!(single("SELECT 'it''s' = 'it''s'"), SqlValue::Bool(true));
    assert_eq!(single("SELECT -2 < 1"), SqlValue::Bool(true));
}

#[test]
fn printing() {
    assert_eq!(
        parse(EX3).unwrap().to_string(),
        "SELECT age >= 18 FROM Student WHERE Student_id = self"
    );
    assert_eq!(
        parse("select not (b or b) and b is null as x")
            .unwrap()
            .to_string(),
        "SELECT NOT (b OR b) AND b IS NULL AS x"
    );
}

// Round trip over generated statements.

fn atom(columns: bool) -> BoxedStrategy<String> {
    let closed = prop_oneof![
        Just("TRUE".to_string()),
        Just("FALSE".to_string()),
        Just("NULL".to_string()),
        Just("b".to_string()),
        Just("user = 'it''s'".to_string()),
        (-3i64..40).prop_map(|i| format!("{i} < 18")),
        Just("EXISTS (SELECT lecturers FROM Enrolment WHERE lecturers = caller)".to_string()),
        Just("(SELECT name FROM Student WHERE Student_id = self) IS NULL".to_string()),
    ];
    if !columns {
        return closed.boxed();
    }
    prop_oneof![
        closed,
        Just("age IS NULL".to_string()),
        Just("s.name = user".to_string()),
        Just("Student_id = self".to_string()),
        (-3i64..40).prop_map(|i| format!("age < {i}")),
    ]
    .boxed()
}

fn boolean(columns: bool) -> impl Strategy<Value = String> {
    atom(columns).prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| format!("NOT {a}")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) AND ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) OR {b}")),
            (inner.clone(), inner.clone(), inner.clone())
                .prop_map(|(a, b, c)| format!("CASE WHEN {a} THEN {b} ELSE {c} END")),
            inner.clone().prop_map(|a| format!("({a}) IS NULL")),
            (inner.clone(), inner).prop_map(|(a, b)| format!("({a}) = ({b})")),
        ]
    })
}

proptest! {
    #[test]
    fn print_parse_round_trip(e in boolean(true), w in boolean(true)) {
        let src = format!("SELECT {e} AS r FROM Student s WHERE {w}");
        let s = parse(&src).unwrap();
        let printed = s.to_string();
        prop_assert_eq!(parse(&printed).unwrap(), s, "{}", printed);
    }

    #[test]
    fn from_less_select_has_one_row(e in boolean(false)) {
        let src = format!("SELECT {e}");
        let s = parse(&src).unwrap();
        let env = o2s_inst_assignment(
            &Assignment::new()
                .bind("self", Value::Obj(1))
                .bind("caller", Value::Obj(3))
                .bind("user", Value::Str("a".into()))
                .bind("b", Value::Null),
        );
        let db = o2s_inst(&university_om(30, true), &university());
        if let Ok(r) = exec_sql(&db, &env, &s) {
            prop_assert_eq!(r.rows.len(), 1);
        }
    }
}
