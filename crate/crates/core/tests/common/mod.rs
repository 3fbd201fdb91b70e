//! Helpers shared by the integration tests.
#![allow(dead_code)]

use std::sync::OnceLock;

use oclsql::datamodel::{enumerate_object_models, EnumerationBounds, ObjectModel};
use oclsql::examples::university;
use oclsql::{SolverConfig, VarDecl, VarType};

/// z3 unless `OCLSQL_SOLVER` names another solver.
pub fn solver() -> SolverConfig {
    SolverConfig::from_env().unwrap_or_else(|| SolverConfig::new("z3"))
}

/// The cvc5 front end shipped in `scripts/`.
pub fn cvc5() -> SolverConfig {
    SolverConfig::new(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../scripts/cvc5-smt2"
    ))
}

pub fn vars() -> Vec<VarDecl> {
    vec![
        VarDecl::new("self", VarType::Class("Student".into())),
        VarDecl::new("caller", VarType::Class("Lecturer".into())),
        VarDecl::new("user", VarType::String),
    ]
}

/// Boolean constraints over [`vars`] covering every connective, iterator
/// and collection operation of the OCL subset.
pub const EXPRESSIONS: [&str; 14] = [
    "true",
    "self.age >= 18",
    "self.name = user",
    "caller.students->isEmpty()",
    "Student.allInstances()->forAll(s | s.lecturers->forAll(l | s.age < l.age))",
    "self.age > 17 and self.name <> null",
    "self.age = null or user = null",
    "not self.lecturers->notEmpty()",
    "Student.allInstances()->exists(s | s.age = caller.age)",
    "self.age <> caller.age implies user = self.name",
    "self.lecturers->including(caller)->isEmpty() xor self.age <= 19",
    "caller.students->select(s | s.age > 18)->union(Student.allInstances()->reject(s | s.name = user))->notEmpty()",
    "Student.allInstances()->collect(s | s.age)->intersection(Lecturer.allInstances()->collect(l | l.age))->isEmpty()",
    "self.lecturers->excluding(caller)->forAll(l | l.name = null) = (user = null)",
];

/// Every object model of the University model with at most two objects,
/// ages in {null, 17, 19} and names in {null, "a"}.
pub fn small_instances() -> &'static [ObjectModel] {
    static ALL: OnceLock<Vec<ObjectModel>> = OnceLock::new();
    ALL.get_or_init(|| {
        let dm = university();
        let b = EnumerationBounds::default();
        enumerate_object_models(&dm, &b)
            .filter(|om| om.objects().len() <= 2)
            .collect()
    })
}
