//! The University data model and the reference correctness cases over it.

use crate::datamodel::{load_data_model, DataModel, ModelError, VarDecl};
use crate::prover::{CorrectnessProblem, ProblemError};

/// Students and lecturers, each with a name and an age, linked by the
/// many-to-many association `Enrolment` with ends `students`/`lecturers`.
pub const UNIVERSITY_JSON: &str = r#"{
  "classes": {
    "Student": [
      { "name": "name", "type": "String" },
      { "name": "age", "type": "Integer" }
    ],
    "Lecturer": [
      { "name": "name", "type": "String" },
      { "name": "age", "type": "Integer" }
    ]
  },
  "associations": [
    {
      "name": "Enrolment",
      "leftEnd": "students",
      "leftClass": "Student",
      "rightEnd": "lecturers",
      "rightClass": "Lecturer"
    }
  ]
}
"#;

pub fn university() -> DataModel {
    load_data_model(UNIVERSITY_JSON).expect("the University model is valid")
}

/// An OCL constraint, a select meant to implement it, the free variables
/// (`name:Type`) and OCL assumptions.
#[derive(Debug, Clone, Copy)]
pub struct Case {
    pub name: &'static str,
    pub ocl: &'static str,
    pub sql: &'static str,
    pub vars: &'static [&'static str],
    pub assumptions: &'static [&'static str],
}

impl Case {
    pub fn vars(&self, dm: &DataModel) -> Result<Vec<VarDecl>, ModelError> {
        self.vars.iter().map(|v| VarDecl::parse(v, dm)).collect()
    }

    pub fn problem(&self) -> Result<CorrectnessProblem, ProblemError> {
        let dm = university();
        let vars = self.vars(&dm).expect("case variables are well-formed");
        CorrectnessProblem::parse(dm, self.ocl, self.assumptions, self.sql, vars)
    }

    /// The same case without its assumptions.
    pub fn unassumed(&self) -> Case {
        Case {
            assumptions: &[],
            ..*self
        }
    }
}

const NAME_IS_USER: &str = "self.name = user";
const USER_NOT_NULL: &[&str] = &["user <> null"];

/// The seven reference cases, `exm1` to `exm7`. Cases 5 and 6 carry the
/// assumption `user <> null`; all seven are expected to be correct.
pub const CASES: [Case; 7] = [
    Case {
        name: "exm1",
        ocl: "true",
        sql: "SELECT TRUE;",
        vars: &[],
        assumptions: &[],
    },
    Case {
        name: "exm2",
        ocl: "caller.students->isEmpty()",
        sql: "SELECT NOT EXISTS (SELECT students FROM Enrolment WHERE lecturers = caller);",
        vars: &["caller:Lecturer"],
        assumptions: &[],
    },
    Case {
        name: "exm3",
        ocl: "self.age >= 18",
        sql: "SELECT age >= 18 FROM Student WHERE Student_id = self;",
        vars: &["self:Student"],
        assumptions: &[],
    },
    Case {
        name: "exm4",
        ocl: "Student.allInstances()->forAll(s | s.lecturers->forAll(l | s.age < l.age))",
        sql: "SELECT NOT EXISTS (SELECT 1 FROM \
              (SELECT s.age, e.lecturers FROM Student s JOIN Enrolment e ON e.students = s.Student_id) AS TEMP \
              JOIN Lecturer l WHERE TEMP.age >= l.age AND l.Lecturer_id = TEMP.lecturers);",
        vars: &[],
        assumptions: &[],
    },
    Case {
        name: "exm5",
        ocl: NAME_IS_USER,
        sql: "SELECT (SELECT name FROM Student WHERE Student_id = self) = user;",
        vars: &["self:Student", "user:String"],
        assumptions: USER_NOT_NULL,
    },
    Case {
        name: "exm6",
        ocl: NAME_IS_USER,
        sql: "SELECT name = user FROM Student WHERE Student_id = self;",
        vars: &["self:Student", "user:String"],
        assumptions: USER_NOT_NULL,
    },
    Case {
        name: "exm7",
        ocl: NAME_IS_USER,
        sql: "SELECT CASE WHEN name IS NULL THEN user IS NULL \
              ELSE CASE WHEN user IS NULL THEN FALSE ELSE name = user END END \
              FROM Student WHERE Student_id = self;",
        vars: &["self:Student", "user:String"],
        assumptions: &[],
    },
];

pub fn case(name: &str) -> Option<Case> {
    CASES.iter().find(|c| c.name == name).copied()
}
