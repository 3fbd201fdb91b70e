//! Checks whether a SQL select-statement correctly implements an OCL Boolean
//! constraint.
//!
//! Both sides are translated into many-sorted first-order logic over a shared
//! data model; three satisfiability problems (plus one per scalar subselect)
//! are emitted as SMT-LIB2 and handed to an external solver. The verdict is
//! `Correct` only if all of them are unsatisfiable. A bounded brute-force
//! oracle (direct OCL evaluation and SQL execution over enumerated instances)
//! cross-checks the verdicts.

pub mod datamodel;
pub mod examples;
pub mod msfol;
pub mod ocl;
pub mod ocl2msfol;
pub mod prover;
pub mod relational;
pub mod sql;
pub mod sql2msfol;

pub use datamodel::{
    Assignment, DataModel, EnumerationBounds, ModelError, ObjectModel, Value, VarDecl, VarType,
};
pub use msfol::{emit_smtlib, Formula, Sort, Term, Theory};
pub use ocl::{parse_ocl, OclExpr};
pub use prover::{
    cross_check, decide, CorrectnessProblem, OracleReport, SolverConfig, SolverResult, TheoryKind,
    Verdict,
};
pub use sql::{parse_select, SqlSelect};
