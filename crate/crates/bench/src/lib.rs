//! Workloads for the pipeline benchmarks: the reference cases, parsed,
//! translated and emitted as SMT-LIB2.

use oclsql::examples::{Case, CASES};
use oclsql::{emit_smtlib, CorrectnessProblem, Theory, TheoryKind};

pub fn cases() -> &'static [Case] {
    &CASES
}

/// Parses and type-checks one case.
pub fn parse(c: &Case) -> CorrectnessProblem {
    c.problem().expect("reference cases are well-formed")
}

/// Builds every theory of a parsed case.
pub fn translate(p: &CorrectnessProblem) -> Vec<(TheoryKind, Theory)> {
    p.theories().expect("reference cases translate")
}

/// Renders theories as SMT-LIB2 and returns the total size in bytes.
pub fn emit(theories: &[(TheoryKind, Theory)]) -> usize {
    theories.iter().map(|(_, t)| emit_smtlib(t).len()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_case_runs_through_the_pipeline() {
        for c in cases() {
            let theories = translate(&parse(c));
            assert!(theories.len() >= 3, "{}", c.name);
            assert!(emit(&theories) > 0);
        }
    }
}
