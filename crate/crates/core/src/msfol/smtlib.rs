//! Deterministic SMT-LIB2 printing.

use std::fmt::Write;

use super::{Formula, Sort, Term, TermKind, Theory, SQL_BOOL_CONSTRUCTORS};

const RESERVED_WORDS: &[&str] = &[
    "!",
    "_",
    "as",
    "BINARY",
    "DECIMAL",
    "exists",
    "forall",
    "HEXADECIMAL",
    "let",
    "match",
    "NUMERAL",
    "par",
    "STRING",
    "assert",
    "check-sat",
    "declare-const",
    "declare-fun",
    "declare-sort",
    "define-fun",
    "set-logic",
    "set-option",
    "push",
    "pop",
    "exit",
];

fn is_simple_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || "~!@$^&*_-+=<>.?/".contains(c)
}

/// Renders a logic symbol as SMT-LIB2 text.
///
/// Plain names are printed as they are. Anything else is wrapped in `|..|`
/// with `|`, `\`, `%`, control and non-ASCII characters percent-encoded as
/// UTF-8 bytes, which keeps the mapping injective and reversible.
pub fn escape_symbol(name: &str) -> String {
    let bare = !name.is_empty()
        && !name.starts_with(|c: char| c.is_ascii_digit())
        && name.chars().all(is_simple_char)
        && !RESERVED_WORDS.contains(&name);
    if bare {
        return name.to_string();
    }
    let mut out = String::from("|");
    for c in name.chars() {
        if c == '|' || c == '\\' || c == '%' || !(' '..='~').contains(&c) {
            let mut buf = [0u8; 4];
            for b in c.encode_utf8(&mut buf).bytes() {
                write!(out, "%{b:02X}").unwrap();
            }
        } else {
            out.push(c);
        }
    }
    out.push('|');
    out
}

/// Inverse of [`escape_symbol`].
pub fn unescape_symbol(text: &str) -> Option<String> {
    let Some(inner) = text.strip_prefix('|').and_then(|t| t.strip_suffix('|')) else {
        return Some(text.to_string());
    };
    let mut bytes = Vec::new();
    let mut it = inner.bytes();
    while let Some(b) = it.next() {
        if b == b'%' {
            let hex = [it.next()?, it.next()?];
            bytes.push(u8::from_str_radix(std::str::from_utf8(&hex).ok()?, 16).ok()?);
        } else {
            bytes.push(b);
        }
    }
    String::from_utf8(bytes).ok()
}

fn string_literal(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\"\""),
            '\\' => out.push_str("\\u{5c}"),
            ' '..='~' => out.push(c),
            _ => write!(out, "\\u{{{:x}}}", c as u32).unwrap(),
        }
    }
    out.push('"');
    out
}

fn sort_name(s: Sort) -> &'static str {
    match s {
        Sort::Int => "Int",
        Sort::String => "String",
        Sort::Classifier => "Classifier",
        Sort::SqlBool => "SqlBool",
        Sort::Bool => "Bool",
    }
}

fn term(out: &mut String, t: &Term) {
    match t.kind() {
        TermKind::Var(v) => out.push_str(&escape_symbol(v)),
        TermKind::Int(i) if *i < 0 => write!(out, "(- {})", i.unsigned_abs()).unwrap(),
        TermKind::Int(i) => write!(out, "{i}").unwrap(),
        TermKind::Str(s) => out.push_str(&string_literal(s)),
        TermKind::App(f, args) if args.is_empty() => {
            if t.sort() == Sort::SqlBool && SQL_BOOL_CONSTRUCTORS.contains(&f.as_str()) {
                out.push_str(f);
            } else {
                out.push_str(&escape_symbol(f));
            }
        }
        TermKind::App(f, args) => {
            out.push('(');
            out.push_str(&escape_symbol(f));
            for a in args {
                out.push(' ');
                term(out, a);
            }
            out.push(')');
        }
    }
}

fn nary(out: &mut String, op: &str, fs: &[Formula]) {
    write!(out, "({op}").unwrap();
    for f in fs {
        out.push(' ');
        formula(out, f);
    }
    out.push(')');
}

fn formula(out: &mut String, f: &Formula) {
    match f {
        Formula::True => out.push_str("true"),
        Formula::False => out.push_str("false"),
        Formula::Atom(t) => term(out, t),
        Formula::Eq(a, b) => {
            out.push_str("(= ");
            term(out, a);
            out.push(' ');
            term(out, b);
            out.push(')');
        }
        Formula::Distinct(ts) => {
            out.push_str("(distinct");
            for t in ts {
                out.push(' ');
                term(out, t);
            }
            out.push(')');
        }
        Formula::Cmp(op, a, b) => {
            write!(out, "({} ", op.smt()).unwrap();
            term(out, a);
            out.push(' ');
            term(out, b);
            out.push(')');
        }
        Formula::Not(g) => {
            out.push_str("(not ");
            formula(out, g);
            out.push(')');
        }
        Formula::And(gs) => nary(out, "and", gs),
        Formula::Or(gs) => nary(out, "or", gs),
        Formula::Implies(a, b) => nary(out, "=>", &[(**a).clone(), (**b).clone()]),
        Formula::Iff(a, b) => nary(out, "=", &[(**a).clone(), (**b).clone()]),
        Formula::Forall(vs, b) | Formula::Exists(vs, b) => {
            let q = if matches!(f, Formula::Forall(..)) {
                "forall"
            } else {
                "exists"
            };
            write!(out, "({q} (").unwrap();
            for (i, (v, s)) in vs.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                write!(out, "({} {})", escape_symbol(v), sort_name(*s)).unwrap();
            }
            out.push_str(") ");
            formula(out, b);
            out.push(')');
        }
    }
}

/// Prints a formula on its own, mainly for diagnostics.
pub fn formula_text(f: &Formula) -> String {
    let mut s = String::new();
    formula(&mut s, f);
    s
}

/// Prints `t` as a complete SMT-LIB2 script ending in `(check-sat)`.
pub fn emit_smtlib(t: &Theory) -> String {
    let mut out = String::new();
    if let Some(n) = &t.name {
        writeln!(out, "; {}", n.replace('\n', " ")).unwrap();
    }
    out.push_str("(set-logic ALL)\n");
    let used = t.sorts_used();
    if used.contains(&Sort::SqlBool) {
        out.push_str("(declare-datatypes ((SqlBool 0)) (((TRUE) (FALSE) (NULL))))\n");
    }
    if used.contains(&Sort::Classifier) {
        out.push_str("(declare-sort Classifier 0)\n");
    }
    for d in t.decls() {
        if d.args.is_empty() {
            writeln!(
                out,
                "(declare-const {} {})",
                escape_symbol(&d.name),
                sort_name(d.result)
            )
            .unwrap();
        } else {
            let args: Vec<&str> = d.args.iter().map(|s| sort_name(*s)).collect();
            writeln!(
                out,
                "(declare-fun {} ({}) {})",
                escape_symbol(&d.name),
                args.join(" "),
                sort_name(d.result)
            )
            .unwrap();
        }
    }
    for a in t.axioms() {
        if let Some(n) = &a.note {
            writeln!(out, "; {}", n.replace('\n', " ")).unwrap();
        }
        out.push_str("(assert ");
        formula(&mut out, &a.formula);
        out.push_str(")\n");
    }
    out.push_str("(check-sat)\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::msfol::Decl;
    use proptest::prelude::*;

    #[test]
    fn empty_theory_is_prelude_and_check_sat() {
        assert_eq!(
            emit_smtlib(&Theory::new()),
            "(set-logic ALL)\n(check-sat)\n"
        );
    }

    #[test]
    fn sql_bool_use_declares_the_datatype() {
        let mut t = Theory::new();
        let b = t.declare(Decl::constant("b", Sort::SqlBool)).unwrap();
        t.assert(Formula::eq(b.term(), Term::sql_null()));
        let s = emit_smtlib(&t);
        assert!(s.contains("(declare-datatypes ((SqlBool 0)) (((TRUE) (FALSE) (NULL))))"));
        assert!(s.contains("(assert (= b NULL))"));
        assert!(!s.contains("Classifier"));
    }

    #[test]
    fn literals() {
        let mut s = String::new();
        term(&mut s, &Term::int(-3));
        assert_eq!(s, "(- 3)");
        assert_eq!(string_literal("a\"b"), "\"a\"\"b\"");
        assert_eq!(string_literal("é"), "\"\\u{e9}\"");
    }

    #[test]
    fn escaping_examples() {
        assert_eq!(escape_symbol("age"), "age");
        assert_eq!(escape_symbol("set!3"), "set!3");
        assert_eq!(escape_symbol("Student.age"), "Student.age");
        assert_eq!(escape_symbol("a b"), "|a b|");
        assert_eq!(escape_symbol("forall"), "|forall|");
        assert_eq!(escape_symbol("1x"), "|1x|");
        assert_eq!(escape_symbol("a|b"), "|a%7Cb|");
        assert_eq!(escape_symbol("⌜e⌝"), "|%E2%8C%9Ce%E2%8C%9D|");
    }

    proptest! {
        #[test]
        fn escaping_round_trips(name in "\\PC{1,12}") {
            let e = escape_symbol(&name);
            prop_assert_eq!(unescape_symbol(&e), Some(name.clone()));
            if e.starts_with('|') {
                let inner = &e[1..e.len() - 1];
                prop_assert!(!inner.contains('|') && !inner.contains('\\'));
            }
        }

        #[test]
        fn escaping_is_injective(a in "[a-z|%. ]{1,6}", b in "[a-z|%. ]{1,6}") {
            prop_assume!(a != b);
            prop_assert_ne!(escape_symbol(&a), escape_symbol(&b));
        }
    }
}
