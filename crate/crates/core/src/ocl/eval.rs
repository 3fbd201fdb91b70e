//! Direct four-valued evaluation over an object model.

use std::collections::BTreeSet;
use std::fmt;

use crate::datamodel::{Assignment, ObjectModel, Value};

use super::{BinOp, CollOp, IterKind, OclExpr};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum OclValue {
    Bool(bool),
    Int(i64),
    Str(String),
    Obj(i64),
    Null,
    Invalid,
    Set(BTreeSet<OclValue>),
}

impl OclValue {
    pub fn is_undefined(&self) -> bool {
        matches!(self, OclValue::Null | OclValue::Invalid)
    }

    pub fn is_true(&self) -> bool {
        *self == OclValue::Bool(true)
    }
}

impl From<&Value> for OclValue {
    fn from(v: &Value) -> Self {
        match v {
            Value::Int(i) => OclValue::Int(*i),
            Value::Str(s) => OclValue::Str(s.clone()),
            Value::Bool(b) => OclValue::Bool(*b),
            Value::Obj(o) => OclValue::Obj(*o),
            Value::Null => OclValue::Null,
        }
    }
}

impl fmt::Display for OclValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OclValue::Bool(b) => write!(f, "{b}"),
            OclValue::Int(i) => write!(f, "{i}"),
            OclValue::Str(s) => write!(f, "'{s}'"),
            OclValue::Obj(o) => write!(f, "#{o}"),
            OclValue::Null => f.write_str("null"),
            OclValue::Invalid => f.write_str("invalid"),
            OclValue::Set(s) => {
                f.write_str("Set{")?;
                for (i, v) in s.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("}")
            }
        }
    }
}

/// Four-valued conjunction: false dominates, then invalid, then null.
pub(crate) fn and4(a: &OclValue, b: &OclValue) -> OclValue {
    use OclValue::*;
    match (a, b) {
        (Bool(false), _) | (_, Bool(false)) => Bool(false),
        (Invalid, _) | (_, Invalid) => Invalid,
        (Null, _) | (_, Null) => Null,
        _ => Bool(true),
    }
}

/// Four-valued disjunction: true dominates, then invalid, then null.
pub(crate) fn or4(a: &OclValue, b: &OclValue) -> OclValue {
    use OclValue::*;
    match (a, b) {
        (Bool(true), _) | (_, Bool(true)) => Bool(true),
        (Invalid, _) | (_, Invalid) => Invalid,
        (Null, _) | (_, Null) => Null,
        _ => Bool(false),
    }
}

pub(crate) fn not4(a: &OclValue) -> OclValue {
    match a {
        OclValue::Bool(b) => OclValue::Bool(!b),
        other => other.clone(),
    }
}

pub(crate) fn xor4(a: &OclValue, b: &OclValue) -> OclValue {
    use OclValue::*;
    match (a, b) {
        (Invalid, _) | (_, Invalid) => Invalid,
        (Null, _) | (_, Null) => Null,
        (Bool(x), Bool(y)) => Bool(x != y),
        _ => Invalid,
    }
}

pub(crate) fn implies4(a: &OclValue, b: &OclValue) -> OclValue {
    or4(&not4(a), b)
}

struct Evaluator<'a> {
    om: &'a ObjectModel,
    env: Vec<(String, OclValue)>,
}

impl Evaluator<'_> {
    fn eval(&mut self, e: &OclExpr) -> OclValue {
        use OclValue::*;
        match e {
            OclExpr::Bool(b) => Bool(*b),
            OclExpr::Int(i) => Int(*i),
            OclExpr::Str(s) => Str(s.clone()),
            OclExpr::Null => Null,
            OclExpr::Invalid => Invalid,
            OclExpr::Var(v, _) => self
                .env
                .iter()
                .rev()
                .find(|(n, _)| n == v)
                .map(|(_, x)| x.clone())
                .unwrap_or(Invalid),
            OclExpr::Attr { src, attr, .. } => match self.eval(src) {
                Obj(id) => OclValue::from(&self.om.value(id, attr)),
                _ => Invalid,
            },
            OclExpr::Nav {
                src,
                assoc,
                towards_right,
                ..
            } => match self.eval(src) {
                Obj(id) => Set(self
                    .om
                    .links()
                    .iter()
                    .filter(|l| l.assoc == *assoc)
                    .filter_map(|l| match towards_right {
                        true if l.left == id => Some(Obj(l.right)),
                        false if l.right == id => Some(Obj(l.left)),
                        _ => None,
                    })
                    .collect()),
                _ => Invalid,
            },
            OclExpr::AllInstances(c) => Set(self.om.objects_of(c).map(|o| Obj(o.id)).collect()),
            OclExpr::Iterate {
                kind,
                src,
                var,
                body,
                ..
            } => {
                let Set(items) = self.eval(src) else {
                    return Invalid;
                };
                let mut results = Vec::with_capacity(items.len());
                for item in &items {
                    self.env.push((var.clone(), item.clone()));
                    results.push((item, self.eval(body)));
                    self.env.pop();
                }
                match kind {
                    IterKind::ForAll => {
                        results.iter().fold(Bool(true), |acc, (_, r)| and4(&acc, r))
                    }
                    IterKind::Exists => {
                        results.iter().fold(Bool(false), |acc, (_, r)| or4(&acc, r))
                    }
                    IterKind::Select | IterKind::Reject => {
                        if results.iter().any(|(_, r)| r.is_undefined()) {
                            return Invalid;
                        }
                        let keep = *kind == IterKind::Select;
                        Set(results
                            .into_iter()
                            .filter(|(_, r)| *r == Bool(keep))
                            .map(|(i, _)| i.clone())
                            .collect())
                    }
                    IterKind::Collect => {
                        if results.iter().any(|(_, r)| *r == Invalid) {
                            return Invalid;
                        }
                        Set(results.into_iter().map(|(_, r)| r).collect())
                    }
                }
            }
            OclExpr::Coll { op, src, arg } => {
                let Set(s) = self.eval(src) else {
                    return Invalid;
                };
                let a = arg.as_ref().map(|a| self.eval(a));
                match (op, a) {
                    (CollOp::IsEmpty, _) => Bool(s.is_empty()),
                    (CollOp::NotEmpty, _) => Bool(!s.is_empty()),
                    (_, Some(Invalid)) | (_, None) => Invalid,
                    (CollOp::Including, Some(v)) => {
                        let mut s = s;
                        s.insert(v);
                        Set(s)
                    }
                    (CollOp::Excluding, Some(v)) => {
                        let mut s = s;
                        s.remove(&v);
                        Set(s)
                    }
                    (CollOp::Union, Some(Set(t))) => Set(s.union(&t).cloned().collect()),
                    (CollOp::Intersection, Some(Set(t))) => {
                        Set(s.intersection(&t).cloned().collect())
                    }
                    _ => Invalid,
                }
            }
            OclExpr::IsUndefined(e) => Bool(self.eval(e).is_undefined()),
            OclExpr::Not(e) => not4(&self.eval(e)),
            OclExpr::Bin(op, a, b) => {
                let (x, y) = (self.eval(a), self.eval(b));
                match op {
                    BinOp::And => and4(&x, &y),
                    BinOp::Or => or4(&x, &y),
                    BinOp::Xor => xor4(&x, &y),
                    BinOp::Implies => implies4(&x, &y),
                    BinOp::Eq | BinOp::Neq => {
                        if x == Invalid || y == Invalid {
                            Invalid
                        } else {
                            Bool((x == y) == (*op == BinOp::Eq))
                        }
                    }
                    BinOp::Cmp(c) => match (x, y) {
                        (Int(i), Int(j)) => Bool(c.holds(i, j)),
                        _ => Invalid,
                    },
                }
            }
        }
    }
}

/// Evaluates `e` in `om` under `sigma`. Unbound variables evaluate to
/// `invalid`.
pub fn eval_ocl(om: &ObjectModel, sigma: &Assignment, e: &OclExpr) -> OclValue {
    let mut ev = Evaluator {
        om,
        env: sigma
            .iter()
            .map(|(k, v)| (k.clone(), OclValue::from(v)))
            .collect(),
    };
    ev.eval(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::tests::university;
    use crate::datamodel::{load_object_model, VarDecl, VarType};
    use crate::ocl::parse_ocl;
    use proptest::prelude::*;

    const B: [OclValue; 4] = [
        OclValue::Bool(true),
        OclValue::Bool(false),
        OclValue::Null,
        OclValue::Invalid,
    ];

    fn ev(src: &str, om: &ObjectModel, sigma: &Assignment) -> OclValue {
        let vars = [
            VarDecl::new("self", VarType::Class("Student".into())),
            VarDecl::new("caller", VarType::Class("Lecturer".into())),
            VarDecl::new("user", VarType::String),
        ];
        eval_ocl(om, sigma, &parse_ocl(src, &university(), &vars).unwrap())
    }

    #[test]
    fn null_equals_null() {
        let om = ObjectModel::default();
        assert_eq!(
            ev("null = null", &om, &Assignment::new()),
            OclValue::Bool(true)
        );
        assert_eq!(
            ev("null <> null", &om, &Assignment::new()),
            OclValue::Bool(false)
        );
        assert_eq!(
            ev("null = invalid", &om, &Assignment::new()),
            OclValue::Invalid
        );
    }

    #[test]
    fn empty_extent() {
        let om = ObjectModel::default();
        let s = Assignment::new();
        assert!(ev("Student.allInstances()->isEmpty()", &om, &s).is_true());
        assert!(ev("Student.allInstances()->forAll(s | false)", &om, &s).is_true());
        assert_eq!(
            ev("Student.allInstances()->exists(s | true)", &om, &s),
            OclValue::Bool(false)
        );
    }

    fn ex4_model(lecturer_age: i64) -> ObjectModel {
        load_object_model(
            &format!(
                r#"{{"objects": [
                    {{"id": 1, "class": "Student", "attrs": {{"age": 20}}}},
                    {{"id": 2, "class": "Student", "attrs": {{"age": 25}}}},
                    {{"id": 3, "class": "Lecturer", "attrs": {{"age": {lecturer_age}}}}}],
                  "links": [{{"assoc": "Enrolment", "left": 1, "right": 3}},
                            {{"assoc": "Enrolment", "left": 2, "right": 3}}]}}"#
            ),
            &university(),
        )
        .unwrap()
    }

    #[test]
    fn nested_for_all() {
        let e = "Student.allInstances()->forAll(s | s.lecturers->forAll(l | s.age < l.age))";
        // Expanded by hand: 20 < 30 and 25 < 30; then 20 < 22 but not 25 < 22.
        assert!(ev(e, &ex4_model(30), &Assignment::new()).is_true());
        assert_eq!(
            ev(e, &ex4_model(22), &Assignment::new()),
            OclValue::Bool(false)
        );
    }

    #[test]
    fn navigation_and_attribute_on_null() {
        let om = ex4_model(30);
        let s = Assignment::new()
            .bind("caller", Value::Null)
            .bind("self", Value::Null);
        assert_eq!(ev("caller.students->isEmpty()", &om, &s), OclValue::Invalid);
        assert_eq!(ev("self.age", &om, &s), OclValue::Invalid);
        assert!(ev("self.age.oclIsUndefined()", &om, &s).is_true());
        let s = Assignment::new().bind("caller", Value::Obj(3));
        assert_eq!(
            ev("caller.students", &om, &s),
            OclValue::Set([OclValue::Obj(1), OclValue::Obj(2)].into())
        );
    }

    #[test]
    fn comparisons_with_null_are_invalid() {
        let om = ObjectModel::default();
        assert_eq!(ev("null < 3", &om, &Assignment::new()), OclValue::Invalid);
        let s = Assignment::new().bind("user", Value::Null);
        assert_eq!(ev("user = 'a'", &om, &s), OclValue::Bool(false));
    }

    #[test]
    fn collection_operations() {
        let om = ex4_model(30);
        let s = Assignment::new();
        assert_eq!(
            ev("Student.allInstances()->collect(s | s.age)", &om, &s),
            OclValue::Set([OclValue::Int(20), OclValue::Int(25)].into())
        );
        assert_eq!(
            ev("Student.allInstances()->collect(s | s.name)", &om, &s),
            OclValue::Set([OclValue::Null].into())
        );
        assert_eq!(
            ev(
                "Student.allInstances()->select(s | s.name = 'a')->isEmpty()",
                &om,
                &s
            ),
            OclValue::Bool(true)
        );
        assert_eq!(
            ev("Student.allInstances()->select(s | s.name.oclIsUndefined() and s.age > 21)->notEmpty()", &om, &s),
            OclValue::Bool(true)
        );
    }

    /// The documented connective tables, row by row, in the order
    /// true, false, null, invalid.
    #[test]
    fn four_valued_tables() {
        use OclValue::{Bool, Invalid as I, Null as N};
        let (t, f) = (Bool(true), Bool(false));
        let and = [
            [t.clone(), f.clone(), N, I],
            [f.clone(), f.clone(), f.clone(), f.clone()],
            [N, f.clone(), N, I],
            [I, f.clone(), I, I],
        ];
        let or = [
            [t.clone(), t.clone(), t.clone(), t.clone()],
            [t.clone(), f.clone(), N, I],
            [t.clone(), N, N, I],
            [t.clone(), I, I, I],
        ];
        let implies = [
            [t.clone(), f.clone(), N, I],
            [t.clone(), t.clone(), t.clone(), t.clone()],
            [t.clone(), N, N, I],
            [t.clone(), I, I, I],
        ];
        let not = [f.clone(), t.clone(), N, I];
        for i in 0..4 {
            assert_eq!(not4(&B[i]), not[i]);
            for j in 0..4 {
                assert_eq!(and4(&B[i], &B[j]), and[i][j], "{} and {}", B[i], B[j]);
                assert_eq!(or4(&B[i], &B[j]), or[i][j], "{} or {}", B[i], B[j]);
                assert_eq!(
                    implies4(&B[i], &B[j]),
                    implies[i][j],
                    "{} implies {}",
                    B[i],
                    B[j]
                );
            }
        }
    }

    fn bool_value() -> impl Strategy<Value = OclValue> {
        prop::sample::select(B.to_vec())
    }

    proptest! {
        #[test]
        fn connectives_are_commutative(a in bool_value(), b in bool_value()) {
            prop_assert_eq!(and4(&a, &b), and4(&b, &a));
            prop_assert_eq!(or4(&a, &b), or4(&b, &a));
            prop_assert_eq!(xor4(&a, &b), xor4(&b, &a));
        }

        #[test]
        fn de_morgan(a in bool_value(), b in bool_value()) {
            prop_assert_eq!(not4(&and4(&a, &b)), or4(&not4(&a), &not4(&b)));
        }
    }
}
