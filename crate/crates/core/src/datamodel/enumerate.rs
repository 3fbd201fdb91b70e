use std::collections::{BTreeMap, BTreeSet};

use super::{
    Assignment, AttrType, DataModel, EnumerationBounds, Link, Object, ObjectModel, Value, VarDecl,
    VarType,
};

enum Slot {
    Attr {
        obj: i64,
        attr: String,
        choices: Vec<Value>,
    },
    Link(Link),
}

impl Slot {
    fn arity(&self) -> usize {
        match self {
            Slot::Attr { choices, .. } => choices.len(),
            Slot::Link(_) => 2,
        }
    }
}

/// Lazily yields every object model within some bounds, in a fixed order.
///
/// Object counts vary slowest (first class most significant), then attribute
/// values, then link choices. Object ids are `1..=n`, assigned in class
/// declaration order.
pub struct ObjectModelIter<'a> {
    dm: &'a DataModel,
    bounds: &'a EnumerationBounds,
    counts: Vec<usize>,
    objects: Vec<Object>,
    slots: Vec<Slot>,
    digits: Vec<usize>,
    done: bool,
}

impl<'a> ObjectModelIter<'a> {
    fn new(dm: &'a DataModel, bounds: &'a EnumerationBounds) -> Self {
        let mut it = ObjectModelIter {
            dm,
            bounds,
            counts: vec![0; dm.classes().len()],
            objects: Vec::new(),
            slots: Vec::new(),
            digits: Vec::new(),
            done: false,
        };
        it.reshape();
        it
    }

    /// Rebuilds the slot list for the current object counts.
    fn reshape(&mut self) {
        self.objects.clear();
        let mut next_id = 1;
        for (c, &n) in self.dm.classes().iter().zip(&self.counts) {
            for _ in 0..n {
                self.objects.push(Object {
                    id: next_id,
                    class: c.clone(),
                });
                next_id += 1;
            }
        }
        let ids_of = |class: &str| -> Vec<i64> {
            self.objects
                .iter()
                .filter(|o| o.class == class)
                .map(|o| o.id)
                .collect()
        };
        self.slots.clear();
        for o in &self.objects {
            for a in self.dm.attributes_of(&o.class) {
                let choices = match &a.ty {
                    AttrType::Class(t) => std::iter::once(Value::Null)
                        .chain(ids_of(t).into_iter().map(Value::Obj))
                        .collect(),
                    _ => self.bounds.domain_for(a),
                };
                self.slots.push(Slot::Attr {
                    obj: o.id,
                    attr: a.name.clone(),
                    choices,
                });
            }
        }
        for s in self.dm.associations() {
            for l in ids_of(&s.left_class) {
                for r in ids_of(&s.right_class) {
                    self.slots.push(Slot::Link(Link {
                        assoc: s.name.clone(),
                        left: l,
                        right: r,
                    }));
                }
            }
        }
        self.digits = vec![0; self.slots.len()];
        // An empty attribute domain leaves nothing to enumerate for this shape.
        if self.slots.iter().any(|s| s.arity() == 0) {
            self.digits.clear();
            self.slots.clear();
            self.advance_counts();
        }
    }

    fn advance_counts(&mut self) {
        for i in (0..self.counts.len()).rev() {
            let max = self.bounds.max_objects_for(&self.dm.classes()[i]);
            if self.counts[i] < max {
                self.counts[i] += 1;
                self.reshape();
                return;
            }
            self.counts[i] = 0;
        }
        self.done = true;
    }

    fn current(&self) -> ObjectModel {
        let mut values = BTreeMap::new();
        let mut links = BTreeSet::new();
        for (slot, &d) in self.slots.iter().zip(&self.digits) {
            match slot {
                Slot::Attr { obj, attr, choices } => {
                    if choices[d] != Value::Null {
                        values.insert((*obj, attr.clone()), choices[d].clone());
                    }
                }
                Slot::Link(l) => {
                    if d == 1 {
                        links.insert(l.clone());
                    }
                }
            }
        }
        ObjectModel {
            objects: self.objects.clone(),
            values,
            links,
        }
    }
}

impl Iterator for ObjectModelIter<'_> {
    type Item = ObjectModel;

    fn next(&mut self) -> Option<ObjectModel> {
        if self.done {
            return None;
        }
        let out = self.current();
        let mut i = self.digits.len();
        loop {
            if i == 0 {
                self.advance_counts();
                break;
            }
            i -= 1;
            self.digits[i] += 1;
            if self.digits[i] < self.slots[i].arity() {
                break;
            }
            self.digits[i] = 0;
        }
        Some(out)
    }
}

/// Every object model of `dm` within `bounds`, each exactly once.
pub fn enumerate_object_models<'a>(
    dm: &'a DataModel,
    bounds: &'a EnumerationBounds,
) -> ObjectModelIter<'a> {
    ObjectModelIter::new(dm, bounds)
}

/// Every valid assignment of `vars` over `om`.
///
/// Object-typed variables range over the objects of their class plus null;
/// scalar variables over the bound domains; Boolean variables over
/// {null, false, true}.
pub fn enumerate_assignments(
    vars: &[VarDecl],
    om: &ObjectModel,
    bounds: &EnumerationBounds,
) -> Vec<Assignment> {
    let mut out = vec![Assignment::new()];
    for v in vars {
        let domain: Vec<Value> = match &v.ty {
            VarType::Integer => bounds.integers.clone(),
            VarType::String => bounds.strings.clone(),
            VarType::Boolean => vec![Value::Null, Value::Bool(false), Value::Bool(true)],
            VarType::Class(c) => std::iter::once(Value::Null)
                .chain(om.objects_of(c).map(|o| Value::Obj(o.id)))
                .collect(),
        };
        out = out
            .into_iter()
            .flat_map(|a| {
                domain
                    .iter()
                    .map(move |d| a.clone().bind(v.name.clone(), d.clone()))
            })
            .collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::tests::university;
    use crate::datamodel::{load_object_model, print_object_model, Attribute};
    use proptest::prelude::*;

    fn bounds(students: usize, lecturers: usize) -> EnumerationBounds {
        let mut b = EnumerationBounds::default();
        b.max_objects.insert("Student".into(), students);
        b.max_objects.insert("Lecturer".into(), lecturers);
        b
    }

    /// Direct count: a class with k objects contributes w^k attribute
    /// combinations (w = 3 ages * 2 names) and the association 2^(s*l) link sets.
    fn closed_form(max_s: u32, max_l: u32) -> u64 {
        let mut total = 0;
        for s in 0..=max_s {
            for l in 0..=max_l {
                total += 6u64.pow(s) * 6u64.pow(l) * 2u64.pow(s * l);
            }
        }
        total
    }

    #[test]
    fn zero_bounds_yield_only_the_empty_model() {
        let dm = university();
        let b = EnumerationBounds::uniform(0);
        let all: Vec<_> = enumerate_object_models(&dm, &b).collect();
        assert_eq!(all, vec![ObjectModel::default()]);
    }

    #[test]
    fn attributeless_class_with_one_object_gives_two_models() {
        let dm = DataModel::new(vec!["A".into()], vec![], vec![]).unwrap();
        let b = EnumerationBounds::uniform(1);
        assert_eq!(enumerate_object_models(&dm, &b).count(), 2);
    }

    #[test]
    fn university_counts_match_direct_enumeration() {
        let dm = university();
        // 1 + 6 + 6 + 36*2
        assert_eq!(enumerate_object_models(&dm, &bounds(1, 1)).count(), 85);
        assert_eq!(closed_form(1, 1), 85);
        let b = EnumerationBounds::uniform(2);
        assert_eq!(enumerate_object_models(&dm, &b).count(), 22621);
        assert_eq!(closed_form(2, 2), 22621);
    }

    #[test]
    fn enumeration_has_no_duplicates() {
        let dm = university();
        let b = bounds(1, 2);
        let all: Vec<_> = enumerate_object_models(&dm, &b).collect();
        let printed: BTreeSet<String> = all.iter().map(|o| print_object_model(o, &dm)).collect();
        assert_eq!(printed.len(), all.len());
    }

    #[test]
    fn class_typed_attributes_range_over_objects() {
        let dm = DataModel::new(
            vec!["A".into()],
            vec![Attribute {
                name: "peer".into(),
                owner: "A".into(),
                ty: AttrType::Class("A".into()),
            }],
            vec![],
        )
        .unwrap();
        // 0 objects: 1; 1 object: 2 choices; 2 objects: 3*3.
        assert_eq!(
            enumerate_object_models(&dm, &EnumerationBounds::uniform(2)).count(),
            12
        );
    }

    #[test]
    fn assignment_counts() {
        let dm = university();
        let om = ObjectModel::default();
        assert_eq!(
            enumerate_assignments(&[], &om, &EnumerationBounds::default()),
            vec![Assignment::new()]
        );
        let two = load_object_model(
            r#"{"objects": [{"id": 1, "class": "Student"}, {"id": 2, "class": "Student"}]}"#,
            &dm,
        )
        .unwrap();
        let v = [VarDecl::new("self", VarType::Class("Student".into()))];
        assert_eq!(
            enumerate_assignments(&v, &two, &EnumerationBounds::default()).len(),
            3
        );
        let one =
            load_object_model(r#"{"objects": [{"id": 1, "class": "Student"}]}"#, &dm).unwrap();
        let v = [
            VarDecl::new("self", VarType::Class("Student".into())),
            VarDecl::new("user", VarType::String),
        ];
        let all = enumerate_assignments(&v, &one, &EnumerationBounds::default());
        assert_eq!(all.len(), 2 * 2);
        assert_eq!(all.iter().collect::<BTreeSet<_>>().len(), 4);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn yielded_models_conform_and_round_trip(s in 0usize..=2, l in 0usize..=1, skip in 0usize..400) {
            let dm = university();
            let b = bounds(s, l);
            let total = enumerate_object_models(&dm, &b).count();
            let om = enumerate_object_models(&dm, &b).nth(skip % total).unwrap();
            let rebuilt = ObjectModel::new(&dm, om.objects().to_vec(), om.values().clone(), om.links().clone());
            prop_assert_eq!(rebuilt.as_ref(), Ok(&om));
            let text = print_object_model(&om, &dm);
            prop_assert_eq!(load_object_model(&text, &dm).unwrap(), om);
        }

        #[test]
        fn enumeration_is_monotone_in_bounds(s in 0usize..=1, l in 0usize..=1, ds in 0usize..=1, dl in 0usize..=1) {
            let dm = university();
            let small = bounds(s, l);
            let big = bounds(s + ds, l + dl);
            let bigger: BTreeSet<String> = enumerate_object_models(&dm, &big)
                .map(|o| print_object_model(&o, &dm))
                .collect();
            for om in enumerate_object_models(&dm, &small) {
                prop_assert!(bigger.contains(&print_object_model(&om, &dm)));
            }
        }
    }
}
