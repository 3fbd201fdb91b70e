//! Data models, object models and assignments.
//!
//! A [`DataModel`] is a set of classes with typed attributes plus binary
//! many-to-many associations. An [`ObjectModel`] populates a data model with
//! objects, attribute values and links. Both are immutable once validated.

mod enumerate;
mod json;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

pub use enumerate::{enumerate_assignments, enumerate_object_models, ObjectModelIter};
pub use json::{load_data_model, load_object_model, print_object_model};

/// Identifiers that would clash with the symbols the logic translations
/// generate, or with SMT-LIB built-ins.
pub(crate) const RESERVED_NAMES: &[&str] = &[
    "Int",
    "String",
    "Bool",
    "Integer",
    "Boolean",
    "Classifier",
    "SqlBool",
    "TRUE",
    "FALSE",
    "NULL",
    "true",
    "false",
    "null",
    "invalid",
    "id",
    "nullInt",
    "invalInt",
    "nullString",
    "invalString",
    "nullClassifier",
    "invalClassifier",
    "and",
    "or",
    "not",
    "distinct",
    "ite",
    "forall",
    "exists",
    "let",
    "match",
    "par",
    "as",
    "assert",
    "div",
    "mod",
    "abs",
];

const RESERVED_PREFIXES: &[&str] = &["index_", "val_", "left_", "right_", "str.", "re.", "int."];

pub(crate) fn check_identifier(name: &str) -> Result<(), ModelError> {
    let mut chars = name.chars();
    let ok_start = chars
        .next()
        .map(|c| c.is_ascii_alphabetic() || c == '_')
        .unwrap_or(false);
    if !ok_start || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(ModelError::BadIdentifier(name.to_string()));
    }
    if RESERVED_NAMES.contains(&name) || RESERVED_PREFIXES.iter().any(|p| name.starts_with(p)) {
        return Err(ModelError::ReservedIdentifier(name.to_string()));
    }
    Ok(())
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("malformed document: {0}")]
    Parse(String),
    #[error("`{0}` is not a valid identifier")]
    BadIdentifier(String),
    #[error("`{0}` is reserved")]
    ReservedIdentifier(String),
    #[error("duplicate class `{0}`")]
    DuplicateClass(String),
    #[error("duplicate attribute `{attr}` in class `{class}`")]
    DuplicateAttribute { class: String, attr: String },
    #[error("duplicate association `{0}`")]
    DuplicateAssociation(String),
    #[error("name `{0}` is used for more than one kind of model element")]
    NameClash(String),
    #[error("association `{0}` uses the same name for both ends")]
    SameEndNames(String),
    #[error("unknown class `{class}` referenced by {by}")]
    UnknownClass { class: String, by: String },
    #[error("duplicate object id {0}")]
    DuplicateObject(i64),
    #[error("object ids must be positive, got {0}")]
    NonPositiveId(i64),
    #[error("unknown object {0}")]
    UnknownObject(i64),
    #[error("unknown attribute `{attr}` on class `{class}`")]
    UnknownAttribute { class: String, attr: String },
    #[error("unknown association `{0}`")]
    UnknownAssociation(String),
    #[error("value {value} is not a valid `{ty}` for attribute `{class}.{attr}`")]
    IllTyped {
        class: String,
        attr: String,
        ty: String,
        value: String,
    },
    #[error("link {left} -> {right} of `{assoc}` connects objects of the wrong classes")]
    BadLink {
        assoc: String,
        left: i64,
        right: i64,
    },
    #[error("duplicate link {left} -> {right} of `{assoc}`")]
    DuplicateLink {
        assoc: String,
        left: i64,
        right: i64,
    },
}

/// Type of an attribute (or of an OCL/SQL variable).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AttrType {
    Integer,
    String,
    Class(String),
}

impl AttrType {
    pub fn parse(s: &str) -> AttrType {
        match s {
            "Integer" => AttrType::Integer,
            "String" => AttrType::String,
            other => AttrType::Class(other.to_string()),
        }
    }
}

impl fmt::Display for AttrType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttrType::Integer => f.write_str("Integer"),
            AttrType::String => f.write_str("String"),
            AttrType::Class(c) => f.write_str(c),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attribute {
    pub name: String,
    pub owner: String,
    pub ty: AttrType,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Association {
    pub name: String,
    pub left_end: String,
    pub left_class: String,
    pub right_end: String,
    pub right_class: String,
}

/// Result of resolving `obj.end` for an object of some class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EndNavigation<'a> {
    pub assoc: &'a Association,
    /// `true` when the navigated end is the right end, i.e. the source object
    /// sits at the left end.
    pub towards_right: bool,
    pub target: &'a str,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DataModel {
    classes: Vec<String>,
    attributes: Vec<Attribute>,
    associations: Vec<Association>,
}

impl DataModel {
    /// Builds a data model and checks all well-formedness invariants.
    pub fn new(
        classes: Vec<String>,
        attributes: Vec<Attribute>,
        associations: Vec<Association>,
    ) -> Result<Self, ModelError> {
        let mut seen = BTreeSet::new();
        for c in &classes {
            check_identifier(c)?;
            if !seen.insert(c.as_str()) {
                return Err(ModelError::DuplicateClass(c.clone()));
            }
        }
        let mut attr_keys = BTreeSet::new();
        for a in &attributes {
            check_identifier(&a.name)?;
            if !seen.contains(a.owner.as_str()) {
                return Err(ModelError::UnknownClass {
                    class: a.owner.clone(),
                    by: format!("attribute `{}`", a.name),
                });
            }
            if let AttrType::Class(t) = &a.ty {
                if !seen.contains(t.as_str()) {
                    return Err(ModelError::UnknownClass {
                        class: t.clone(),
                        by: format!("attribute `{}.{}`", a.owner, a.name),
                    });
                }
            }
            if !attr_keys.insert((a.owner.as_str(), a.name.as_str())) {
                return Err(ModelError::DuplicateAttribute {
                    class: a.owner.clone(),
                    attr: a.name.clone(),
                });
            }
        }
        let mut assoc_names = BTreeSet::new();
        for s in &associations {
            check_identifier(&s.name)?;
            check_identifier(&s.left_end)?;
            check_identifier(&s.right_end)?;
            if !assoc_names.insert(s.name.as_str()) {
                return Err(ModelError::DuplicateAssociation(s.name.clone()));
            }
            if s.left_end == s.right_end {
                return Err(ModelError::SameEndNames(s.name.clone()));
            }
            for c in [&s.left_class, &s.right_class] {
                if !seen.contains(c.as_str()) {
                    return Err(ModelError::UnknownClass {
                        class: c.clone(),
                        by: format!("association `{}`", s.name),
                    });
                }
            }
        }
        // Classes, attributes and associations share one symbol namespace in
        // the generated theories.
        let attr_names: BTreeSet<&str> = attributes.iter().map(|a| a.name.as_str()).collect();
        for name in attr_names.iter().chain(assoc_names.iter()) {
            if seen.contains(name) {
                return Err(ModelError::NameClash(name.to_string()));
            }
        }
        if let Some(n) = assoc_names.intersection(&attr_names).next() {
            return Err(ModelError::NameClash(n.to_string()));
        }
        // The relational schema gives every class table a `<class>_id` key.
        if let Some(a) = attributes
            .iter()
            .find(|a| a.name == format!("{}_id", a.owner))
        {
            return Err(ModelError::NameClash(a.name.clone()));
        }
        Ok(DataModel {
            classes,
            attributes,
            associations,
        })
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn associations(&self) -> &[Association] {
        &self.associations
    }

    pub fn has_class(&self, name: &str) -> bool {
        self.classes.iter().any(|c| c == name)
    }

    pub fn attributes_of<'a>(&'a self, class: &'a str) -> impl Iterator<Item = &'a Attribute> + 'a {
        self.attributes.iter().filter(move |a| a.owner == class)
    }

    pub fn attribute(&self, class: &str, name: &str) -> Option<&Attribute> {
        self.attributes
            .iter()
            .find(|a| a.owner == class && a.name == name)
    }

    pub fn association(&self, name: &str) -> Option<&Association> {
        self.associations.iter().find(|a| a.name == name)
    }

    /// Resolves `obj.end` where `obj` has class `class`.
    pub fn navigate(&self, class: &str, end: &str) -> Option<EndNavigation<'_>> {
        self.associations.iter().find_map(|a| {
            if a.right_end == end && a.left_class == class {
                Some(EndNavigation {
                    assoc: a,
                    towards_right: true,
                    target: &a.right_class,
                })
            } else if a.left_end == end && a.right_class == class {
                Some(EndNavigation {
                    assoc: a,
                    towards_right: false,
                    target: &a.left_class,
                })
            } else {
                None
            }
        })
    }

    /// Name of the logic function that represents `class.attr`.
    ///
    /// Attributes with the same name and type in different classes share one
    /// function (the class predicates are disjoint); when the types disagree
    /// the function is qualified with the class name.
    pub fn attribute_symbol(&self, attr: &Attribute) -> String {
        let conflicting = self
            .attributes
            .iter()
            .any(|b| b.name == attr.name && b.ty != attr.ty);
        if conflicting {
            format!("{}.{}", attr.owner, attr.name)
        } else {
            attr.name.clone()
        }
    }
}

/// A value that can be stored in an attribute or bound to a variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(i64),
    Str(String),
    Bool(bool),
    Obj(i64),
    Null,
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Str(s) => write!(f, "{s:?}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Obj(id) => write!(f, "#{id}"),
            Value::Null => f.write_str("null"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Object {
    pub id: i64,
    pub class: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Link {
    pub assoc: String,
    pub left: i64,
    pub right: i64,
}

/// A population of a data model.
///
/// Attribute values not present in `values` are null.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ObjectModel {
    objects: Vec<Object>,
    values: BTreeMap<(i64, String), Value>,
    links: BTreeSet<Link>,
}

impl ObjectModel {
    pub fn new(
        dm: &DataModel,
        objects: Vec<Object>,
        values: BTreeMap<(i64, String), Value>,
        links: BTreeSet<Link>,
    ) -> Result<Self, ModelError> {
        let mut classes = BTreeMap::new();
        for o in &objects {
            if o.id <= 0 {
                return Err(ModelError::NonPositiveId(o.id));
            }
            if !dm.has_class(&o.class) {
                return Err(ModelError::UnknownClass {
                    class: o.class.clone(),
                    by: format!("object {}", o.id),
                });
            }
            if classes.insert(o.id, o.class.as_str()).is_some() {
                return Err(ModelError::DuplicateObject(o.id));
            }
        }
        let mut clean = BTreeMap::new();
        for ((id, attr), v) in values {
            let class = *classes.get(&id).ok_or(ModelError::UnknownObject(id))?;
            let a = dm
                .attribute(class, &attr)
                .ok_or_else(|| ModelError::UnknownAttribute {
                    class: class.to_string(),
                    attr: attr.clone(),
                })?;
            let ok = match (&a.ty, &v) {
                (_, Value::Null) => true,
                (AttrType::Integer, Value::Int(_)) => true,
                (AttrType::String, Value::Str(_)) => true,
                (AttrType::Class(c), Value::Obj(o)) => classes.get(o) == Some(&c.as_str()),
                _ => false,
            };
            if !ok {
                return Err(ModelError::IllTyped {
                    class: class.to_string(),
                    attr,
                    ty: a.ty.to_string(),
                    value: v.to_string(),
                });
            }
            if v != Value::Null {
                clean.insert((id, attr), v);
            }
        }
        for l in &links {
            let a = dm
                .association(&l.assoc)
                .ok_or_else(|| ModelError::UnknownAssociation(l.assoc.clone()))?;
            let lc = classes
                .get(&l.left)
                .ok_or(ModelError::UnknownObject(l.left))?;
            let rc = classes
                .get(&l.right)
                .ok_or(ModelError::UnknownObject(l.right))?;
            if *lc != a.left_class || *rc != a.right_class {
                return Err(ModelError::BadLink {
                    assoc: l.assoc.clone(),
                    left: l.left,
                    right: l.right,
                });
            }
        }
        Ok(ObjectModel {
            objects,
            values: clean,
            links,
        })
    }

    pub fn objects(&self) -> &[Object] {
        &self.objects
    }

    pub fn objects_of<'a>(&'a self, class: &'a str) -> impl Iterator<Item = &'a Object> + 'a {
        self.objects.iter().filter(move |o| o.class == class)
    }

    pub fn class_of(&self, id: i64) -> Option<&str> {
        self.objects
            .iter()
            .find(|o| o.id == id)
            .map(|o| o.class.as_str())
    }

    /// Value of `attr` on object `id`; null when unset.
    pub fn value(&self, id: i64, attr: &str) -> Value {
        self.values
            .get(&(id, attr.to_string()))
            .cloned()
            .unwrap_or(Value::Null)
    }

    /// Non-null attribute values, keyed by (object, attribute).
    pub fn values(&self) -> &BTreeMap<(i64, String), Value> {
        &self.values
    }

    pub fn links(&self) -> &BTreeSet<Link> {
        &self.links
    }

    pub fn linked(&self, assoc: &str, left: i64, right: i64) -> bool {
        self.links.contains(&Link {
            assoc: assoc.to_string(),
            left,
            right,
        })
    }
}

/// OCL type of a declared free variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum VarType {
    Integer,
    String,
    Boolean,
    Class(String),
}

impl fmt::Display for VarType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarType::Integer => f.write_str("Integer"),
            VarType::String => f.write_str("String"),
            VarType::Boolean => f.write_str("Boolean"),
            VarType::Class(c) => f.write_str(c),
        }
    }
}

/// A typed free variable shared by an OCL constraint and its SQL
/// implementation.
///
/// Object-typed variables denote an existing object of their class unless
/// declared `nullable` (written `name:Class?`), in which case they may also
/// be null. Scalar variables are always nullable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VarDecl {
    pub name: String,
    pub ty: VarType,
    pub nullable: bool,
}

impl VarDecl {
    pub fn new(name: impl Into<String>, ty: VarType) -> Self {
        let nullable = !matches!(ty, VarType::Class(_));
        VarDecl {
            name: name.into(),
            ty,
            nullable,
        }
    }

    pub fn nullable(name: impl Into<String>, ty: VarType) -> Self {
        VarDecl {
            name: name.into(),
            ty,
            nullable: true,
        }
    }

    /// Parses `name:Type` or `name:Class?`.
    pub fn parse(spec: &str, dm: &DataModel) -> Result<Self, ModelError> {
        let (name, ty) = spec
            .split_once(':')
            .ok_or_else(|| ModelError::Parse(format!("expected NAME:TYPE, got `{spec}`")))?;
        let name = name.trim();
        let ty = ty.trim();
        check_identifier(name)?;
        let (ty, optional) = match ty.strip_suffix('?') {
            Some(t) => (t, true),
            None => (ty, false),
        };
        let vt = match ty {
            "Integer" => VarType::Integer,
            "String" => VarType::String,
            "Boolean" => VarType::Boolean,
            c if dm.has_class(c) => VarType::Class(c.to_string()),
            c => {
                return Err(ModelError::UnknownClass {
                    class: c.to_string(),
                    by: format!("variable `{name}`"),
                })
            }
        };
        let mut d = VarDecl::new(name, vt);
        d.nullable |= optional;
        Ok(d)
    }
}

impl fmt::Display for VarDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.name, self.ty)?;
        if self.nullable && matches!(self.ty, VarType::Class(_)) {
            f.write_str("?")?;
        }
        Ok(())
    }
}

/// A binding of free variables to values. Never binds `invalid`.
#[derive(Debug, Clone, PartialEq, Eq, Default, PartialOrd, Ord)]
pub struct Assignment {
    bindings: BTreeMap<String, Value>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bind(mut self, name: impl Into<String>, v: Value) -> Self {
        self.bindings.insert(name.into(), v);
        self
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.bindings.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Value)> {
        self.bindings.iter()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.bindings.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k} = {v}")?;
        }
        f.write_str("}")
    }
}

/// Finite bounds for exhaustive enumeration of object models and assignments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumerationBounds {
    pub default_max_objects: usize,
    pub max_objects: BTreeMap<String, usize>,
    /// Domain for Integer attributes and variables, unless overridden.
    pub integers: Vec<Value>,
    /// Domain for String attributes and variables, unless overridden.
    pub strings: Vec<Value>,
    /// Per-attribute overrides keyed by (class, attribute).
    pub attribute_domains: BTreeMap<(String, String), Vec<Value>>,
}

impl Default for EnumerationBounds {
    fn default() -> Self {
        EnumerationBounds {
            default_max_objects: 2,
            max_objects: BTreeMap::new(),
            integers: vec![Value::Null, Value::Int(17), Value::Int(19)],
            strings: vec![Value::Null, Value::Str("a".into())],
            attribute_domains: BTreeMap::new(),
        }
    }
}

impl EnumerationBounds {
    pub fn uniform(max_objects: usize) -> Self {
        EnumerationBounds {
            default_max_objects: max_objects,
            ..Self::default()
        }
    }

    pub fn max_objects_for(&self, class: &str) -> usize {
        self.max_objects
            .get(class)
            .copied()
            .unwrap_or(self.default_max_objects)
    }

    /// Domain of a scalar attribute. Class-typed attributes range over the
    /// objects of the model being built and are handled by the enumerator.
    pub fn domain_for(&self, attr: &Attribute) -> Vec<Value> {
        if let Some(d) = self
            .attribute_domains
            .get(&(attr.owner.clone(), attr.name.clone()))
        {
            return d.clone();
        }
        match attr.ty {
            AttrType::Integer => self.integers.clone(),
            AttrType::String => self.strings.clone(),
            AttrType::Class(_) => vec![Value::Null],
        }
    }

    /// Parses `key=value` clauses separated by `;`:
    /// `objects=N`, `<Class>=N`, `Integer=v,v,..`, `String=v,v,..` and
    /// `<Class>.<attr>=v,v,..`. Values are integers, `null`, or strings
    /// (optionally double-quoted).
    pub fn parse(spec: &str) -> Result<Self, ModelError> {
        let mut b = EnumerationBounds::default();
        for clause in spec.split(';').map(str::trim).filter(|c| !c.is_empty()) {
            let (k, v) = clause
                .split_once('=')
                .ok_or_else(|| ModelError::Parse(format!("bad bounds clause `{clause}`")))?;
            let (k, v) = (k.trim(), v.trim());
            let parse_n = |v: &str| {
                v.parse::<usize>()
                    .map_err(|_| ModelError::Parse(format!("bad object bound `{v}`")))
            };
            match k {
                "objects" => b.default_max_objects = parse_n(v)?,
                "Integer" => b.integers = parse_values(v, true)?,
                "String" => b.strings = parse_values(v, false)?,
                _ => match k.split_once('.') {
                    Some((c, a)) => {
                        let numeric = v
                            .split(',')
                            .all(|x| x.trim() == "null" || x.trim().parse::<i64>().is_ok());
                        b.attribute_domains
                            .insert((c.to_string(), a.to_string()), parse_values(v, numeric)?);
                    }
                    None => {
                        b.max_objects.insert(k.to_string(), parse_n(v)?);
                    }
                },
            }
        }
        Ok(b)
    }
}

fn parse_values(v: &str, numeric: bool) -> Result<Vec<Value>, ModelError> {
    v.split(',')
        .map(str::trim)
        .map(|x| {
            if x == "null" {
                Ok(Value::Null)
            } else if numeric {
                x.parse()
                    .map(Value::Int)
                    .map_err(|_| ModelError::Parse(format!("bad integer `{x}`")))
            } else {
                Ok(Value::Str(x.trim_matches('"').to_string()))
            }
        })
        .collect()
}
