//! Object-relational mapping of data models, object models and assignments.
//!
//! Classes become tables keyed by `<class>_id`, attributes become columns
//! and associations become two-column link tables with foreign keys.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write};

use indexmap::IndexMap;

use crate::datamodel::{Assignment, AttrType, DataModel, ObjectModel, Value};

/// Static type of a column or SQL expression.
///
/// `Id` marks object identifiers: class keys, association ends and
/// class-typed attributes. They are stored as `int` but compare only with
/// other identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SqlType {
    Int,
    Varchar,
    Bool,
    Id,
}

impl SqlType {
    pub fn ddl(self) -> &'static str {
        match self {
            SqlType::Int | SqlType::Id => "int",
            SqlType::Varchar => "varchar",
            SqlType::Bool => "boolean",
        }
    }
}

impl fmt::Display for SqlType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SqlType::Int => "int",
            SqlType::Varchar => "varchar",
            SqlType::Bool => "boolean",
            SqlType::Id => "id",
        })
    }
}

/// The model element a column stores.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnSource {
    ObjectId,
    Attribute(String),
    /// An association end; `right` selects the right end.
    End {
        right: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub name: String,
    pub ty: SqlType,
    pub source: ColumnSource,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForeignKey {
    pub name: String,
    pub column: String,
    pub table: String,
    pub target_column: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TableKind {
    Class,
    Association,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub name: String,
    pub kind: TableKind,
    pub columns: Vec<Column>,
    pub primary_key: Option<String>,
    pub foreign_keys: Vec<ForeignKey>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SqlSchema {
    pub tables: Vec<Table>,
}

impl SqlSchema {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

pub fn id_column(class: &str) -> String {
    format!("{class}_id")
}

/// The relational schema of `dm`.
pub fn o2s(dm: &DataModel) -> SqlSchema {
    let mut tables = Vec::new();
    for c in dm.classes() {
        let mut columns = vec![Column {
            name: id_column(c),
            ty: SqlType::Id,
            source: ColumnSource::ObjectId,
        }];
        let mut foreign_keys = Vec::new();
        for a in dm.attributes_of(c) {
            let ty = match &a.ty {
                AttrType::Integer => SqlType::Int,
                AttrType::String => SqlType::Varchar,
                AttrType::Class(t) => {
                    foreign_keys.push(ForeignKey {
                        name: format!("fk_{c}_{}", a.name),
                        column: a.name.clone(),
                        table: t.clone(),
                        target_column: id_column(t),
                    });
                    SqlType::Id
                }
            };
            columns.push(Column {
                name: a.name.clone(),
                ty,
                source: ColumnSource::Attribute(a.name.clone()),
            });
        }
        tables.push(Table {
            name: c.clone(),
            kind: TableKind::Class,
            columns,
            primary_key: Some(id_column(c)),
            foreign_keys,
        });
    }
    for s in dm.associations() {
        let ends = [
            (&s.left_end, &s.left_class, false),
            (&s.right_end, &s.right_class, true),
        ];
        tables.push(Table {
            name: s.name.clone(),
            kind: TableKind::Association,
            columns: ends
                .iter()
                .map(|(end, _, right)| Column {
                    name: end.to_string(),
                    ty: SqlType::Id,
                    source: ColumnSource::End { right: *right },
                })
                .collect(),
            primary_key: None,
            foreign_keys: ends
                .iter()
                .map(|(end, class, _)| ForeignKey {
                    name: format!("fk_{class}_{end}"),
                    column: end.to_string(),
                    table: class.to_string(),
                    target_column: id_column(class),
                })
                .collect(),
        });
    }
    SqlSchema { tables }
}

/// DDL for `dm`: class tables, then attribute columns and their foreign
/// keys, then association tables.
pub fn o2s_ddl(dm: &DataModel) -> String {
    let mut out = String::new();
    for c in dm.classes() {
        writeln!(out, "CREATE TABLE {c} ({} int PRIMARY KEY);", id_column(c)).unwrap();
    }
    for a in dm.attributes() {
        let ty = match &a.ty {
            AttrType::String => "varchar",
            AttrType::Integer | AttrType::Class(_) => "int",
        };
        writeln!(out, "ALTER TABLE {} ADD COLUMN {} {ty};", a.owner, a.name).unwrap();
        if let AttrType::Class(t) = &a.ty {
            writeln!(
                out,
                "ALTER TABLE {} ADD FOREIGN KEY fk_{}_{}({}) REFERENCES {t}({});",
                a.owner,
                a.owner,
                a.name,
                a.name,
                id_column(t)
            )
            .unwrap();
        }
    }
    for s in dm.associations() {
        writeln!(
            out,
            "CREATE TABLE {} ({l} int, {r} int, \
             FOREIGN KEY fk_{lc}_{l}({l}) REFERENCES {lc}({lid}), \
             FOREIGN KEY fk_{rc}_{r}({r}) REFERENCES {rc}({rid}));",
            s.name,
            l = s.left_end,
            r = s.right_end,
            lc = s.left_class,
            rc = s.right_class,
            lid = id_column(&s.left_class),
            rid = id_column(&s.right_class),
        )
        .unwrap();
    }
    out
}

/// A cell value, or the value of a SQL expression.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SqlValue {
    Int(i64),
    Str(String),
    Bool(bool),
    Null,
}

impl SqlValue {
    pub fn is_null(&self) -> bool {
        matches!(self, SqlValue::Null)
    }
}

impl fmt::Display for SqlValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SqlValue::Int(i) => write!(f, "{i}"),
            SqlValue::Str(s) => write!(f, "'{}'", s.replace('\'', "''")),
            SqlValue::Bool(true) => f.write_str("TRUE"),
            SqlValue::Bool(false) => f.write_str("FALSE"),
            SqlValue::Null => f.write_str("NULL"),
        }
    }
}

impl From<&Value> for SqlValue {
    fn from(v: &Value) -> Self {
        match v {
            Value::Int(i) | Value::Obj(i) => SqlValue::Int(*i),
            Value::Str(s) => SqlValue::Str(s.clone()),
            Value::Bool(b) => SqlValue::Bool(*b),
            Value::Null => SqlValue::Null,
        }
    }
}

/// Rows of every table of a schema, in insertion order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DatabaseInstance {
    tables: IndexMap<String, Vec<Vec<SqlValue>>>,
}

impl DatabaseInstance {
    pub fn rows(&self, table: &str) -> &[Vec<SqlValue>] {
        self.tables.get(table).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn tables(&self) -> impl Iterator<Item = (&String, &Vec<Vec<SqlValue>>)> {
        self.tables.iter()
    }

    /// Checks key uniqueness, foreign-key integrity and distinctness of
    /// association rows. Returns a description of the first violation.
    pub fn check(&self, schema: &SqlSchema) -> Result<(), String> {
        for t in &schema.tables {
            let rows = self.rows(&t.name);
            if let Some(pk) = &t.primary_key {
                let i = t.column_index(pk).expect("key column exists");
                let mut keys = BTreeSet::new();
                for r in rows {
                    if r[i].is_null() || !keys.insert(&r[i]) {
                        return Err(format!("{}: bad key {}", t.name, r[i]));
                    }
                }
            }
            for fk in &t.foreign_keys {
                let i = t.column_index(&fk.column).expect("fk column exists");
                let target = schema.table(&fk.table).expect("fk table exists");
                let j = target
                    .column_index(&fk.target_column)
                    .expect("fk target exists");
                let keys: BTreeSet<&SqlValue> =
                    self.rows(&fk.table).iter().map(|r| &r[j]).collect();
                for r in rows {
                    if !r[i].is_null() && !keys.contains(&r[i]) {
                        return Err(format!("{}: dangling {} = {}", t.name, fk.column, r[i]));
                    }
                }
            }
            if t.kind == TableKind::Association {
                let distinct: BTreeSet<&Vec<SqlValue>> = rows.iter().collect();
                if distinct.len() != rows.len() {
                    return Err(format!("{}: duplicate link row", t.name));
                }
            }
        }
        Ok(())
    }
}

/// The database corresponding to `om`.
pub fn o2s_inst(om: &ObjectModel, dm: &DataModel) -> DatabaseInstance {
    let schema = o2s(dm);
    let mut tables: IndexMap<String, Vec<Vec<SqlValue>>> = schema
        .tables
        .iter()
        .map(|t| (t.name.clone(), Vec::new()))
        .collect();
    for t in &schema.tables {
        let rows = tables.get_mut(&t.name).expect("table registered");
        match t.kind {
            TableKind::Class => {
                for o in om.objects_of(&t.name) {
                    rows.push(
                        t.columns
                            .iter()
                            .map(|c| match &c.source {
                                ColumnSource::Attribute(a) => SqlValue::from(&om.value(o.id, a)),
                                _ => SqlValue::Int(o.id),
                            })
                            .collect(),
                    );
                }
            }
            TableKind::Association => {
                for l in om.links().iter().filter(|l| l.assoc == t.name) {
                    rows.push(vec![SqlValue::Int(l.left), SqlValue::Int(l.right)]);
                }
            }
        }
    }
    DatabaseInstance { tables }
}

/// DML populating the database of `om`: object inserts, attribute updates
/// for non-null values, then link inserts.
pub fn o2s_inst_dml(om: &ObjectModel, dm: &DataModel) -> String {
    let mut out = String::new();
    for o in om.objects() {
        writeln!(
            out,
            "INSERT INTO {} ({}) VALUES ({});",
            o.class,
            id_column(&o.class),
            o.id
        )
        .unwrap();
    }
    for o in om.objects() {
        for a in dm.attributes_of(&o.class) {
            let v = om.value(o.id, &a.name);
            if v != Value::Null {
                writeln!(
                    out,
                    "UPDATE {} SET {} = {} WHERE {} = {};",
                    o.class,
                    a.name,
                    SqlValue::from(&v),
                    id_column(&o.class),
                    o.id
                )
                .unwrap();
            }
        }
    }
    for l in om.links() {
        let s = dm
            .association(&l.assoc)
            .expect("links conform to the model");
        writeln!(
            out,
            "INSERT INTO {} ({}, {}) VALUES ({}, {});",
            s.name, s.left_end, s.right_end, l.left, l.right
        )
        .unwrap();
    }
    out
}

/// Values of the free variables as seen by SQL.
pub type SqlAssignment = BTreeMap<String, SqlValue>;

/// Maps objects to their ids and keeps scalars as they are.
pub fn o2s_inst_assignment(sigma: &Assignment) -> SqlAssignment {
    sigma
        .iter()
        .map(|(k, v)| (k.clone(), SqlValue::from(v)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::tests::university;
    use crate::datamodel::{
        enumerate_object_models, load_data_model, EnumerationBounds, Link, Object,
    };
    use proptest::prelude::*;

    #[test]
    fn university_schema() {
        let s = o2s(&university());
        let shape: Vec<(&str, Vec<&str>)> = s
            .tables
            .iter()
            .map(|t| {
                (
                    t.name.as_str(),
                    t.columns.iter().map(|c| c.name.as_str()).collect(),
                )
            })
            .collect();
        assert_eq!(
            shape,
            [
                ("Student", vec!["Student_id", "name", "age"]),
                ("Lecturer", vec!["Lecturer_id", "name", "age"]),
                ("Enrolment", vec!["students", "lecturers"]),
            ]
        );
        let e = s.table("Enrolment").unwrap();
        assert_eq!(e.foreign_keys[0].table, "Student");
        assert_eq!(e.foreign_keys[1].table, "Lecturer");
        assert_eq!(
            s.table("Student").unwrap().column("age").unwrap().ty,
            SqlType::Int
        );
    }

    #[test]
    fn class_typed_attribute_is_a_foreign_key() {
        let dm = load_data_model(r#"{"classes": {"A": [{"name": "peer", "type": "B"}], "B": []}}"#)
            .unwrap();
        let s = o2s(&dm);
        let a = s.table("A").unwrap();
        assert_eq!(a.column("peer").unwrap().ty, SqlType::Id);
        assert_eq!(
            a.foreign_keys,
            [ForeignKey {
                name: "fk_A_peer".into(),
                column: "peer".into(),
                table: "B".into(),
                target_column: "B_id".into(),
            }]
        );
        assert!(o2s_ddl(&dm)
            .contains("ALTER TABLE A ADD FOREIGN KEY fk_A_peer(peer) REFERENCES B(B_id);"));
    }

    #[test]
    fn empty_model_has_empty_schema() {
        let dm = DataModel::default();
        assert!(o2s(&dm).tables.is_empty());
        assert_eq!(o2s_ddl(&dm), "");
    }

    #[test]
    fn university_ddl() {
        assert_eq!(
            o2s_ddl(&university()),
            "CREATE TABLE Student (Student_id int PRIMARY KEY);\n\
             CREATE TABLE Lecturer (Lecturer_id int PRIMARY KEY);\n\
             ALTER TABLE Student ADD COLUMN name varchar;\n\
             ALTER TABLE Student ADD COLUMN age int;\n\
             ALTER TABLE Lecturer ADD COLUMN name varchar;\n\
             ALTER TABLE Lecturer ADD COLUMN age int;\n\
             CREATE TABLE Enrolment (students int, lecturers int, \
             FOREIGN KEY fk_Student_students(students) REFERENCES Student(Student_id), \
             FOREIGN KEY fk_Lecturer_lecturers(lecturers) REFERENCES Lecturer(Lecturer_id));\n"
        );
    }

    fn sample() -> ObjectModel {
        let mut values = BTreeMap::new();
        values.insert((1, "name".to_string()), Value::Str("o'k".into()));
        values.insert((2, "age".to_string()), Value::Int(30));
        ObjectModel::new(
            &university(),
            vec![
                Object {
                    id: 1,
                    class: "Student".into(),
                },
                Object {
                    id: 2,
                    class: "Lecturer".into(),
                },
            ],
            values,
            [Link {
                assoc: "Enrolment".into(),
                left: 1,
                right: 2,
            }]
            .into(),
        )
        .unwrap()
    }

    #[test]
    fn instance_rows() {
        let dm = university();
        let db = o2s_inst(&sample(), &dm);
        assert_eq!(
            db.rows("Student"),
            [vec![
                SqlValue::Int(1),
                SqlValue::Str("o'k".into()),
                SqlValue::Null
            ]]
        );
        assert_eq!(
            db.rows("Lecturer"),
            [vec![SqlValue::Int(2), SqlValue::Null, SqlValue::Int(30)]]
        );
        assert_eq!(
            db.rows("Enrolment"),
            [vec![SqlValue::Int(1), SqlValue::Int(2)]]
        );
        assert_eq!(db.check(&o2s(&dm)), Ok(()));
    }

    #[test]
    fn empty_instance() {
        let dm = university();
        let db = o2s_inst(&ObjectModel::default(), &dm);
        assert!(db.tables().all(|(_, rows)| rows.is_empty()));
        assert_eq!(o2s_inst_dml(&ObjectModel::default(), &dm), "");
    }

    #[test]
    fn instance_dml() {
        assert_eq!(
            o2s_inst_dml(&sample(), &university()),
            "INSERT INTO Student (Student_id) VALUES (1);\n\
             INSERT INTO Lecturer (Lecturer_id) VALUES (2);\n\
             UPDATE Student SET name = 'o''k' WHERE Student_id = 1;\n\
             UPDATE Lecturer SET age = 30 WHERE Lecturer_id = 2;\n\
             INSERT INTO Enrolment (students, lecturers) VALUES (1, 2);\n"
        );
    }

    #[test]
    fn assignment_mapping() {
        let sigma = Assignment::new()
            .bind("self", Value::Obj(7))
            .bind("user", Value::Str("a".into()))
            .bind("caller", Value::Null);
        let s = o2s_inst_assignment(&sigma);
        assert_eq!(s["self"], SqlValue::Int(7));
        assert_eq!(s["user"], SqlValue::Str("a".into()));
        assert_eq!(s["caller"], SqlValue::Null);
    }

    #[test]
    fn check_detects_violations() {
        let dm = university();
        let schema = o2s(&dm);
        let mut db = o2s_inst(&sample(), &dm);
        db.tables
            .get_mut("Enrolment")
            .unwrap()
            .push(vec![SqlValue::Int(1), SqlValue::Int(9)]);
        assert!(db.check(&schema).unwrap_err().contains("dangling"));
        let mut db = o2s_inst(&sample(), &dm);
        db.tables
            .get_mut("Enrolment")
            .unwrap()
            .push(vec![SqlValue::Int(1), SqlValue::Int(2)]);
        assert!(db.check(&schema).unwrap_err().contains("duplicate"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// Distinct object models map to distinct databases that satisfy
        /// the schema constraints, and null attributes map to NULL cells.
        #[test]
        fn instance_mapping_is_injective(i in 0usize..400, j in 0usize..400) {
            let dm = university();
            let b = EnumerationBounds::uniform(1);
            let models: Vec<ObjectModel> = enumerate_object_models(&dm, &b).take(400).collect();
            let (a, c) = (&models[i % models.len()], &models[j % models.len()]);
            let (da, dc) = (o2s_inst(a, &dm), o2s_inst(c, &dm));
            prop_assert_eq!(da.check(&o2s(&dm)), Ok(()));
            prop_assert_eq!(a == c, da == dc);
            for o in a.objects() {
                let t = o2s(&dm);
                let table = t.table(&o.class).unwrap();
                let row = da.rows(&o.class).iter().find(|r| r[0] == SqlValue::Int(o.id)).unwrap();
                for attr in dm.attributes_of(&o.class) {
                    let k = table.column_index(&attr.name).unwrap();
                    prop_assert_eq!(a.value(o.id, &attr.name) == Value::Null, row[k].is_null());
                }
            }
        }
    }
}
