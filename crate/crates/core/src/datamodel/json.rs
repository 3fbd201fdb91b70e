use std::collections::{BTreeMap, BTreeSet};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use super::{
    Association, AttrType, Attribute, DataModel, Link, ModelError, Object, ObjectModel, Value,
};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DataModelDoc {
    #[serde(default)]
    classes: IndexMap<String, Vec<AttrDoc>>,
    #[serde(default)]
    associations: Vec<AssocDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AttrDoc {
    name: String,
    #[serde(rename = "type")]
    ty: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct AssocDoc {
    name: String,
    left_end: String,
    left_class: String,
    right_end: String,
    right_class: String,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct ObjectModelDoc {
    #[serde(default)]
    objects: Vec<ObjectDoc>,
    #[serde(default)]
    links: Vec<LinkDoc>,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct ObjectDoc {
    id: i64,
    class: String,
    #[serde(default)]
    attrs: IndexMap<String, Json>,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct LinkDoc {
    assoc: String,
    left: i64,
    right: i64,
}

/// Parses a data-model document.
pub fn load_data_model(text: &str) -> Result<DataModel, ModelError> {
    let doc: DataModelDoc =
        serde_json::from_str(text).map_err(|e| ModelError::Parse(e.to_string()))?;
    let classes: Vec<String> = doc.classes.keys().cloned().collect();
    let attributes = doc
        .classes
        .iter()
        .flat_map(|(c, attrs)| {
            attrs.iter().map(move |a| Attribute {
                name: a.name.clone(),
                owner: c.clone(),
                ty: AttrType::parse(&a.ty),
            })
        })
        .collect();
    let associations = doc
        .associations
        .into_iter()
        .map(|a| Association {
            name: a.name,
            left_end: a.left_end,
            left_class: a.left_class,
            right_end: a.right_end,
            right_class: a.right_class,
        })
        .collect();
    DataModel::new(classes, attributes, associations)
}

/// Parses an object-model document against `dm`.
pub fn load_object_model(text: &str, dm: &DataModel) -> Result<ObjectModel, ModelError> {
    let doc: ObjectModelDoc =
        serde_json::from_str(text).map_err(|e| ModelError::Parse(e.to_string()))?;
    let mut objects = Vec::new();
    let mut values = BTreeMap::new();
    for o in doc.objects {
        for (attr, v) in o.attrs {
            let ty = dm.attribute(&o.class, &attr).map(|a| a.ty.clone());
            let value = match (&ty, v) {
                (_, Json::Null) => Value::Null,
                (Some(AttrType::Class(_)), Json::Number(n)) => Value::Obj(
                    n.as_i64()
                        .ok_or_else(|| ModelError::Parse(format!("bad object reference {n}")))?,
                ),
                (_, Json::Number(n)) => Value::Int(
                    n.as_i64()
                        .ok_or_else(|| ModelError::Parse(format!("bad integer {n}")))?,
                ),
                (_, Json::String(s)) => Value::Str(s),
                (_, other) => {
                    return Err(ModelError::Parse(format!(
                        "unsupported attribute value {other} for `{attr}`"
                    )))
                }
            };
            values.insert((o.id, attr), value);
        }
        objects.push(Object {
            id: o.id,
            class: o.class,
        });
    }
    let mut links = BTreeSet::new();
    for l in doc.links {
        let link = Link {
            assoc: l.assoc,
            left: l.left,
            right: l.right,
        };
        if links.contains(&link) {
            return Err(ModelError::DuplicateLink {
                assoc: link.assoc,
                left: link.left,
                right: link.right,
            });
        }
        links.insert(link);
    }
    ObjectModel::new(dm, objects, values, links)
}

/// Prints an object model in the document format accepted by
/// [`load_object_model`]. Every attribute of the owner class is listed,
/// null ones included.
pub fn print_object_model(om: &ObjectModel, dm: &DataModel) -> String {
    let doc = ObjectModelDoc {
        objects: om
            .objects()
            .iter()
            .map(|o| ObjectDoc {
                id: o.id,
                class: o.class.clone(),
                attrs: dm
                    .attributes_of(&o.class)
                    .map(|a| {
                        let v = match om.value(o.id, &a.name) {
                            Value::Int(i) | Value::Obj(i) => Json::from(i),
                            Value::Str(s) => Json::from(s),
                            Value::Bool(b) => Json::from(b),
                            Value::Null => Json::Null,
                        };
                        (a.name.clone(), v)
                    })
                    .collect(),
            })
            .collect(),
        links: om
            .links()
            .iter()
            .map(|l| LinkDoc {
                assoc: l.assoc.clone(),
                left: l.left,
                right: l.right,
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("object model serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const UNIVERSITY: &str = r#"{
      "classes": {
        "Student": [{"name": "name", "type": "String"}, {"name": "age", "type": "Integer"}],
        "Lecturer": [{"name": "name", "type": "String"}, {"name": "age", "type": "Integer"}]
      },
      "associations": [
        {"name": "Enrolment", "leftEnd": "students", "leftClass": "Student",
         "rightEnd": "lecturers", "rightClass": "Lecturer"}
      ]
    }"#;

    #[test]
    fn loads_university() {
        let dm = load_data_model(UNIVERSITY).unwrap();
        assert_eq!(dm.classes().len(), 2);
        assert_eq!(dm.attributes().len(), 4);
        assert_eq!(dm.associations().len(), 1);
        assert_eq!(dm, crate::datamodel::tests::university());
    }

    #[test]
    fn empty_document_is_empty_model() {
        let dm = load_data_model("{}").unwrap();
        assert!(dm.classes().is_empty());
        let om = load_object_model("{}", &dm).unwrap();
        assert!(om.objects().is_empty());
    }

    #[test]
    fn missing_class_is_reported() {
        let err =
            load_data_model(r#"{"classes": {"A": [{"name": "b", "type": "B"}]}}"#).unwrap_err();
        assert!(err.to_string().contains("`B`"), "{err}");
    }

    #[test]
    fn object_model_loading() {
        let dm = load_data_model(UNIVERSITY).unwrap();
        let om = load_object_model(
            r#"{"objects": [{"id": 1, "class": "Student", "attrs": {"age": 20, "name": "a"}}]}"#,
            &dm,
        )
        .unwrap();
        assert_eq!(om.objects().len(), 1);
        assert_eq!(om.value(1, "age"), Value::Int(20));

        let bad = load_object_model(
            r#"{"objects": [{"id": 1, "class": "Student"}, {"id": 2, "class": "Student"}],
                "links": [{"assoc": "Enrolment", "left": 1, "right": 2}]}"#,
            &dm,
        );
        assert!(matches!(bad, Err(ModelError::BadLink { .. })));

        let dup = load_object_model(
            r#"{"objects": [{"id": 1, "class": "Student"}, {"id": 1, "class": "Lecturer"}]}"#,
            &dm,
        );
        assert_eq!(dup, Err(ModelError::DuplicateObject(1)));

        let dangling = load_object_model(
            r#"{"objects": [{"id": 1, "class": "Student"}],
                "links": [{"assoc": "Enrolment", "left": 1, "right": 9}]}"#,
            &dm,
        );
        assert_eq!(dangling, Err(ModelError::UnknownObject(9)));

        let ill = load_object_model(
            r#"{"objects": [{"id": 1, "class": "Student", "attrs": {"age": "x"}}]}"#,
            &dm,
        );
        assert!(matches!(ill, Err(ModelError::IllTyped { .. })));
    }
}
