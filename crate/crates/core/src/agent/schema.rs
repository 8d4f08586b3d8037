//! Field-list schemas for worker payloads: enough structure to validate LLM
//! output and to describe the expected shape inside prompts.

use serde::{Deserialize, Serialize};
use serde_json::Value as Json;
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum FieldType {
    String,
    Number,
    Integer,
    Boolean,
    Any,
    Enum { values: Vec<String> },
    Array { items: Box<FieldType> },
    Object { fields: Vec<Field> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    pub name: String,
    #[serde(flatten)]
    pub ty: FieldType,
    #[serde(default)]
    pub description: String,
    /// Optional fields may be absent or null.
    #[serde(default = "yes")]
    pub required: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Schema {
    pub fields: Vec<Field>,
}

impl FieldType {
    fn label(&self) -> String {
        match self {
            FieldType::String => "string".into(),
            FieldType::Number => "number".into(),
            FieldType::Integer => "integer".into(),
            FieldType::Boolean => "boolean".into(),
            FieldType::Any => "any JSON value".into(),
            FieldType::Enum { values } => format!("one of {}", values.join(" | ")),
            FieldType::Array { items } => format!("array of {}", items.label()),
            FieldType::Object { .. } => "object".into(),
        }
    }

    fn check(&self, path: &str, v: &Json, out: &mut Vec<String>) {
        let mismatch = |out: &mut Vec<String>| {
            out.push(format!("{path}: expected {}, found {}", self.label(), kind(v)))
        };
        match self {
            FieldType::Any => {}
            FieldType::String => {
                if !v.is_string() {
                    mismatch(out)
                }
            }
            FieldType::Number => {
                if !v.is_number() {
                    mismatch(out)
                }
            }
            FieldType::Integer => {
                if !(v.is_i64() || v.is_u64()) {
                    mismatch(out)
                }
            }
            FieldType::Boolean => {
                if !v.is_boolean() {
                    mismatch(out)
                }
            }
            FieldType::Enum { values } => match v.as_str() {
                Some(s) if values.iter().any(|x| x == s) => {}
                _ => mismatch(out),
            },
            FieldType::Array { items } => match v.as_array() {
                Some(a) => {
                    for (i, e) in a.iter().enumerate() {
                        items.check(&format!("{path}[{i}]"), e, out);
                    }
                }
                None => mismatch(out),
            },
            FieldType::Object { fields } => check_fields(path, fields, v, out),
        }
    }
}

fn kind(v: &Json) -> &'static str {
    match v {
        Json::Null => "null",
        Json::Bool(_) => "boolean",
        Json::Number(_) => "number",
        Json::String(_) => "string",
        Json::Array(_) => "array",
        Json::Object(_) => "object",
    }
}

fn check_fields(path: &str, fields: &[Field], v: &Json, out: &mut Vec<String>) {
    let Some(obj) = v.as_object() else {
        out.push(format!(
            "{}: expected object, found {}",
            if path.is_empty() { "$" } else { path },
            kind(v)
        ));
        return;
    };
    for f in fields {
        let p = if path.is_empty() {
            f.name.clone()
        } else {
            format!("{path}.{}", f.name)
        };
        match obj.get(&f.name) {
            None | Some(Json::Null) if f.required => {
                out.push(format!("{p}: missing required field"))
            }
            None | Some(Json::Null) => {}
            Some(x) => f.ty.check(&p, x, out),
        }
    }
}

fn describe_fields(fields: &[Field], depth: usize, out: &mut String) {
    for f in fields {
        let pad = "  ".repeat(depth);
        let opt = if f.required { "" } else { ", optional" };
        let desc = if f.description.is_empty() {
            String::new()
        } else {
            format!(": {}", f.description)
        };
        writeln!(out, "{pad}- {} ({}{opt}){desc}", f.name, f.ty.label()).unwrap();
        let mut ty = &f.ty;
        while let FieldType::Array { items } = ty {
            ty = items;
        }
        if let FieldType::Object { fields } = ty {
            describe_fields(fields, depth + 1, out);
        }
    }
}

impl Schema {
    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    /// Every problem found, each prefixed with its JSON path.
    pub fn validate(&self, v: &Json) -> Result<(), Vec<String>> {
        let mut out = Vec::new();
        check_fields("", &self.fields, v, &mut out);
        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }

    /// Bullet-list description used in prompts.
    pub fn describe(&self) -> String {
        let mut out = String::new();
        describe_fields(&self.fields, 0, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn schema() -> Schema {
        serde_json::from_value(json!([
            {"name": "sql", "type": "string", "description": "the query"},
            {"name": "n", "type": "integer", "required": false},
            {"name": "kind", "type": "enum", "values": ["a", "b"]},
            {"name": "items", "type": "array", "items": {"type": "object", "fields": [
                {"name": "q", "type": "string"}
            ]}}
        ]))
        .unwrap()
    }

    #[test]
    fn valid_document() {
        let s = schema();
        let doc = json!({"sql": "SELECT 1", "kind": "a", "items": [{"q": "x"}]});
        assert_eq!(s.validate(&doc), Ok(()));
    }

    #[test]
    fn problems_carry_paths() {
        let s = schema();
        let doc = json!({"kind": "c", "n": 1.5, "items": [{"q": 3}]});
        let errs = s.validate(&doc).unwrap_err();
        assert_eq!(
            errs,
            vec![
                "sql: missing required field",
                "n: expected integer, found number",
                "kind: expected one of a | b, found string",
                "items[0].q: expected string, found number",
            ]
        );
        assert_eq!(
            s.validate(&json!([1])).unwrap_err(),
            vec!["$: expected object, found array"]
        );
    }

    #[test]
    fn description_lists_nested_fields() {
        let d = schema().describe();
        assert!(d.contains("- sql (string): the query"));
        assert!(d.contains("- n (integer, optional)"));
        assert!(d.contains("  - q (string)"));
    }

    #[test]
    fn serde_round_trip() {
        let s = schema();
        let back: Schema = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(s, back);
    }
}
