use std::fmt;

use crate::rdf::Term;
use crate::vocab;

/// A scalar passed between steps.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Str(String),
    Int(i64),
    Float(f64),
    Bool(bool),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ValueError {
    #[error("invalid {kind} value {text:?}")]
    Invalid { kind: &'static str, text: String },
    #[error("unsupported JSON value {0}")]
    UnsupportedJson(String),
}

const TAGS: [&str; 4] = ["int:", "float:", "bool:", "str:"];

impl Value {
    /// Parses `int:3`, `float:2.5`, `bool:true`, `str:x`; anything else is a string.
    pub fn parse_tagged(text: &str) -> Result<Value, ValueError> {
        let invalid = |kind| ValueError::Invalid { kind, text: text.to_string() };
        if let Some(v) = text.strip_prefix("int:") {
            v.trim().parse().map(Value::Int).map_err(|_| invalid("int"))
        } else if let Some(v) = text.strip_prefix("float:") {
            v.trim().parse().map(Value::Float).map_err(|_| invalid("float"))
        } else if let Some(v) = text.strip_prefix("bool:") {
            v.trim().parse().map(Value::Bool).map_err(|_| invalid("bool"))
        } else if let Some(v) = text.strip_prefix("str:") {
            Ok(Value::Str(v.to_string()))
        } else {
            Ok(Value::Str(text.to_string()))
        }
    }

    /// Inverse of [`Value::parse_tagged`].
    pub fn to_tagged(&self) -> String {
        match self {
            Value::Str(s) if TAGS.iter().any(|t| s.starts_with(t)) => format!("str:{s}"),
            Value::Str(s) => s.clone(),
            Value::Int(i) => format!("int:{i}"),
            Value::Float(f) => format!("float:{f}"),
            Value::Bool(b) => format!("bool:{b}"),
        }
    }

    /// The lexical form, as it would appear in a literal.
    pub fn lexical(&self) -> String {
        match self {
            Value::Str(s) => s.clone(),
            Value::Int(i) => i.to_string(),
            Value::Float(f) => f.to_string(),
            Value::Bool(b) => b.to_string(),
        }
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Str(_) => "string",
            Value::Int(_) => "int",
            Value::Float(_) => "float",
            Value::Bool(_) => "bool",
        }
    }

    pub fn to_literal(&self) -> Term {
        match self {
            Value::Str(s) => Term::string(s),
            Value::Int(i) => Term::integer(*i),
            Value::Float(f) => Term::typed(f.to_string(), vocab::XSD_DOUBLE),
            Value::Bool(b) => Term::typed(b.to_string(), vocab::XSD_BOOLEAN),
        }
    }

    pub fn from_literal(term: &Term) -> Option<Value> {
        let lit = term.as_literal()?;
        match lit.datatype.as_deref() {
            None | Some(vocab::XSD_STRING) => Some(Value::Str(lit.value.clone())),
            Some(vocab::XSD_INTEGER) => lit.value.parse().ok().map(Value::Int),
            Some(vocab::XSD_DOUBLE) | Some(vocab::XSD_DECIMAL) => lit.value.parse().ok().map(Value::Float),
            Some(vocab::XSD_BOOLEAN) => lit.value.parse().ok().map(Value::Bool),
            Some(_) => None,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Value::Str(s) => serde_json::Value::String(s.clone()),
            Value::Int(i) => (*i).into(),
            Value::Float(f) => serde_json::Number::from_f64(*f).map_or(serde_json::Value::Null, serde_json::Value::Number),
            Value::Bool(b) => (*b).into(),
        }
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Value, ValueError> {
        match v {
            serde_json::Value::String(s) => Ok(Value::Str(s.clone())),
            serde_json::Value::Bool(b) => Ok(Value::Bool(*b)),
            serde_json::Value::Number(n) => match n.as_i64() {
                Some(i) => Ok(Value::Int(i)),
                None => n.as_f64().map(Value::Float).ok_or_else(|| ValueError::UnsupportedJson(v.to_string())),
            },
            other => Err(ValueError::UnsupportedJson(other.to_string())),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.lexical())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn tagged_forms() {
        assert_eq!(Value::parse_tagged("int:3").unwrap(), Value::Int(3));
        assert_eq!(Value::parse_tagged("float:2.5").unwrap(), Value::Float(2.5));
        assert_eq!(Value::parse_tagged("bool:false").unwrap(), Value::Bool(false));
        assert_eq!(Value::parse_tagged("blur").unwrap(), Value::Str("blur".into()));
        assert!(Value::parse_tagged("int:x").is_err());
        assert_eq!(Value::Str("int:3".into()).to_tagged(), "str:int:3");
    }

    proptest! {
        #[test]
        fn tagged_round_trip(v in prop_oneof![
            any::<i64>().prop_map(Value::Int),
            any::<bool>().prop_map(Value::Bool),
            (-1e12f64..1e12).prop_map(Value::Float),
            ".*".prop_map(Value::Str),
        ]) {
            prop_assert_eq!(Value::parse_tagged(&v.to_tagged()).unwrap(), v.clone());
            prop_assert_eq!(Value::from_literal(&v.to_literal()).unwrap(), v);
        }
    }
}
