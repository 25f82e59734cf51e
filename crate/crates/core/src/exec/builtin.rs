//! The toy operation set available to `builtin:<op>` steps.

use crate::model::Value;

pub const OPERATIONS: &[&str] = &["add", "mul", "neg", "concat", "upper", "lower", "repeat", "len", "identity"];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BuiltinError {
    #[error("unknown builtin operation {0:?}")]
    UnknownOp(String),
    #[error("{op} takes {expected} argument(s), got {got}")]
    Arity { op: String, expected: usize, got: usize },
    #[error("{op}: type mismatch ({found})")]
    TypeMismatch { op: String, found: String },
    #[error("{0}: integer overflow")]
    Overflow(String),
}

fn arity(op: &str) -> Option<usize> {
    match op {
        "add" | "mul" | "concat" | "repeat" => Some(2),
        "neg" | "upper" | "lower" | "len" | "identity" => Some(1),
        _ => None,
    }
}

fn numeric(op: &str, a: &Value, b: &Value, int: fn(i64, i64) -> Option<i64>, float: fn(f64, f64) -> f64) -> Result<Value, BuiltinError> {
    match (a, b) {
        (Value::Int(x), Value::Int(y)) => int(*x, *y).map(Value::Int).ok_or_else(|| BuiltinError::Overflow(op.into())),
        (Value::Int(x), Value::Float(y)) => Ok(Value::Float(float(*x as f64, *y))),
        (Value::Float(x), Value::Int(y)) => Ok(Value::Float(float(*x, *y as f64))),
        (Value::Float(x), Value::Float(y)) => Ok(Value::Float(float(*x, *y))),
        _ => Err(mismatch(op, &[a, b])),
    }
}

fn mismatch(op: &str, args: &[&Value]) -> BuiltinError {
    let found = args.iter().map(|v| v.type_name()).collect::<Vec<_>>().join(", ");
    BuiltinError::TypeMismatch { op: op.into(), found }
}

/// Evaluates one builtin operation over positional arguments.
pub fn builtin_eval(op: &str, args: &[Value]) -> Result<Value, BuiltinError> {
    let expected = arity(op).ok_or_else(|| BuiltinError::UnknownOp(op.into()))?;
    if args.len() != expected {
        return Err(BuiltinError::Arity { op: op.into(), expected, got: args.len() });
    }
    match (op, args) {
        ("add", [a, b]) => numeric(op, a, b, i64::checked_add, |x, y| x + y),
        ("mul", [a, b]) => numeric(op, a, b, i64::checked_mul, |x, y| x * y),
        ("neg", [Value::Int(x)]) => x.checked_neg().map(Value::Int).ok_or_else(|| BuiltinError::Overflow(op.into())),
        ("neg", [Value::Float(x)]) => Ok(Value::Float(-x)),
        ("concat", [Value::Str(a), Value::Str(b)]) => Ok(Value::Str(format!("{a}{b}"))),
        ("upper", [Value::Str(s)]) => Ok(Value::Str(s.to_uppercase())),
        ("lower", [Value::Str(s)]) => Ok(Value::Str(s.to_lowercase())),
        ("repeat", [Value::Str(s), Value::Int(n)]) if *n >= 0 => Ok(Value::Str(s.repeat(*n as usize))),
        ("len", [Value::Str(s)]) => Ok(Value::Int(s.chars().count() as i64)),
        ("identity", [v]) => Ok(v.clone()),
        _ => Err(mismatch(op, &args.iter().collect::<Vec<_>>())),
    }
}
