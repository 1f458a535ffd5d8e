//! Deterministic JSON rendering: object keys sorted, floats written with
//! 17 significant digits, two-space indentation.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A scalar as JSON: a number in `f64` mode, a decimal string otherwise.
pub fn scalar_value<T: Scalar>(x: &T) -> Value {
    if T::precision_tag() == "f64" {
        Value::from(x.to_f64())
    } else {
        Value::from(x.to_decimal_string())
    }
}

pub fn scalar_array<T: Scalar>(xs: &[T]) -> Value {
    Value::Array(xs.iter().map(scalar_value).collect())
}

pub fn scalar_matrix<T: Scalar>(m: &[Vec<T>]) -> Value {
    Value::Array(m.iter().map(|r| scalar_array(r)).collect())
}

pub fn to_value<S: Serialize>(x: &S) -> Result<Value> {
    Ok(serde_json::to_value(x)?)
}

/// Envelope `{"command", "precision", "report"}` around a result body.
pub fn envelope(command: &str, precision: &str, body: Value) -> Value {
    let mut m = Map::new();
    m.insert("command".into(), Value::from(command));
    m.insert("precision".into(), Value::from(precision));
    m.insert("report".into(), body);
    Value::Object(m)
}

fn write_number(out: &mut String, n: &serde_json::Number) {
    if let Some(i) = n.as_i64() {
        let _ = write!(out, "{}", i);
    } else if let Some(u) = n.as_u64() {
        let _ = write!(out, "{}", u);
    } else {
        let f = n.as_f64().unwrap_or(f64::NAN);
        if f.is_finite() {
            let _ = write!(out, "{:.16e}", f);
        } else {
            out.push_str("null");
        }
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |out: &mut String, n: usize| out.extend(std::iter::repeat_n(' ', n));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => write_number(out, n),
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(a) if a.is_empty() => out.push_str("[]"),
        Value::Array(a) => {
            let flat = a.iter().all(|e| !e.is_array() && !e.is_object());
            if flat {
                out.push('[');
                for (i, e) in a.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, e, indent);
                }
                out.push(']');
            } else {
                out.push_str("[\n");
                for (i, e) in a.iter().enumerate() {
                    pad(out, indent + 2);
                    write_value(out, e, indent + 2);
                    out.push_str(if i + 1 < a.len() { ",\n" } else { "\n" });
                }
                pad(out, indent);
                out.push(']');
            }
        }
        Value::Object(m) if m.is_empty() => out.push_str("{}"),
        Value::Object(m) => {
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                pad(out, indent + 2);
                out.push_str(&Value::String((*k).clone()).to_string());
                out.push_str(": ");
                write_value(out, &m[*k], indent + 2);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

/// Canonical text of a JSON value, newline terminated.
pub fn canonical_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

/// Writes the canonical rendering to `path`, or to stdout when `None`.
pub fn emit(v: &Value, path: Option<&Path>) -> Result<()> {
    let text = canonical_json(v);
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {}", p.display(), e))),
        None => {
            use std::io::Write;
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes())
                .and_then(|_| so.flush())
                .map_err(|e| Error::Io(e.to_string()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Ext;
    use serde_json::json;

    #[test]
    fn keys_sorted_and_floats_fixed() {
        let v = json!({"b": 0.1, "a": [1, 2.5], "c": {"z": true, "y": null}});
        let s = canonical_json(&v);
        assert_eq!(
            s,
            "{\n  \"a\": [1, 2.5000000000000000e0],\n  \"b\": 1.0000000000000001e-1,\n  \"c\": {\n    \"y\": null,\n    \"z\": true\n  }\n}\n"
        );
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["b"], json!(0.1));
    }

    #[test]
    fn round_trips_all_f64() {
        for x in [1e-300, 3.0f64.sqrt(), -2.0 / 3.0, 1e300, 5e-324] {
            let s = canonical_json(&json!([x]));
            let back: Vec<f64> = serde_json::from_str(&s).unwrap();
            assert_eq!(back[0], x);
        }
    }

    #[test]
    fn empty_and_extended() {
        assert_eq!(canonical_json(&json!({})), "{}\n");
        let v = scalar_value(&Ext::<128>::from_f64(0.5));
        assert!(v.is_string());
        assert!(scalar_value(&0.5f64).is_number());
    }
}
