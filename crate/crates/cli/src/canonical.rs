//! Canonical JSON: sorted keys, floats with 17 significant digits.

use serde_json::Value;
use sha2::{Digest, Sha256};

fn number(n: &serde_json::Number) -> String {
    if n.is_i64() || n.is_u64() {
        n.to_string()
    } else {
        let x = n.as_f64().unwrap_or(f64::NAN);
        if x == 0.0 {
            // fold -0 into 0
            "0.0000000000000000e0".to_string()
        } else {
            format!("{x:.16e}")
        }
    }
}

fn string(s: &str) -> String {
    serde_json::to_string(s).unwrap_or_default()
}

fn write(v: &Value, indent: Option<usize>, depth: usize, out: &mut String) {
    let (nl, pad, pad_in, sep) = match indent {
        Some(w) => ("\n", " ".repeat(w * depth), " ".repeat(w * (depth + 1)), ": "),
        None => ("", String::new(), String::new(), ":"),
    };
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => out.push_str(&number(n)),
        Value::String(s) => out.push_str(&string(s)),
        Value::Array(a) if a.is_empty() => out.push_str("[]"),
        Value::Array(a) => {
            out.push('[');
            for (i, x) in a.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(nl);
                out.push_str(&pad_in);
                write(x, indent, depth + 1, out);
            }
            out.push_str(nl);
            out.push_str(&pad);
            out.push(']');
        }
        Value::Object(m) if m.is_empty() => out.push_str("{}"),
        Value::Object(m) => {
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(nl);
                out.push_str(&pad_in);
                out.push_str(&string(k));
                out.push_str(sep);
                write(&m[k], indent, depth + 1, out);
            }
            out.push_str(nl);
            out.push_str(&pad);
            out.push('}');
        }
    }
}

/// Single-line canonical form, used for hashing.
pub fn to_compact(v: &Value) -> String {
    let mut out = String::new();
    write(v, None, 0, &mut out);
    out
}

/// Indented canonical form with a trailing newline, used for report files.
pub fn to_pretty(v: &Value) -> String {
    let mut out = String::new();
    write(v, Some(2), 0, &mut out);
    out.push('\n');
    out
}

/// Hex SHA-256 of the canonical form.
pub fn hash(v: &Value) -> String {
    let digest = Sha256::digest(to_compact(v).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn key_order_does_not_matter() {
        let a: Value = serde_json::from_str(r#"{"b": 1, "a": {"y": 2.5, "x": [1, 2]}}"#).unwrap();
        let b: Value = serde_json::from_str(r#"{"a": {"x": [1, 2], "y": 2.5}, "b": 1}"#).unwrap();
        assert_eq!(to_compact(&a), to_compact(&b));
        assert_eq!(hash(&a), hash(&b));
        assert_eq!(to_compact(&a), r#"{"a":{"x":[1,2],"y":2.5000000000000000e0},"b":1}"#);
    }

    #[test]
    fn floats_keep_seventeen_digits() {
        let v = json!(0.1);
        assert_eq!(to_compact(&v), "1.0000000000000001e-1");
        let back: f64 = to_compact(&v).parse().unwrap();
        assert_eq!(back, 0.1);
        assert_eq!(to_compact(&json!(-0.0)), to_compact(&json!(0.0)));
    }

    #[test]
    fn seed_changes_the_hash() {
        assert_ne!(hash(&json!({"seed": 1})), hash(&json!({"seed": 2})));
        assert_eq!(hash(&json!({"seed": 1})).len(), 64);
    }

    #[test]
    fn pretty_output_is_valid_json() {
        let v = json!({"rows": [{"a": 1.5, "b": null}], "empty": [], "o": {}});
        let back: Value = serde_json::from_str(&to_pretty(&v)).unwrap();
        assert_eq!(back, v);
    }
}
