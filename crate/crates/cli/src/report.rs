//! Canonical report encoding: JSON objects with sorted keys, rationals as
//! `"p/q"` strings, series and matrices as literals.

use arcstab_core::lp::Rational;
use arcstab_core::{ArcMatrix, LaurentSeries};
use serde_json::{json, Value};

pub fn rational(q: &Rational) -> Value {
    Value::String(format!("{}/{}", q.numer(), q.denom()))
}

pub fn rationals(qs: &[Rational]) -> Value {
    Value::Array(qs.iter().map(rational).collect())
}

pub fn series(s: &LaurentSeries) -> Value {
    Value::String(s.to_string())
}

pub fn matrix(a: &ArcMatrix) -> Value {
    Value::Array(a.rows().iter().map(|r| Value::Array(r.iter().map(series).collect())).collect())
}

pub fn integers(xs: &[i64]) -> Value {
    json!(xs)
}

/// Pretty JSON; `serde_json` maps keep keys sorted.
pub fn to_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

/// Indented `key: value` lines, keys in sorted order.
pub fn to_text(v: &Value) -> String {
    let mut out = String::new();
    write_text(v, 0, &mut out);
    out
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(xs) if xs.iter().all(|x| !x.is_object() && !x.is_array()) => {
            Some(format!("[{}]", xs.iter().filter_map(scalar).collect::<Vec<_>>().join(", ")))
        }
        Value::Array(xs)
            if xs.iter().all(|x| x.as_array().is_some_and(|r| r.iter().all(|y| !y.is_object() && !y.is_array()))) =>
        {
            Some(format!("[{}]", xs.iter().filter_map(scalar).collect::<Vec<_>>().join(", ")))
        }
        _ => None,
    }
}

fn write_text(v: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                match scalar(x) {
                    Some(s) => out.push_str(&format!("{pad}{k}: {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        write_text(x, indent + 1, out);
                    }
                }
            }
        }
        Value::Array(xs) => {
            for (i, x) in xs.iter().enumerate() {
                match scalar(x) {
                    Some(s) => out.push_str(&format!("{pad}- {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}- #{i}\n"));
                        write_text(x, indent + 1, out);
                    }
                }
            }
        }
        _ => out.push_str(&format!("{pad}{}\n", scalar(v).unwrap_or_default())),
    }
}
