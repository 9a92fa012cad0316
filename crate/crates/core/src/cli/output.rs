use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use crate::scenarios::Curves;

/// 17 significant digits: enough to round-trip any `f64`.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

/// Header `t,<columns...>` then one row per sample.
pub fn table_csv(table: &Curves<f64>) -> String {
    let mut out = String::from("t");
    for (name, _) in &table.columns {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (i, &t) in table.times.iter().enumerate() {
        out.push_str(&format_number(t));
        for (_, col) in &table.columns {
            out.push(',');
            out.push_str(&format_number(col[i]));
        }
        out.push('\n');
    }
    out
}

/// Rows with named columns, for sweep output.
pub fn rows_csv(header: &[String], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&x| format_number(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn json_number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".into()
    }
}

fn write_value(v: &Value, out: &mut String, indent: usize) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                write!(out, "{i}").expect("write to String");
            } else if let Some(u) = n.as_u64() {
                write!(out, "{u}").expect("write to String");
            } else {
                out.push_str(&json_number(n.as_f64().unwrap_or(f64::NAN)));
            }
        }
        Value::Array(items) if items.iter().all(|x| !x.is_array() && !x.is_object()) => {
            out.push('[');
            for (i, x) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_value(x, out, indent);
            }
            out.push(']');
        }
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_value(x, out, indent + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (i, (k, x)) in map.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(x, out, indent + 1);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
        other => out.push_str(&other.to_string()),
    }
}

/// Pretty JSON with every float written to 17 significant digits and
/// non-finite floats as `null`.
pub fn to_json<S: Serialize>(value: &S) -> String {
    let v = serde_json::to_value(value).expect("output types serialize");
    let mut out = String::new();
    write_value(&v, &mut out, 0);
    out.push('\n');
    out
}

/// Column-oriented JSON form of a table: `[{"name": ..., "values": [...]}, ...]`.
pub fn table_json(table: &Curves<f64>) -> Value {
    let mut cols = vec![serde_json::json!({ "name": "t", "values": table.times })];
    for (name, values) in &table.columns {
        cols.push(serde_json::json!({ "name": name, "values": values }));
    }
    Value::Array(cols)
}
