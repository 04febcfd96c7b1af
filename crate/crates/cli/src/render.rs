//! Plain-text rendering of JSON reports.
//!
//! Scalars print as `key: value`. Arrays of flat objects print as aligned
//! tables, and nested objects are indented.

use serde_json::Value;

pub fn render(v: &Value) -> String {
    let mut out = String::new();
    object(&mut out, v, 0);
    out
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(a) if a.iter().all(|x| scalar(x).is_some() && !x.is_array()) => {
            Some(a.iter().map(|x| scalar(x).unwrap()).collect::<Vec<_>>().join(", "))
        }
        _ => None,
    }
}

fn object(out: &mut String, v: &Value, indent: usize) {
    let pad = " ".repeat(indent);
    let Value::Object(map) = v else {
        out.push_str(&format!("{pad}{}\n", scalar(v).unwrap_or_else(|| v.to_string())));
        return;
    };
    for (k, x) in map {
        if let Some(s) = scalar(x) {
            out.push_str(&format!("{pad}{k}: {s}\n"));
        } else if let Some(rows) = flat_rows(x) {
            out.push_str(&format!("{pad}{k}:\n"));
            table(out, &rows, indent + 2);
        } else if let Value::Array(items) = x {
            out.push_str(&format!("{pad}{k}:\n"));
            for item in items {
                object(out, item, indent + 2);
                out.push_str(&format!("{pad}  --\n"));
            }
        } else {
            out.push_str(&format!("{pad}{k}:\n"));
            object(out, x, indent + 2);
        }
    }
}

/// Rows of an array whose elements are objects with scalar fields only.
fn flat_rows(v: &Value) -> Option<Vec<&serde_json::Map<String, Value>>> {
    let Value::Array(items) = v else { return None };
    items
        .iter()
        .map(|x| match x {
            Value::Object(m) if m.values().all(|y| scalar(y).is_some()) => Some(m),
            _ => None,
        })
        .collect()
}

fn table(out: &mut String, rows: &[&serde_json::Map<String, Value>], indent: usize) {
    let pad = " ".repeat(indent);
    let Some(first) = rows.first() else {
        out.push_str(&format!("{pad}(none)\n"));
        return;
    };
    let cols: Vec<&String> = first.keys().collect();
    let cells: Vec<Vec<String>> =
        rows.iter().map(|r| cols.iter().map(|c| r.get(*c).and_then(scalar).unwrap_or_default()).collect()).collect();
    let widths: Vec<usize> = cols
        .iter()
        .enumerate()
        .map(|(i, c)| cells.iter().map(|r| r[i].len()).max().unwrap_or(0).max(c.len()))
        .collect();
    let line = |xs: Vec<&str>| -> String {
        let parts: Vec<String> = xs.iter().zip(&widths).map(|(x, w)| format!("{x:<w$}")).collect();
        format!("{pad}{}\n", parts.join("  ").trim_end())
    };
    out.push_str(&line(cols.iter().map(|c| c.as_str()).collect()));
    for r in &cells {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
    }
}
