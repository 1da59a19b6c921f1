//! Canonical artifact serialization.
//!
//! JSON objects keep insertion order and every float is written with 17
//! significant digits (`{:.16e}`), enough to round-trip a 64-bit value
//! exactly: parsing an emitted document and emitting it again reproduces
//! the bytes. CSV carries the report rows under a fixed header with the
//! same numeric formatting.

use relik::eval::{EvalReport, MetricValue};
use serde_json::Value;

/// 17 significant digits, scientific notation; round-trips f64 exactly.
pub fn fmt_f64(x: f64) -> String {
    debug_assert!(x.is_finite(), "artifacts only carry finite numbers");
    format!("{x:.16e}")
}

/// Serialize a JSON value canonically (order-preserving maps, floats via
/// [`fmt_f64`], integers verbatim).
pub fn to_json_string(v: &Value) -> String {
    let mut out = String::new();
    write_value(v, 0, &mut out);
    out.push('\n');
    out
}

fn indent(depth: usize, out: &mut String) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn write_value(v: &Value, depth: usize, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else {
                out.push_str(&fmt_f64(n.as_f64().expect("numeric json value")));
            }
        }
        Value::String(s) => {
            out.push_str(&serde_json::to_string(s).expect("string serialization"))
        }
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push('\n');
                indent(depth + 1, out);
                write_value(item, depth + 1, out);
            }
            out.push('\n');
            indent(depth, out);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push('{');
            for (i, (k, item)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push('\n');
                indent(depth + 1, out);
                out.push_str(&serde_json::to_string(k).expect("key serialization"));
                out.push_str(": ");
                write_value(item, depth + 1, out);
            }
            out.push('\n');
            indent(depth, out);
            out.push('}');
        }
    }
}

fn metric_to_value(m: &MetricValue) -> Value {
    match m {
        MetricValue::Int(i) => Value::from(*i),
        MetricValue::Float(f) => Value::from(*f),
        MetricValue::Text(s) => Value::from(s.as_str()),
    }
}

/// Report as a JSON value: manifest, config echo, summary, columns, rows,
/// and an optional command-specific detail object.
pub fn report_to_json(manifest: Value, report: &EvalReport, detail: Option<Value>) -> Value {
    let mut root = serde_json::Map::new();
    root.insert("manifest".into(), manifest);
    root.insert("experiment".into(), Value::from(report.experiment.as_str()));
    let mut config = serde_json::Map::new();
    for (k, v) in &report.config {
        config.insert(k.clone(), Value::from(v.as_str()));
    }
    root.insert("config".into(), Value::Object(config));
    let mut summary = serde_json::Map::new();
    for (k, v) in &report.summary {
        summary.insert(k.clone(), metric_to_value(v));
    }
    root.insert("summary".into(), Value::Object(summary));
    root.insert(
        "columns".into(),
        Value::Array(report.columns.iter().map(|c| Value::from(c.as_str())).collect()),
    );
    root.insert(
        "rows".into(),
        Value::Array(
            report
                .rows
                .iter()
                .map(|row| Value::Array(row.iter().map(metric_to_value).collect()))
                .collect(),
        ),
    );
    if let Some(d) = detail {
        root.insert("detail".into(), d);
    }
    Value::Object(root)
}

fn csv_cell(m: &MetricValue) -> String {
    match m {
        MetricValue::Int(i) => i.to_string(),
        MetricValue::Float(f) => fmt_f64(*f),
        MetricValue::Text(s) => {
            if s.contains([',', '"', '\n']) {
                format!("\"{}\"", s.replace('"', "\"\""))
            } else {
                s.clone()
            }
        }
    }
}

/// Rows under the fixed header; an empty report is header-only.
pub fn to_csv_string(report: &EvalReport) -> String {
    let mut out = report.columns.join(",");
    out.push('\n');
    for row in &report.rows {
        let cells: Vec<String> = row.iter().map(csv_cell).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
