//! Rendering of reports.
//!
//! Floats are rounded to 12 significant digits so that reports are stable
//! across platforms and summation orders that differ only in the last bits.

use serde_json::{Map, Number, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Tsv,
}

const SIG_DIGITS: usize = 12;

pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if !x.is_finite() {
        return x;
    }
    format!("{:.*e}", SIG_DIGITS - 1, x).parse().unwrap_or(x)
}

/// Rounds every float. Non-finite floats are already `null` by the time they
/// reach a `Value`, since JSON has no literal for them.
pub fn normalize(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            Number::from_f64(round_sig(x))
                .map(Value::Number)
                .unwrap_or(Value::Null)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(normalize).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, normalize(v))).collect()),
        other => other,
    }
}

pub fn render(v: &Value, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(v).expect("serializable value");
            s.push('\n');
            s
        }
        OutputFormat::Tsv => {
            let mut rows = Vec::new();
            flatten("", v, &mut rows);
            rows.into_iter()
                .map(|(k, v)| format!("{k}\t{v}\n"))
                .collect()
        }
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some(String::new()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

/// Nested keys become dotted paths; arrays of scalars are comma-joined.
fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(o) => o.iter().for_each(|(k, v)| flatten(&key(k), v, out)),
        Value::Array(a) => {
            let scalars: Option<Vec<String>> = a.iter().map(scalar).collect();
            match scalars {
                Some(s) => out.push((prefix.to_string(), s.join(","))),
                None => a
                    .iter()
                    .enumerate()
                    .for_each(|(i, v)| flatten(&key(&i.to_string()), v, out)),
            }
        }
        other => out.push((prefix.to_string(), scalar(other).unwrap_or_default())),
    }
}

/// Joins a report with the config echo under `config`.
pub fn with_config(report: Value, config: Value) -> Value {
    let mut obj = match report {
        Value::Object(o) => o,
        other => {
            let mut o = Map::new();
            o.insert("result".into(), other);
            o
        }
    };
    obj.insert("config".into(), config);
    Value::Object(obj)
}
