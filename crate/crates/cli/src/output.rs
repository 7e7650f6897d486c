use std::fmt::Write as _;

use clap::ValueEnum;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

/// Formats `x` with 12 significant digits, trailing zeros removed.
pub fn fmt_num(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    let out = if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim(&format!("{x:.decimals$}")).to_string()
    } else {
        format!("{}e{exp}", trim(mantissa))
    };
    if out == "-0" {
        "0".into()
    } else {
        out
    }
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// A JSON number rounded to 12 significant digits.
pub fn num(x: f64) -> Value {
    let rounded: f64 = fmt_num(x).parse().unwrap_or(x);
    serde_json::Number::from_f64(rounded)
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

pub fn opt_num(x: Option<f64>) -> Value {
    x.map(num).unwrap_or(Value::Null)
}

/// Ordered key/value output.
#[derive(Debug, Default)]
pub struct Report {
    fields: Vec<(String, Value)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl Into<Value>) -> &mut Self {
        self.fields.push((key.into(), value.into()));
        self
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Table => self.table(),
            Format::Csv => self.csv(),
            Format::Json => {
                let map: Map<String, Value> = self.fields.iter().cloned().collect();
                let mut s =
                    serde_json::to_string_pretty(&Value::Object(map)).expect("serializable");
                s.push('\n');
                s
            }
        }
    }

    fn table(&self) -> String {
        let width = self.fields.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (key, value) in &self.fields {
            match value {
                Value::Array(items) if items.iter().any(Value::is_object) => {
                    writeln!(out, "{key}:").unwrap();
                    for item in items {
                        writeln!(out, "  {}", inline(item)).unwrap();
                    }
                }
                _ => writeln!(out, "{key:<width$}  {}", scalar(value)).unwrap(),
            }
        }
        out
    }

    /// Header and a single row; nested values are omitted.
    fn csv(&self) -> String {
        let flat: Vec<_> = self
            .fields
            .iter()
            .filter(|(_, v)| !matches!(v, Value::Array(_) | Value::Object(_)))
            .collect();
        let header: Vec<&str> = flat.iter().map(|(k, _)| k.as_str()).collect();
        let row: Vec<String> = flat.iter().map(|(_, v)| csv_cell(v)).collect();
        format!("{}\n{}\n", header.join(","), row.join(","))
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => "undefined".into(),
        Value::Number(n) => n.as_f64().map(fmt_num).unwrap_or_else(|| n.to_string()),
        Value::String(s) => s.clone(),
        Value::Bool(b) => b.to_string(),
        Value::Array(items) => items.iter().map(scalar).collect::<Vec<_>>().join(" "),
        Value::Object(_) => inline(v),
    }
}

fn inline(v: &Value) -> String {
    match v {
        Value::Object(map) => map
            .iter()
            .filter(|(_, v)| !v.is_null())
            .map(|(k, v)| format!("{k}={}", scalar(v)))
            .collect::<Vec<_>>()
            .join("  "),
        other => scalar(other),
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) if s.contains([',', '"', '\n']) => {
            format!("\"{}\"", s.replace('"', "\"\""))
        }
        other => scalar(other),
    }
}
