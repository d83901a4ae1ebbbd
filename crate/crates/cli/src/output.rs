use std::fmt::Write as _;

use clap::ValueEnum;
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// Renders a report. Nested objects flatten to dotted keys for csv and
/// text; arrays stay as inline JSON.
pub fn render(value: &Value, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::from("key,value\n");
            for (k, v) in flatten(value) {
                writeln!(s, "{},{}", csv_field(&k), csv_field(&v)).unwrap();
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            for (k, v) in flatten(value) {
                writeln!(s, "{k}: {v}").unwrap();
            }
            s
        }
    }
}

fn flatten(value: &Value) -> Vec<(String, String)> {
    let mut out = Vec::new();
    walk("", value, &mut out);
    out
}

fn walk(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                walk(&key, v, out);
            }
        }
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use serde_json::json;

    use super::*;

    #[test]
    fn flattening() {
        let v = json!({"a": 1, "b": {"c": "x,y", "d": [1, 2]}});
        assert_eq!(render(&v, Format::Text), "a: 1\nb.c: x,y\nb.d: [1,2]\n");
        assert_eq!(
            render(&v, Format::Csv),
            "key,value\na,1\nb.c,\"x,y\"\nb.d,\"[1,2]\"\n"
        );
    }
}
