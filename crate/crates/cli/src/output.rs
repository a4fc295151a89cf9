//! Rendering of a result value as JSON, CSV or plain text.

use std::io::Write;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// How a result is laid out as a table.
#[derive(Debug, Clone, Copy)]
pub enum Shape {
    /// One row of the top-level scalar fields.
    Record,
    /// The array at `path` (empty path: the result itself), one row per element.
    /// Scalar elements become `(index_column, value_column)` pairs.
    Rows { path: &'static [&'static str], index_column: &'static str, value_column: &'static str },
}

impl Shape {
    pub const fn rows(path: &'static [&'static str]) -> Self {
        Shape::Rows { path, index_column: "index", value_column: "value" }
    }
}

pub struct Envelope {
    pub subcommand: &'static str,
    pub params: Value,
    pub result: Value,
    pub shape: Shape,
}

impl Envelope {
    pub fn render(&self, format: Format, out: &mut dyn Write) -> std::io::Result<()> {
        match format {
            Format::Json => {
                let doc = serde_json::json!({
                    "meta": {
                        "version": env!("CARGO_PKG_VERSION"),
                        "subcommand": self.subcommand,
                        "params": self.params,
                    },
                    "result": self.result,
                });
                serde_json::to_writer_pretty(&mut *out, &doc)?;
                writeln!(out)
            }
            Format::Csv => {
                let (header, rows) = self.table();
                let mut w = csv::Writer::from_writer(out);
                w.write_record(&header)?;
                for row in rows {
                    w.write_record(&row)?;
                }
                w.flush()
            }
            Format::Text => match self.shape {
                Shape::Record => {
                    let mut fields = Vec::new();
                    flatten("", &self.result, &mut fields);
                    for (k, v) in fields {
                        writeln!(out, "{k}: {v}")?;
                    }
                    Ok(())
                }
                Shape::Rows { .. } => {
                    let (header, rows) = self.table();
                    let widths: Vec<usize> = (0..header.len())
                        .map(|i| rows.iter().map(|r| r[i].len()).chain([header[i].len()]).max().unwrap_or(0))
                        .collect();
                    for row in std::iter::once(&header).chain(&rows) {
                        let cells: Vec<String> =
                            row.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
                        writeln!(out, "{}", cells.join("  ").trim_end())?;
                    }
                    Ok(())
                }
            },
        }
    }

    fn table(&self) -> (Vec<String>, Vec<Vec<String>>) {
        match self.shape {
            Shape::Record => {
                let mut fields = Vec::new();
                flatten("", &self.result, &mut fields);
                let (header, row) = fields.into_iter().unzip();
                (header, vec![row])
            }
            Shape::Rows { path, index_column, value_column } => {
                let items = path
                    .iter()
                    .try_fold(&self.result, |v, key| v.get(key))
                    .and_then(Value::as_array)
                    .cloned()
                    .unwrap_or_default();
                if items.iter().all(Value::is_object) && !items.is_empty() {
                    let header: Vec<String> = items[0].as_object().map(|o| o.keys().cloned().collect()).unwrap_or_default();
                    let rows = items
                        .iter()
                        .map(|item| header.iter().map(|k| cell(item.get(k).unwrap_or(&Value::Null))).collect())
                        .collect();
                    (header, rows)
                } else {
                    let header = vec![index_column.to_string(), value_column.to_string()];
                    let rows = items.iter().enumerate().map(|(i, v)| vec![i.to_string(), cell(v)]).collect();
                    (header, rows)
                }
            }
        }
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => n.to_string(),
        other => other.to_string(),
    }
}

/// Nested objects become dotted keys; arrays stay as JSON text.
fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => flatten_map(prefix, map, out),
        other => out.push((if prefix.is_empty() { "value".into() } else { prefix.into() }, cell(other))),
    }
}

fn flatten_map(prefix: &str, map: &Map<String, Value>, out: &mut Vec<(String, String)>) {
    for (k, v) in map {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            Value::Object(inner) => flatten_map(&key, inner, out),
            other => out.push((key, cell(other))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn render(env: &Envelope, format: Format) -> String {
        let mut buf = Vec::new();
        env.render(format, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn csv_record_quotes_per_rfc4180() {
        let env = Envelope {
            subcommand: "t",
            params: json!({}),
            result: json!({"a": 1, "b": "x,y", "c": {"d": "say \"hi\""}}),
            shape: Shape::Record,
        };
        assert_eq!(render(&env, Format::Csv), "a,b,c.d\n1,\"x,y\",\"say \"\"hi\"\"\"\n");
    }

    #[test]
    fn csv_rows_of_scalars_and_objects() {
        let env = Envelope {
            subcommand: "t",
            params: json!({}),
            result: json!({"counts": [3, 0, 5]}),
            shape: Shape::Rows { path: &["counts"], index_column: "k", value_column: "count" },
        };
        assert_eq!(render(&env, Format::Csv), "k,count\n0,3\n1,0\n2,5\n");
        let env = Envelope {
            subcommand: "t",
            params: json!({}),
            result: json!([{"x": 1, "y": 2}, {"x": 3, "y": null}]),
            shape: Shape::rows(&[]),
        };
        assert_eq!(render(&env, Format::Csv), "x,y\n1,2\n3,\n");
    }

    #[test]
    fn json_envelope_and_text() {
        let env = Envelope { subcommand: "t", params: json!({"r": 3}), result: json!({"n": "20"}), shape: Shape::Record };
        let doc: Value = serde_json::from_str(&render(&env, Format::Json)).unwrap();
        assert_eq!(doc["meta"]["subcommand"], "t");
        assert_eq!(doc["meta"]["params"]["r"], 3);
        assert_eq!(doc["result"]["n"], "20");
        assert_eq!(render(&env, Format::Text), "n: 20\n");
    }
}
