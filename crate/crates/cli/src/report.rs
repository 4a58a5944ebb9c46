//! Byte-stable rendering of results as text, CSV or JSON lines.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use zeropoint::io::{format_f64, write_text};
use zeropoint::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Float(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Int(v as i64)
    }
}

impl From<u32> for Value {
    fn from(v: u32) -> Self {
        Value::Int(v.into())
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.into())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

impl Value {
    fn plain(&self) -> String {
        match self {
            Value::Float(x) => format_f64(*x),
            Value::Int(i) => i.to_string(),
            Value::Bool(b) => b.to_string(),
            Value::Text(s) => s.clone(),
        }
    }

    fn csv(&self) -> String {
        match self {
            Value::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            other => other.plain(),
        }
    }

    fn json(&self) -> String {
        match self {
            Value::Float(x) if x.is_finite() => format_f64(*x),
            Value::Float(x) => serde_json::to_string(&x.to_string()).expect("string"),
            Value::Text(s) => serde_json::to_string(s).expect("string"),
            other => other.plain(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Value::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// A command's result: summary fields, free-text lines and named tables.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub command: &'static str,
    pub fields: BTreeMap<String, Value>,
    pub lines: Vec<String>,
    pub tables: BTreeMap<&'static str, Table>,
    /// Extra files written next to the report regardless of format.
    pub attachments: Vec<(String, String)>,
}

impl Report {
    pub fn new(command: &'static str) -> Self {
        Self {
            command,
            ..Self::default()
        }
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl Into<Value>) {
        self.fields.insert(key.into(), value.into());
    }

    pub fn line(&mut self, text: impl Into<String>) {
        self.lines.push(text.into());
    }

    pub fn table(&mut self, name: &'static str, table: Table) {
        self.tables.insert(name, table);
    }

    pub fn text(&self) -> String {
        let mut out = format!("# {}\n", self.command);
        for (k, v) in &self.fields {
            let _ = writeln!(out, "{k} = {}", v.plain());
        }
        for l in &self.lines {
            let _ = writeln!(out, "{l}");
        }
        for (name, t) in &self.tables {
            let _ = write!(out, "\n## {name}\n{}", t.csv());
        }
        out
    }

    fn jsonl(&self) -> String {
        let mut out = String::new();
        let mut summary = format!("{{\"record\":\"summary\",\"command\":{}", Value::from(self.command).json());
        for (k, v) in &self.fields {
            let _ = write!(summary, ",{}:{}", serde_json::to_string(k).expect("key"), v.json());
        }
        if !self.lines.is_empty() {
            let lines = serde_json::to_string(&self.lines).expect("lines");
            let _ = write!(summary, ",\"notes\":{lines}");
        }
        summary.push('}');
        out.push_str(&summary);
        out.push('\n');
        for (name, t) in &self.tables {
            for row in &t.rows {
                let mut rec = format!("{{\"record\":{}", Value::from(*name).json());
                let mut cells: Vec<(&str, &Value)> = t.header.iter().copied().zip(row).collect();
                cells.sort_by_key(|(h, _)| *h);
                for (h, v) in cells {
                    let _ = write!(rec, ",{}:{}", serde_json::to_string(h).expect("key"), v.json());
                }
                rec.push('}');
                out.push_str(&rec);
                out.push('\n');
            }
        }
        out
    }

    /// The files this report produces, in write order.
    pub fn artifacts(&self, format: Format) -> Vec<(String, String)> {
        let mut files = self.rendered(format);
        files.extend(self.attachments.iter().cloned());
        files
    }

    fn rendered(&self, format: Format) -> Vec<(String, String)> {
        match format {
            Format::Text => vec![("report.txt".into(), self.text())],
            Format::Jsonl => vec![("report.jsonl".into(), self.jsonl())],
            Format::Csv => {
                let mut summary = Table::new(&["key", "value"]);
                for (k, v) in &self.fields {
                    summary.push(vec![Value::from(k.as_str()), v.clone()]);
                }
                let mut files = vec![("summary.csv".to_string(), summary.csv())];
                for (name, t) in &self.tables {
                    files.push((format!("{name}.csv"), t.csv()));
                }
                files
            }
        }
    }
}

/// Writes all artifacts after creating the output directory.
pub fn write_all(dir: &Path, files: &[(String, String)]) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    for (name, contents) in files {
        write_text(&dir.join(name), contents)?;
    }
    Ok(())
}
