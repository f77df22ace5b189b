//! Table and document output. CSV starts with one comment line naming the
//! table schema and its version; JSON documents carry `schema_version`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::args::Format;
use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

/// Fixed rounding so that reruns print the same bytes and tiny residues
/// print as zero.
pub fn round(x: f64) -> f64 {
    let r = (x * 1e12).round() / 1e12;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

pub fn fmt_f64(x: f64) -> String {
    format!("{:?}", round(x))
}

#[derive(Clone, Debug)]
pub enum Cell {
    Int(u64),
    Num(f64),
    Text(String),
    Bool(Option<bool>),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => fmt_f64(*x),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.map_or(String::new(), |b| b.to_string()),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(i) => json!(i),
            Cell::Num(x) => json!(round(*x)),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
        }
    }
}

pub struct Table {
    pub kind: &'static str,
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<Cell>>,
    /// Extra top-level fields of the JSON form.
    pub extra: Map<String, Value>,
}

impl Table {
    pub fn new(kind: &'static str, columns: &'static [&'static str]) -> Self {
        Table { kind, columns, rows: Vec::new(), extra: Map::new() }
    }

    pub fn render(&self, format: Format) -> CliResult<String> {
        match format {
            Format::Csv => self.csv(),
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| {
                        let obj: Map<String, Value> =
                            self.columns.iter().zip(r).map(|(c, v)| (c.to_string(), v.json())).collect();
                        Value::Object(obj)
                    })
                    .collect();
                let mut doc = self.extra.clone();
                doc.insert("rows".into(), Value::Array(rows));
                Ok(document(self.kind, doc))
            }
        }
    }

    fn csv(&self) -> CliResult<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.columns).map_err(internal)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::csv)).map_err(internal)?;
        }
        let body = String::from_utf8(w.into_inner().map_err(internal)?).map_err(internal)?;
        Ok(format!("# gropt {} schema v{SCHEMA_VERSION}\n{body}", self.kind))
    }
}

fn internal(e: impl std::fmt::Display) -> CliError {
    CliError::Internal(e.to_string())
}

/// Pretty JSON document with `schema_version` and `kind` added.
pub fn document(kind: &str, mut fields: Map<String, Value>) -> String {
    fields.insert("schema_version".into(), json!(SCHEMA_VERSION));
    fields.insert("kind".into(), json!(kind));
    let mut s = serde_json::to_string_pretty(&Value::Object(fields)).expect("JSON values serialize");
    s.push('\n');
    s
}

/// `path` made absolute against `$GROPT_OUT_DIR` when it is relative.
pub fn resolve_out(path: &Path) -> PathBuf {
    match std::env::var_os("GROPT_OUT_DIR") {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

/// Writes `text` to `path`, or stdout when `path` is `None`.
pub fn emit(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => {
            let p = resolve_out(p);
            fs::write(&p, text).map_err(|e| CliError::Internal(format!("cannot write {}: {e}", p.display())))
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(internal)
        }
    }
}
