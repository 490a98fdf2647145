//! CSV and JSON emission with a provenance header.
//!
//! CSV files start with `# key=value` comment lines; the JSON twin carries the
//! same header as an object and the rows as records keyed by column name.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{Map, Value};

pub const TOOL_VERSION: &str = concat!("fpstate ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Serialize)]
pub struct Header {
    pub tool: String,
    pub config_hash: String,
    pub seed: u64,
    pub command: String,
}

impl Header {
    pub fn new(config_hash: &str, seed: u64, command: &str) -> Self {
        Self {
            tool: TOOL_VERSION.to_string(),
            config_hash: config_hash.to_string(),
            seed,
            command: command.to_string(),
        }
    }

    fn comment_lines(&self) -> String {
        format!(
            "# tool={}\n# config_hash={}\n# seed={}\n# command={}\n",
            self.tool, self.config_hash, self.seed, self.command
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => fmt_num(*x),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(i) => Value::from(*i),
            Cell::Num(x) if x.is_finite() => Value::from(*x),
            Cell::Num(x) => Value::from(fmt_num(*x)),
            Cell::Text(s) => Value::from(s.clone()),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<i64> for Cell {
    fn from(i: i64) -> Self {
        Cell::Int(i)
    }
}

impl From<u32> for Cell {
    fn from(i: u32) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Text(if b { "pass" } else { "fail" }.to_string())
    }
}

/// Shortest round-trip representation; non-finite values spelled out.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:e}")
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self, header: &Header) -> String {
        let mut out = header.comment_lines();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self, header: &Header) -> Result<String> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.clone(), v.json()))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let mut doc = Map::new();
        doc.insert("header".into(), serde_json::to_value(header)?);
        doc.insert("columns".into(), serde_json::to_value(&self.columns)?);
        doc.insert("rows".into(), Value::Array(rows));
        Ok(serde_json::to_string_pretty(&Value::Object(doc))? + "\n")
    }
}

pub struct Emitter {
    dir: PathBuf,
    header: Header,
    written: Vec<PathBuf>,
}

impl Emitter {
    pub fn new(dir: &Path, header: Header) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            header,
            written: Vec::new(),
        })
    }

    /// Writes `<stem>.csv` and `<stem>.json`.
    pub fn table(&mut self, stem: &str, table: &Table) -> Result<()> {
        self.write(&format!("{stem}.csv"), &table.to_csv(&self.header))?;
        let json = table.to_json(&self.header)?;
        self.write(&format!("{stem}.json"), &json)
    }

    /// Writes a text artifact with the header prepended as `#` comments.
    pub fn text(&mut self, name: &str, body: &str) -> Result<()> {
        let content = format!("{}{}", self.header.comment_lines(), body);
        self.write(name, &content)
    }

    fn write(&mut self, name: &str, content: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, content).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(path);
        Ok(())
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}
