//! Tabular output in CSV or JSON and the provenance record.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value as Json};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format!("{x:e}"),
            Cell::Int(n) => n.to_string(),
            Cell::Text(t) => t.replace([',', '\n'], ";"),
        }
    }

    fn json(&self) -> Json {
        match self {
            Cell::Num(x) if x.is_finite() => json!(x),
            Cell::Num(_) => Json::Null,
            Cell::Int(n) => json!(n),
            Cell::Text(t) => json!(t),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<i64> for Cell {
    fn from(n: i64) -> Self {
        Cell::Int(n)
    }
}

impl From<&str> for Cell {
    fn from(t: &str) -> Self {
        Cell::Text(t.to_string())
    }
}

/// Column-named rows plus `# key = value` metadata.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), ..Self::default() }
    }

    pub fn meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (k, v) in &self.meta {
            writeln!(out, "# {k} = {v}")?;
        }
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Json {
        let meta: serde_json::Map<String, Json> =
            self.meta.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
        let rows: Vec<Json> = self.rows.iter().map(|r| Json::Array(r.iter().map(Cell::json).collect())).collect();
        json!({ "meta": meta, "columns": self.columns, "rows": rows })
    }
}

/// Collects the files a command writes below the output directory.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    pub format: Format,
    pub written: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path, format: Format) -> io::Result<Self> {
        fs::create_dir_all(root)?;
        Ok(Self { root: root.to_path_buf(), format, written: Vec::new() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> io::Result<()> {
        fs::write(self.path(name), bytes)?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn write_json(&mut self, name: &str, value: &impl Serialize) -> io::Result<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    /// Writes `<stem>.csv` or `<stem>.json` depending on the format.
    pub fn write_table(&mut self, stem: &str, table: &Table) -> io::Result<()> {
        let name = format!("{stem}.{}", self.format.extension());
        match self.format {
            Format::Csv => {
                let mut buf = Vec::new();
                table.write_csv(&mut buf)?;
                self.write_bytes(&name, &buf)
            }
            Format::Json => self.write_json(&name, &table.to_json()),
        }
    }

    /// Writes either the CSV produced by `csv` or `value` as JSON.
    pub fn write_either(
        &mut self,
        stem: &str,
        csv: impl FnOnce(&mut Vec<u8>) -> io::Result<()>,
        value: &impl Serialize,
    ) -> io::Result<()> {
        let name = format!("{stem}.{}", self.format.extension());
        match self.format {
            Format::Csv => {
                let mut buf = Vec::new();
                csv(&mut buf)?;
                self.write_bytes(&name, &buf)
            }
            Format::Json => self.write_json(&name, value),
        }
    }
}

/// Record written next to every run's results.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub command: String,
    pub config_file: Option<String>,
    /// SHA-256 of the resolved configuration in canonical form.
    pub config_sha256: String,
    pub seed: u64,
    pub format: Format,
    pub tool: String,
    pub version: String,
    pub exit_code: i32,
    pub error: Option<String>,
    pub outputs: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_and_json_agree() {
        let mut t = Table::new(&["a", "b", "c"]).meta("k", 1);
        t.push(vec![1.5.into(), 2i64.into(), "x,y".into()]);
        t.push(vec![f64::NAN.into(), (-3i64).into(), "z".into()]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "# k = 1\na,b,c\n1.5e0,2,x;y\nNaN,-3,z\n");
        let j = t.to_json();
        assert_eq!(j["rows"][1][0], Json::Null);
        assert_eq!(j["columns"][2], "c");
    }
}
