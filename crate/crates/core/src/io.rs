//! Plain-text table helpers shared by every file format.
//!
//! Tables are comma-separated with one header row. Any number of leading
//! `# key=value` lines carry metadata (version, seed, parameters); readers
//! return them alongside the rows.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::{Error, Result};

/// Ordered metadata written as `# key=value` lines.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Metadata(pub BTreeMap<String, String>);

impl Metadata {
    pub fn new() -> Self {
        let mut m = Metadata::default();
        m.set("version", crate::VERSION);
        m
    }

    pub fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.0.insert(key.to_string(), value.to_string());
        self
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.set(key, value);
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn get_f64(&self, key: &str) -> Option<f64> {
        self.get(key).and_then(|v| v.parse().ok())
    }
}

/// Parsed table: metadata, column names and rows of raw fields with their
/// 1-based line numbers.
#[derive(Clone, Debug)]
pub struct Table {
    pub meta: Metadata,
    pub columns: Vec<String>,
    pub rows: Vec<(usize, Vec<String>)>,
    pub source: String,
}

impl Table {
    pub fn column(&self, name: &str) -> Result<usize> {
        self.columns.iter().position(|c| c == name).ok_or_else(|| Error::Parse {
            file: self.source.clone(),
            line: 1,
            message: format!("missing column '{name}'"),
        })
    }

    pub fn f64_at(&self, row: usize, col: usize) -> Result<f64> {
        let (line, fields) = &self.rows[row];
        let raw = fields.get(col).ok_or_else(|| Error::Parse {
            file: self.source.clone(),
            line: *line,
            message: format!("expected at least {} fields", col + 1),
        })?;
        raw.trim().parse::<f64>().map_err(|_| Error::Parse {
            file: self.source.clone(),
            line: *line,
            message: format!("'{raw}' is not a number"),
        })
    }

    pub fn str_at(&self, row: usize, col: usize) -> Result<&str> {
        let (line, fields) = &self.rows[row];
        fields.get(col).map(|s| s.trim()).ok_or_else(|| Error::Parse {
            file: self.source.clone(),
            line: *line,
            message: format!("expected at least {} fields", col + 1),
        })
    }

    pub fn parse_err(&self, row: usize, message: impl Into<String>) -> Error {
        Error::Parse { file: self.source.clone(), line: self.rows[row].0, message: message.into() }
    }
}

pub fn render_table(meta: &Metadata, columns: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    for (k, v) in &meta.0 {
        let _ = writeln!(out, "# {k}={v}");
    }
    let _ = writeln!(out, "{}", columns.join(","));
    for r in rows {
        let _ = writeln!(out, "{}", r.join(","));
    }
    out
}

pub fn parse_table(text: &str, source: &str) -> Result<Table> {
    let mut meta = Metadata::default();
    let mut columns: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let lineno = k + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            if let Some((key, value)) = rest.trim().split_once('=') {
                meta.set(key.trim(), value.trim());
            }
            continue;
        }
        let fields: Vec<String> = trimmed.split(',').map(|s| s.trim().to_string()).collect();
        match &columns {
            None => columns = Some(fields),
            Some(cols) => {
                if fields.len() != cols.len() {
                    return Err(Error::Parse {
                        file: source.to_string(),
                        line: lineno,
                        message: format!("expected {} fields, found {}", cols.len(), fields.len()),
                    });
                }
                rows.push((lineno, fields));
            }
        }
    }
    let columns = columns.ok_or_else(|| Error::Parse {
        file: source.to_string(),
        line: 1,
        message: "missing header row".into(),
    })?;
    Ok(Table { meta, columns, rows, source: source.to_string() })
}

pub fn read_table(path: &Path) -> Result<Table> {
    let text = read_text(path)?;
    parse_table(&text, &path.display().to_string())
}

/// Flat `key = value` text, one pair per line, `#` comments allowed.
pub fn parse_key_values(text: &str, source: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            file: source.to_string(),
            line: k + 1,
            message: format!("expected key=value, found '{line}'"),
        })?;
        out.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(out)
}

/// `fs::read_to_string` with the path in the error.
pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::File { path: path.display().to_string(), source })
}

/// `fs::write` with the path in the error.
pub fn write_text(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::File { path: path.display().to_string(), source })
}

/// Shortest round-trip representation of a float; exponent form outside
/// `[1e-5, 1e16)` so tiny tails stay readable.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-5..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}
