//! Result tables, CSV emission and run manifests.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::config::Params;
use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    /// Written without a fractional part.
    pub integer: bool,
}

pub fn real(name: impl Into<String>) -> Column {
    Column {
        name: name.into(),
        integer: false,
    }
}

pub fn int(name: impl Into<String>) -> Column {
    Column {
        name: name.into(),
        integer: true,
    }
}

/// Rectangular numeric table, written as one CSV file `<name>.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub name: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<f64>>,
}

impl ResultTable {
    pub fn new(name: impl Into<String>, columns: Vec<Column>) -> Self {
        Self {
            name: name.into(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<&str> = self.columns.iter().map(|c| c.name.as_str()).collect();
        out.push_str(&header.join(","));
        out.push_str("\r\n");
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .zip(&self.columns)
                .map(|(&v, c)| format_value(v, c.integer))
                .collect();
            out.push_str(&cells.join(","));
            out.push_str("\r\n");
        }
        out
    }
}

/// Seventeen significant digits for reals, so values round-trip exactly.
pub fn format_value(v: f64, integer: bool) -> String {
    if integer && v.is_finite() && v.fract() == 0.0 && v.abs() < 9.0e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:.16e}")
    }
}

/// Header and raw cells of a CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvText {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvText {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(|l| l.trim_end_matches('\r')).filter(|l| !l.is_empty());
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| CliError::Validation("CSV file is empty".into()))?
            .split(',')
            .map(|s| s.trim().to_string())
            .collect();
        let rows: Vec<Vec<String>> = lines
            .map(|l| l.split(',').map(|s| s.trim().to_string()).collect())
            .collect();
        if let Some(i) = rows.iter().position(|r| r.len() != header.len()) {
            return Err(CliError::Validation(format!(
                "CSV row {} has {} cells, header has {}",
                i + 1,
                rows[i].len(),
                header.len()
            )));
        }
        Ok(Self { header, rows })
    }

    pub fn numeric_column(&self, name: &str) -> Result<Vec<f64>> {
        let i = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Validation(format!("no column named {name:?}")))?;
        self.rows
            .iter()
            .enumerate()
            .map(|(r, row)| {
                row[i].parse::<f64>().map_err(|_| {
                    CliError::Validation(format!("column {name:?} row {}: not numeric: {:?}", r + 1, row[i]))
                })
            })
            .collect()
    }
}

/// Manifest text: comment lines with provenance, then the resolved
/// configuration as `key=value` lines, so the file can be passed back via
/// `--config`.
pub fn manifest(params: &Params, tables: &[ResultTable]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# qobs run manifest");
    let _ = writeln!(out, "# command = {}", params.command());
    let _ = writeln!(out, "# qobs-cli = {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, "# qobs-core = {}", qobs_core::VERSION);
    for t in tables {
        let _ = writeln!(
            out,
            "# output = {} ({} rows, {} columns)",
            t.file_name(),
            t.rows.len(),
            t.columns.len()
        );
    }
    let _ = writeln!(out, "# rerun: qobs {} --config <this file>", params.command());
    for (k, v) in params.entries() {
        let _ = writeln!(out, "{k}={v}");
    }
    out
}

/// Writes every table and one manifest named `<stem>.manifest`. Nothing is
/// written unless all tables are ready.
pub fn write_run(dir: &Path, stem: &str, params: &Params, tables: &[ResultTable]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut written = Vec::new();
    for t in tables {
        let path = dir.join(t.file_name());
        fs::write(&path, t.to_csv()).map_err(|e| CliError::io(&path, e))?;
        written.push(path);
    }
    let path = dir.join(format!("{stem}.manifest"));
    fs::write(&path, manifest(params, tables)).map_err(|e| CliError::io(&path, e))?;
    written.push(path);
    Ok(written)
}
