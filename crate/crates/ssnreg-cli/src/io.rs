//! CSV and JSON file plumbing.
//!
//! Matrices are plain comma-separated numeric rows with '.' decimals and an
//! optional single header row (detected by a non-numeric first line).
//! Values are written with Rust's shortest round-trip formatting so a
//! read-back reproduces the same bits.

use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::Serialize;

use crate::CliError;

fn parse_line(line: &str, lineno: usize) -> Result<Vec<f64>, CliError> {
    let mut row = Vec::new();
    for tok in line.split(',') {
        let tok = tok.trim();
        let v: f64 = tok.parse().map_err(|_| {
            CliError::Validation(format!("line {lineno}: cannot parse '{tok}' as a number"))
        })?;
        if !v.is_finite() {
            return Err(CliError::Validation(format!(
                "line {lineno}: non-finite value '{tok}' is not allowed"
            )));
        }
        row.push(v);
    }
    Ok(row)
}

fn read_rows(path: &Path) -> Result<Vec<Vec<f64>>, CliError> {
    let content = fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (i, line) in content.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = parse_line(line, lineno);
        let row = match parsed {
            Ok(row) => row,
            // A single non-numeric leading row is treated as a header.
            Err(_) if rows.is_empty() && lineno == 1 => continue,
            Err(e) => return Err(e),
        };
        if let Some(w) = width {
            if row.len() != w {
                return Err(CliError::Validation(format!(
                    "line {lineno}: expected {w} columns, found {}",
                    row.len()
                )));
            }
        } else {
            width = Some(row.len());
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Validation(format!(
            "{} holds no data rows",
            path.display()
        )));
    }
    Ok(rows)
}

pub fn read_matrix_csv(path: &Path) -> Result<Array2<f64>, CliError> {
    let rows = read_rows(path)?;
    let (n, p) = (rows.len(), rows[0].len());
    let mut x = Array2::zeros((n, p));
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            x[(i, j)] = v;
        }
    }
    Ok(x)
}

pub fn read_vector_csv(path: &Path) -> Result<Array1<f64>, CliError> {
    let rows = read_rows(path)?;
    if rows[0].len() != 1 {
        return Err(CliError::Validation(format!(
            "{} must hold a single column, found {}",
            path.display(),
            rows[0].len()
        )));
    }
    Ok(rows.iter().map(|r| r[0]).collect())
}

pub fn write_matrix_csv(path: &Path, x: &Array2<f64>) -> Result<(), CliError> {
    let mut out = String::new();
    for row in x.rows() {
        let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    write_text(path, &out)
}

pub fn write_vector_csv(path: &Path, v: &Array1<f64>) -> Result<(), CliError> {
    let mut out = String::new();
    for x in v.iter() {
        out.push_str(&format!("{x}\n"));
    }
    write_text(path, &out)
}

pub fn write_text(path: &Path, content: &str) -> Result<(), CliError> {
    fs::write(path, content)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Io(format!("cannot serialize {}: {e}", path.display())))?;
    write_text(path, &(text + "\n"))
}

/// Appends one JSON line per record.
pub struct JsonlWriter {
    file: fs::File,
    path: std::path::PathBuf,
}

impl JsonlWriter {
    pub fn create(path: &Path) -> Result<Self, CliError> {
        let file = fs::File::create(path)
            .map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))?;
        Ok(Self {
            file,
            path: path.to_path_buf(),
        })
    }

    pub fn write<T: Serialize>(&mut self, record: &T) -> Result<(), CliError> {
        let line = serde_json::to_string(record)
            .map_err(|e| CliError::Io(format!("cannot serialize record: {e}")))?;
        writeln!(self.file, "{line}")
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", self.path.display())))
    }
}

/// Everything needed to re-run a command identically, written next to every
/// output.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub options: serde_json::Value,
    pub seed: Option<u64>,
    pub version: String,
    pub wall_time_secs: f64,
}

impl RunManifest {
    pub fn new(command: &str, options: serde_json::Value, seed: Option<u64>) -> Self {
        Self {
            command: command.to_string(),
            argv: std::env::args().collect(),
            options,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_secs: 0.0,
        }
    }
}

pub fn ensure_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))
}
