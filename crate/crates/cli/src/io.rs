//! File access: JSON configuration and material files, numeric CSV tables.

use std::fs;
use std::path::{Path, PathBuf};

use flexlife::config::RunConfig;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{CliError, CliResult};

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub fn read_config(path: &Path) -> CliResult<RunConfig> {
    let cfg: RunConfig = read_json(path)?;
    cfg.validate().map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    Ok(cfg)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::input(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

/// Creates the output directory and returns the path of `name` inside it.
pub fn output_path(dir: &Path, name: &str) -> CliResult<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| CliError::input(format!("{}: {e}", dir.display())))?;
    Ok(dir.join(name))
}

/// Numeric table read by column name. Empty cells are `None`.
pub struct Table {
    pub path: PathBuf,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn read(path: &Path) -> CliResult<Self> {
        let err = |msg: String| CliError::input(format!("{}: {msg}", path.display()));
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(|e| err(e.to_string()))?;
        let header: Vec<String> = reader.headers().map_err(|e| err(e.to_string()))?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for (k, record) in reader.records().enumerate() {
            let record = record.map_err(|e| err(e.to_string()))?;
            let row = record
                .iter()
                .map(|cell| {
                    if cell.is_empty() {
                        Ok(None)
                    } else {
                        cell.parse::<f64>().map(Some).map_err(|_| err(format!("line {}: '{cell}' is not a number", k + 2)))
                    }
                })
                .collect::<CliResult<Vec<_>>>()?;
            rows.push(row);
        }
        Ok(Self { path: path.to_path_buf(), header, rows })
    }

    pub fn column_index(&self, name: &str) -> CliResult<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::input(format!("{}: missing column '{name}'", self.path.display())))
    }

    /// Column `name` with every cell filled in.
    pub fn column(&self, name: &str) -> CliResult<Vec<f64>> {
        let k = self.column_index(name)?;
        self.rows
            .iter()
            .enumerate()
            .map(|(r, row)| {
                row.get(k).copied().flatten().ok_or_else(|| {
                    CliError::input(format!("{}: line {}: column '{name}' is empty", self.path.display(), r + 2))
                })
            })
            .collect()
    }

    /// Requires the header to be exactly `names`.
    pub fn expect_header(&self, names: &[&str]) -> CliResult<()> {
        if self.header.iter().map(String::as_str).ne(names.iter().copied()) {
            return Err(CliError::input(format!(
                "{}: expected columns '{}', found '{}'",
                self.path.display(),
                names.join(","),
                self.header.join(",")
            )));
        }
        if self.rows.is_empty() {
            return Err(CliError::input(format!("{}: no data rows", self.path.display())));
        }
        Ok(())
    }
}

pub fn write_csv(path: &Path, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<()> {
    let err = |e: csv::Error| CliError::input(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(&row).map_err(err)?;
    }
    w.flush().map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

/// Shortest round-trip representation; `inf` for infinity.
pub fn num(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x}")
    }
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}
