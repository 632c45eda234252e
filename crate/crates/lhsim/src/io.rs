//! Loading inputs and writing outputs.
//!
//! Every output file is written to a temporary file in the destination
//! directory and renamed into place, so a reader sees either the complete
//! file or nothing.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use lhsim_core::link::STANDARD_TABLE_CSV;
use lhsim_core::{CqiTable, ScenarioConfig, SweepGrid};
use serde::Serialize;
use tempfile::NamedTempFile;

use crate::error::CliError;

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Input { path: path.to_owned(), source })
}

/// Scenario from a key/value file, or the defaults when no path is given.
pub fn load_scenario(path: Option<&Path>) -> Result<ScenarioConfig, CliError> {
    let Some(path) = path else { return Ok(ScenarioConfig::default()) };
    let cfg = ScenarioConfig::from_kv_str(&read_text(path)?)
        .and_then(|cfg| cfg.validate().map(|_| cfg))
        .map_err(|source| CliError::Config { path: path.to_owned(), source })?;
    Ok(cfg)
}

pub fn load_grid(path: Option<&Path>) -> Result<SweepGrid, CliError> {
    let Some(path) = path else { return Ok(SweepGrid::default()) };
    let grid = SweepGrid::from_kv_str(&read_text(path)?)
        .and_then(|grid| grid.validate().map(|_| grid))
        .map_err(|source| CliError::Config { path: path.to_owned(), source })?;
    Ok(grid)
}

/// The CQI table together with the exact text it was parsed from.
pub fn load_cqi_table(path: Option<&Path>) -> Result<(CqiTable, String), CliError> {
    let (text, origin) = match path {
        Some(p) => (read_text(p)?, p.to_owned()),
        None => (STANDARD_TABLE_CSV.to_owned(), PathBuf::from("<built-in cqi table>")),
    };
    let table = CqiTable::from_csv(&text).map_err(|e| CliError::BadInput { path: origin, message: e.to_string() })?;
    Ok((table, text))
}

pub fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Output { path: dir.to_owned(), source })
}

/// Writes `bytes` to `path` via a temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let err = |source| CliError::Output { path: path.to_owned(), source };
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = NamedTempFile::new_in(dir).map_err(err)?;
    tmp.write_all(bytes).map_err(err)?;
    tmp.as_file().sync_all().map_err(err)?;
    tmp.persist(path).map_err(|e| err(e.error))?;
    Ok(())
}

pub fn csv_bytes<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).expect("rows serialize to flat records");
    }
    w.into_inner().expect("writing to memory cannot fail")
}

pub fn json_bytes<T: Serialize + ?Sized>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("values serialize to JSON");
    out.push(b'\n');
    out
}

pub fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<(), CliError> {
    write_atomic(path, &csv_bytes(rows))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), CliError> {
    write_atomic(path, &json_bytes(value))
}
