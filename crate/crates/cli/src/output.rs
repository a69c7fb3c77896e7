use std::io::Write;
use std::path::Path;

use effdim::format_float;

use crate::error::{CliError, CliResult};

/// Writes through a temporary file in the destination directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| CliError::Json { path: path.display().to_string(), source: e })?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

pub fn num(x: f64) -> String {
    format_float(x)
}

pub fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.into_inner().map_err(|e| CliError::Usage(e.to_string()))
}

/// Appends rows to a CSV, creating it with `header` if absent.
pub fn append_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    let mut existing = Vec::new();
    if path.exists() {
        let mut r = csv::Reader::from_path(path)?;
        let found: Vec<String> = r.headers()?.iter().map(String::from).collect();
        if found != header {
            return Err(CliError::Usage(format!("{} has header {:?}, expected {:?}", path.display(), found, header)));
        }
        for rec in r.records() {
            existing.push(rec?.iter().map(String::from).collect());
        }
    }
    existing.extend_from_slice(rows);
    write_atomic(path, &csv_bytes(header, &existing)?)
}

/// `out.csv` → `out.<suffix>`
pub fn sibling(path: &Path, suffix: &str) -> std::path::PathBuf {
    let mut name = path.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".");
    name.push(suffix);
    path.with_file_name(name)
}

pub fn parse_list<T: std::str::FromStr>(flag: &str, raw: &str) -> CliResult<Vec<T>> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| CliError::Usage(format!("--{flag}: cannot parse {s:?}"))))
        .collect()
}
