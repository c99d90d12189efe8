//! Deterministic CSV and JSON rendering.

use std::path::Path;

use ldp_core::Point;
use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Shortest round-trip decimal, with `inf` sentinels.
pub fn num(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x}")
    }
}

pub fn point(p: &Point<f64>) -> String {
    match p {
        Point::Real(x) => num(*x),
        Point::Id(i) => i.to_string(),
    }
}

pub fn csv_table(header: &[&str], rows: &[Vec<String>]) -> CliResult<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::Spec(format!("csv: {e}"));
    w.write_record(header).map_err(fail)?;
    for r in rows {
        w.write_record(r).map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Spec(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

/// Writes to `out` when given, otherwise to stdout.
pub fn emit(out: Option<&Path>, content: &str) -> CliResult<()> {
    match out {
        Some(path) => write_file(path, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

pub fn write_file(path: &Path, content: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.display().to_string(), source })?;
    }
    std::fs::write(path, content).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}
