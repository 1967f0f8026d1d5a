//! Byte-stable CSV and JSON writers.
//!
//! Floats are printed as shortest round-trip decimals (`{:?}` for CSV, ryu
//! through serde_json for JSON), JSON keys are emitted in lexicographic
//! order, and every document ends in a single newline, so identical inputs
//! produce identical bytes.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::CliError;

/// A float for CSV: shortest decimal that round-trips, `NaN` for holes.
pub fn csv_num(x: f64) -> String {
    format!("{x:?}")
}

pub struct CsvTable {
    lines: Vec<String>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self {
            lines: vec![header.join(",")],
        }
    }

    pub fn row(&mut self, cells: &[String]) {
        self.lines.push(cells.join(","));
    }

    pub fn len(&self) -> usize {
        self.lines.len() - 1
    }

    pub fn render(&self) -> String {
        let mut text = self.lines.join("\n");
        text.push('\n');
        text
    }
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn render_json(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("json value prints");
    text.push('\n');
    text
}

/// Writes to `out` when given, otherwise to stdout.
pub fn emit(out: Option<&PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_file(path, content),
        None => {
            let stdout = std::io::stdout();
            let mut handle = stdout.lock();
            handle
                .write_all(content.as_bytes())
                .and_then(|()| handle.flush())
                .map_err(|e| CliError::runtime(format!("cannot write to stdout: {e}")))
        }
    }
}

pub fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content)
        .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))
}
