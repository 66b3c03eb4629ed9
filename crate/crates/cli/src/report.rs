//! Report emission: JSON (nested) or CSV (one row per trial), byte-stable
//! for a fixed configuration.

use crate::{CliError, CommonArgs, Format};
use serde::Serialize;
use std::io::Write;

/// Serializes a report as JSON, or as CSV rows via the provided flattener.
pub fn emit<T: Serialize>(
    common: &CommonArgs,
    report: &T,
    csv_rows: impl Fn() -> (Vec<&'static str>, Vec<Vec<String>>),
) -> Result<(), CliError> {
    let text = match common.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report)
                .map_err(|e| CliError::Config(format!("serialization failed: {e}")))?;
            s.push('\n');
            s
        }
        Format::Csv => {
            let (header, rows) = csv_rows();
            let mut s = header.join(",");
            s.push('\n');
            for row in rows {
                s.push_str(&row.join(","));
                s.push('\n');
            }
            s
        }
    };
    match &common.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Config(format!("stdout: {e}")))
        }
    }
}
