//! Output formatting: round-trip-safe floats and deterministic JSON.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};

/// Format with 17 significant digits; parses back to the identical double.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// A JSON array of floats at full precision.
pub fn float_array(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| fmt_f64(*x)).collect();
    format!("[{}]", parts.join(", "))
}

/// A JSON array of float arrays.
pub fn float_matrix(rows: &[Vec<f64>]) -> String {
    let parts: Vec<String> = rows.iter().map(|r| float_array(r)).collect();
    format!("[{}]", parts.join(", "))
}

/// Serialize a value as pretty JSON with sorted keys (serde_json's default
/// map is ordered), byte-identical for identical inputs.
pub fn to_sorted_json<T: serde::Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).context("serializing report")?;
    Ok(format!("{}\n", serde_json::to_string_pretty(&v)?))
}

/// Write to a file, or to stdout when `path` is `None`.
pub fn emit(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => {
            std::fs::write(p, content).with_context(|| format!("writing {}", p.display()))?;
        }
        None => {
            std::io::stdout().write_all(content.as_bytes())?;
        }
    }
    Ok(())
}
