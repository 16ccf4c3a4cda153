//! Reproducible file emission: atomic writes, 17-significant-digit CSV
//! floats, and JSON with a fixed field order. Data files carry no
//! timestamps or other run-varying content, so identical configs produce
//! byte-identical outputs.

use std::path::Path;

use anyhow::Context;
use serde::Serialize;

/// Formats a float with 17 significant digits; re-parsing the result with
/// `str::parse::<f64>` recovers the original bit pattern.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// One CSV row of floats.
pub fn csv_row(fields: &[f64]) -> String {
    fields.iter().map(|&v| fmt_f64(v)).collect::<Vec<_>>().join(",")
}

/// Writes contents to `<file>.tmp` in the target directory and renames it
/// over the final path, so a failed run never leaves a partial data file.
pub fn write_atomic(path: &Path, contents: &str) -> anyhow::Result<()> {
    let name = path
        .file_name()
        .with_context(|| format!("output path {} has no file name", path.display()))?;
    let tmp = path.with_file_name(format!("{}.tmp", name.to_string_lossy()));
    std::fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    std::fs::rename(&tmp, path)
        .with_context(|| format!("renaming {} into place", tmp.display()))?;
    Ok(())
}

/// Writes a CSV file: header, then one line per row.
pub fn write_csv<I>(path: &Path, header: &str, rows: I) -> anyhow::Result<()>
where
    I: IntoIterator<Item = String>,
{
    let mut text = String::from(header);
    text.push('\n');
    for row in rows {
        text.push_str(&row);
        text.push('\n');
    }
    write_atomic(path, &text)
}

/// Writes a pretty-printed JSON report; field order follows the struct
/// declaration, so it is stable across runs and builds.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, &text)
}
