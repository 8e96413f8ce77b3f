use std::path::Path;

use crate::error::CliResult;

/// Writes a header row followed by numeric rows.
pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn num(v: f64) -> String {
    format!("{v:.12e}")
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text)?;
    Ok(())
}
