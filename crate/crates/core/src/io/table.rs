//! CSV output with a fixed column order and 17 significant digits per float.

use std::path::Path;

use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes a header row and one row per entry of `rows`.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(header)?;
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::Config(format!(
                "row of {} values for {} columns in {}",
                row.len(),
                header.len(),
                path.display()
            )));
        }
        w.write_record(row.iter().map(|x| format_float(*x)))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn write_diagnostics_csv(path: &Path, records: &[DiagnosticsRecord]) -> Result<()> {
    let rows: Vec<Vec<f64>> = records.iter().map(|r| r.values().to_vec()).collect();
    write_table(path, &DiagnosticsRecord::COLUMNS, &rows)
}
