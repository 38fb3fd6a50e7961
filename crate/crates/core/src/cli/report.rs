use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub const REDUNDANCY_HEADER: [&str; 5] = ["layer", "n_prime", "n_f", "n_r", "percent"];
pub const HISTORY_HEADER: [&str; 3] = ["epoch", "loss", "test_accuracy"];
pub const SWEEP_HEADER: [&str; 7] = [
    "axis",
    "value",
    "seed",
    "tau",
    "nbar_r_abs",
    "nbar_r_pct",
    "test_accuracy",
];
pub const SWEEP_LAYERS_HEADER: [&str; 8] = [
    "axis", "value", "seed", "tau", "layer", "n_prime", "n_f", "n_r",
];

pub fn render_csv(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.into_inner()
        .map_err(|e| Error::Csv(csv::Error::from(e.into_error())))
}

/// Writes the CSV next to `path` and renames it into place, so a failed
/// write never leaves a partial file under the final name.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let tmp = path.with_extension("csv.partial");
    fs::write(&tmp, render_csv(header, rows)?).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

pub fn fmt_f(v: f64) -> String {
    format!("{v:.6}")
}
