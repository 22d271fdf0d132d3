//! CSV and manifest writers. Every file is written to a temporary file in
//! the target directory and renamed into place when complete.

use std::io::Write;
use std::path::Path;

use tempfile::NamedTempFile;

use crate::aggregate::{Series, Summary};
use crate::Result;

/// Writes `path` atomically with `fill`.
pub fn write_atomic<F>(path: &Path, fill: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = NamedTempFile::new_in(dir)?;
    {
        let mut buf = std::io::BufWriter::new(tmp.as_file_mut());
        fill(&mut buf)?;
        buf.flush()?;
    }
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn writer(w: &mut dyn Write) -> csv::Writer<&mut dyn Write> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

pub fn write_series(series: &Series, w: &mut dyn Write) -> Result<()> {
    let mut out = writer(w);
    out.write_record(&series.columns)?;
    for row in &series.rows {
        out.write_record(row.iter().map(|v| v.to_string()))?;
    }
    out.flush()?;
    Ok(())
}

/// Columns: `time,completed`, then `<col>_mean,<col>_std` per data column.
pub fn write_summary(summary: &Summary, w: &mut dyn Write) -> Result<()> {
    let mut out = writer(w);
    let mut header = vec!["time".to_string(), "completed".to_string()];
    for c in &summary.columns {
        header.push(format!("{c}_mean"));
        header.push(format!("{c}_std"));
    }
    out.write_record(&header)?;
    for (b, t) in summary.times.iter().enumerate() {
        let mut row = vec![t.to_string(), summary.completed.to_string()];
        for c in 0..summary.columns.len() {
            row.push(summary.mean[b][c].to_string());
            row.push(summary.std[b][c].to_string());
        }
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}
