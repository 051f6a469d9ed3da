//! CSV and JSON reports. JSON holds an array of objects with the same keys
//! and values as the CSV columns.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::config::Format;
use crate::error::{Error, Result};

/// `[1, 3, 1]` as `"1-3-1"`.
pub fn ranks_label(ranks: &[usize]) -> String {
    ranks.iter().map(|r| r.to_string()).collect::<Vec<_>>().join("-")
}

pub fn render<T: Serialize>(records: &[T], format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in records {
                w.serialize(r).map_err(|e| Error::invalid(format!("csv: {e}")))?;
            }
            w.into_inner().map_err(|e| Error::Io(e.into_error()))
        }
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(records).map_err(|e| Error::invalid(format!("json: {e}")))?;
            out.push(b'\n');
            Ok(out)
        }
    }
}

/// Writes `bytes` to `path` through a temporary file in the same directory,
/// so that a failed run leaves no partial file behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Sends a report to `path` or, without one, to standard output.
pub fn emit<T: Serialize>(records: &[T], format: Format, path: Option<&Path>) -> Result<()> {
    let bytes = render(records, format)?;
    match path {
        Some(p) => write_atomic(p, &bytes),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(&bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}
