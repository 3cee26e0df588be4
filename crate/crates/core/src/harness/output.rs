use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;
use crate::metrics::MetricsRecord;

pub const CSV_COLUMNS: [&str; 9] = [
    "k",
    "residual",
    "grad_norm",
    "consensus_err",
    "tracking_err",
    "tracking_gap",
    "bits",
    "s_k",
    "wall_ms",
];

/// Trace CSV: a `#`-prefixed copy of `header` (the resolved config), then
/// one row per record. Floats use the shortest round-trip form; a missing
/// residual is an empty cell.
pub fn trace_csv(header: &str, records: &[MetricsRecord]) -> String {
    let mut out = String::new();
    for line in header.lines() {
        if line.is_empty() {
            out.push_str("#\n");
        } else {
            let _ = writeln!(out, "# {line}");
        }
    }
    out.push_str(&CSV_COLUMNS.join(","));
    out.push('\n');
    for r in records {
        let residual = r.residual.map(|v| format!("{v:e}")).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{:e},{:e},{:e},{:e},{},{:e},{:e}",
            r.k,
            residual,
            r.grad_norm,
            r.consensus_error,
            r.tracking_error,
            r.tracking_gap,
            r.cumulative_bits,
            r.s_k,
            r.wall_ms
        );
    }
    out
}

/// Writes through a temporary sibling and renames it into place, so a reader
/// never sees a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
