//! CSV ingestion and emission.
//!
//! Input format: header `time,<id1>,<id2>,...`; the first column is time in
//! seconds, the rest are channel values. Decimal point, comma separator, LF
//! line endings, no quoting. Floats are written in Rust's shortest
//! round-trip form (at most 17 significant digits), so generate → ingest is
//! lossless.

use std::io::Write;
use std::path::Path;

use memd::{build_record, MultichannelRecord};

use crate::error::{CliError, CliResult};

/// Maximum relative deviation of any time delta from the median delta.
const UNIFORMITY_TOL: f64 = 1e-6;

/// Reads a record from CSV. Sample rate is inferred from the median time
/// delta; non-uniform sampling and non-numeric cells are rejected with the
/// offending row and column (1-based, header is row 1).
pub fn ingest_csv(path: &Path) -> CliResult<MultichannelRecord> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| CliError::input(format!("{}: empty file", path.display())))?;
    let columns: Vec<&str> = header.split(',').collect();
    if columns.len() < 2 || columns[0].trim() != "time" {
        return Err(CliError::input(format!(
            "{}: header must be `time,<id1>,...`, got `{header}`",
            path.display()
        )));
    }
    let ids: Vec<String> = columns[1..].iter().map(|s| s.trim().to_string()).collect();
    let n = ids.len();

    let mut times: Vec<f64> = Vec::new();
    let mut channels: Vec<Vec<f64>> = vec![Vec::new(); n];
    for (lineno, line) in lines {
        if line.is_empty() {
            continue;
        }
        let row = lineno + 1;
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != n + 1 {
            return Err(CliError::input(format!(
                "{}: parse error at row {row}: expected {} columns, got {}",
                path.display(),
                n + 1,
                cells.len()
            )));
        }
        for (col, cell) in cells.iter().enumerate() {
            let value: f64 = cell.trim().parse().map_err(|_| {
                CliError::input(format!(
                    "{}: parse error at row {row}, column {}: `{cell}`",
                    path.display(),
                    col + 1
                ))
            })?;
            if col == 0 {
                times.push(value);
            } else {
                channels[col - 1].push(value);
            }
        }
    }
    if times.len() < 4 {
        return Err(CliError::input(format!(
            "{}: need at least 4 rows of samples, got {}",
            path.display(),
            times.len()
        )));
    }

    let mut deltas: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
    deltas.sort_by(f64::total_cmp);
    let median = deltas[deltas.len() / 2];
    if !median.is_finite() || median <= 0.0 {
        return Err(CliError::input(format!(
            "{}: non-increasing time column",
            path.display()
        )));
    }
    for (i, w) in times.windows(2).enumerate() {
        let delta = w[1] - w[0];
        if (delta - median).abs() > UNIFORMITY_TOL * median {
            return Err(CliError::input(format!(
                "{}: non-uniform sampling at row {}: delta {delta} vs median {median}",
                path.display(),
                i + 3
            )));
        }
    }

    let record = build_record(channels, 1.0 / median, ids).map_err(CliError::from)?;
    // Re-attach the epoch offset from the first timestamp.
    let t0 = times[0];
    if t0 != 0.0 {
        let rebased = record
            .channels()
            .iter()
            .map(|ch| memd::TimeSeries::new(ch.samples().to_vec(), ch.sample_rate(), t0))
            .collect::<Result<Vec<_>, _>>()
            .map_err(CliError::from)?;
        return MultichannelRecord::new(rebased, record.channel_ids().to_vec())
            .map_err(CliError::from);
    }
    Ok(record)
}

/// Writes a record in the ingest format.
pub fn write_record_csv(record: &MultichannelRecord, path: &Path) -> CliResult<()> {
    let mut out = String::new();
    out.push_str("time");
    for id in record.channel_ids() {
        out.push(',');
        out.push_str(id);
    }
    out.push('\n');
    let t0 = record.t0();
    let rate = record.sample_rate();
    for i in 0..record.len() {
        out.push_str(&format!("{}", t0 + i as f64 / rate));
        for ch in record.channels() {
            out.push(',');
            out.push_str(&format!("{}", ch.samples()[i]));
        }
        out.push('\n');
    }
    write_file(path, out.as_bytes())
}

pub fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let mut file = std::fs::File::create(path)
        .map_err(|e| CliError::write(format!("cannot create {}: {e}", path.display())))?;
    file.write_all(bytes)
        .map_err(|e| CliError::write(format!("cannot write {}: {e}", path.display())))
}
