use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use super::config::SweepConfig;
use super::sweep::SweepRow;
use crate::error::{Error, Result};
use crate::units::{ghz, HBAR, K_B};

pub const CSV_HEADER: [&str; 7] = [
    "sweep_value_ghz",
    "s_max",
    "c_plus_abs",
    "theta_rad",
    "s_diff",
    "a_pm",
    "wall_ms",
];

pub const SIDECAR_FORMAT_VERSION: u32 = 1;

/// 17 significant digits, enough for an exact `f64` round trip.
fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.display().to_string(),
        source,
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn ensure_rows(rows: &[SweepRow]) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::Config("nothing to emit: no rows".into()));
    }
    Ok(())
}

pub fn write_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    ensure_rows(rows)?;
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(csv_err(path))?;
    writer.write_record(CSV_HEADER).map_err(csv_err(path))?;
    for row in rows {
        writer
            .write_record([
                fmt_f64(row.sweep_value_ghz),
                fmt_opt(row.s_max),
                fmt_opt(row.c_plus_abs),
                fmt_opt(row.theta_rad),
                fmt_opt(row.s_diff),
                fmt_opt(row.a_pm),
                fmt_f64(row.wall_ms),
            ])
            .map_err(csv_err(path))?;
    }
    writer.flush().map_err(io_err(path))?;
    Ok(())
}

/// Reads a CSV written by [`write_csv`]. Error messages of failed points are
/// not stored in the CSV, so `error` is always `None`.
pub fn read_csv(path: &Path) -> Result<Vec<SweepRow>> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let header = reader.headers().map_err(csv_err(path))?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Config(format!(
            "{}: unexpected CSV header {:?}",
            path.display(),
            header
        )));
    }
    let parse = |s: &str| -> Result<Option<f64>> {
        if s.is_empty() {
            return Ok(None);
        }
        s.parse::<f64>()
            .map(Some)
            .map_err(|_| Error::Config(format!("{}: bad number `{s}`", path.display())))
    };
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_err(path))?;
        let required = |i: usize| -> Result<f64> {
            parse(&record[i])?
                .ok_or_else(|| Error::Config(format!("{}: missing column {i}", path.display())))
        };
        rows.push(SweepRow {
            sweep_value_ghz: required(0)?,
            s_max: parse(&record[1])?,
            c_plus_abs: parse(&record[2])?,
            theta_rad: parse(&record[3])?,
            s_diff: parse(&record[4])?,
            a_pm: parse(&record[5])?,
            wall_ms: required(6)?,
            error: None,
        });
    }
    Ok(rows)
}

/// Run-level facts recorded next to the data.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunMetadata {
    pub started_unix_ms: u128,
    pub total_wall_ms: f64,
    pub parallel: bool,
    pub threads: usize,
}

pub fn sidecar(
    config: &SweepConfig,
    rows: &[SweepRow],
    meta: &RunMetadata,
) -> Result<serde_json::Value> {
    ensure_rows(rows)?;
    let failures: Vec<_> = rows
        .iter()
        .filter_map(|r| {
            r.error
                .as_ref()
                .map(|e| json!({ "sweep_value_ghz": r.sweep_value_ghz, "error": e }))
        })
        .collect();
    Ok(json!({
        "format_version": SIDECAR_FORMAT_VERSION,
        "library": {
            "name": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
        },
        "config": serde_json::to_value(config)?,
        "constants": {
            "hbar_j_s": HBAR,
            "k_b_j_per_k": K_B,
            "rad_per_ns_per_ghz": ghz(1.0),
        },
        "csv_header": CSV_HEADER,
        "points": rows.len(),
        "failures": failures,
        "wall_clock": serde_json::to_value(meta)?,
    }))
}

pub fn write_sidecar(
    config: &SweepConfig,
    rows: &[SweepRow],
    meta: &RunMetadata,
    path: &Path,
) -> Result<()> {
    let value = sidecar(config, rows, meta)?;
    let file = File::create(path).map_err(io_err(path))?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut out, &value)?;
    out.write_all(b"\n").map_err(io_err(path))?;
    out.flush().map_err(io_err(path))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(v: f64) -> SweepRow {
        SweepRow {
            sweep_value_ghz: v,
            s_max: Some(1.0 / 3.0 + v),
            c_plus_abs: Some(0.1 * v),
            theta_rad: Some(std::f64::consts::PI),
            s_diff: None,
            a_pm: Some(1e-300 * v),
            wall_ms: 12.5,
            error: None,
        }
    }

    #[test]
    fn csv_layout_and_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rows.csv");
        let rows = vec![row(0.1), row(0.7), row(1.9)];
        write_csv(&rows, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(!text.contains('\r'));
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
        let back = read_csv(&path).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn empty_rows_rejected() {
        let dir = tempfile::tempdir().unwrap();
        assert!(write_csv(&[], &dir.path().join("x.csv")).is_err());
    }

    #[test]
    fn io_errors_name_the_path() {
        let err = write_csv(&[row(1.0)], Path::new("/nonexistent-dir/x.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/x.csv"));
    }
}
