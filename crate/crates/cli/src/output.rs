//! Deterministic file emission.
//!
//! CSV cells are written from explicit string conversions (shortest
//! round-trip form for finite floats, `inf`/`-inf`/`nan` otherwise), so
//! identical inputs produce byte-identical files. JSON goes through
//! serde_json, which renders non-finite floats as `null`.

use std::path::Path;

use baroclinic::Scalar;
use serde::Serialize;

use crate::error::Failure;

/// Canonical cell form of a float: shortest representation that parses
/// back to the same bits, with explicit spellings for non-finite values.
pub fn fmt_scalar(v: Scalar) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        let mut out = serde_json::to_string(&v).expect("finite float serializes");
        // serde_json keeps a trailing ".0" on integral floats; keep it
        // (it marks the column as real-valued) but normalize -0.
        if out == "-0.0" {
            out = "0.0".to_string();
        }
        out
    }
}

/// Parses a cell written by `fmt_scalar` (plus common spellings).
pub fn parse_scalar(cell: &str) -> Result<Scalar, Failure> {
    cell.trim()
        .parse::<Scalar>()
        .map_err(|_| Failure::Config(format!("cell {cell:?} is not a number")))
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), Failure> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| Failure::Other(format!("cannot write {}: {e}", path.display())))?;
    w.write_record(header).map_err(Failure::other)?;
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        w.write_record(row).map_err(Failure::other)?;
    }
    w.flush().map_err(Failure::other)?;
    Ok(())
}

/// Reads one named column from a CSV file with a header row.
pub fn read_csv_column(path: &Path, column: &str) -> Result<Vec<Scalar>, Failure> {
    let mut r = csv::Reader::from_path(path)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    let headers = r.headers().map_err(Failure::other)?;
    let idx = headers.iter().position(|h| h == column).ok_or_else(|| {
        Failure::Config(format!(
            "{} has no column {column:?} (columns: {})",
            path.display(),
            headers.iter().collect::<Vec<_>>().join(", ")
        ))
    })?;
    let mut values = Vec::new();
    for record in r.records() {
        let record = record.map_err(Failure::other)?;
        let cell = record
            .get(idx)
            .ok_or_else(|| Failure::Config(format!("{}: short row in CSV", path.display())))?;
        values.push(parse_scalar(cell)?);
    }
    Ok(values)
}

pub fn write_json<V: Serialize>(path: &Path, value: &V) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Failure::Other(format!("cannot serialize {}: {e}", path.display())))?;
    text.push('\n');
    std::fs::write(path, text)
        .map_err(|e| Failure::Other(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}
