//! CSV and JSON emitters.
//!
//! Floats are written in their shortest round-trip form, so identical values always give
//! identical bytes. Missing values are empty CSV fields and JSON `null`.

use std::io::Write;

use clap::ValueEnum;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug)]
pub struct FormatError(pub String);

impl std::fmt::Display for FormatError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for FormatError {}

impl From<csv::Error> for FormatError {
    fn from(e: csv::Error) -> Self {
        FormatError(e.to_string())
    }
}

impl From<serde_json::Error> for FormatError {
    fn from(e: serde_json::Error) -> Self {
        FormatError(e.to_string())
    }
}

impl From<std::io::Error> for FormatError {
    fn from(e: std::io::Error) -> Self {
        FormatError(e.to_string())
    }
}

/// A table of records: CSV with a header row, or a JSON array of objects.
pub fn write_records<T: Serialize>(out: &mut dyn Write, format: Format, rows: &[T]) -> Result<(), FormatError> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for row in rows {
                w.serialize(row)?;
            }
            w.flush()?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, rows)?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}

/// A single record: one-row CSV, or one JSON object.
pub fn write_record<T: Serialize>(out: &mut dyn Write, format: Format, row: &T) -> Result<(), FormatError> {
    match format {
        Format::Csv => write_records(out, format, std::slice::from_ref(row)),
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, row)?;
            out.write_all(b"\n")?;
            Ok(())
        }
    }
}

/// A nested document, always JSON.
pub fn write_json<T: Serialize>(out: &mut dyn Write, doc: &T) -> Result<(), FormatError> {
    serde_json::to_writer_pretty(&mut *out, doc)?;
    out.write_all(b"\n")?;
    Ok(())
}
