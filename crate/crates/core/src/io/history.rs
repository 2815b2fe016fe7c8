//! History CSV: one row per [`HistoryRecord`], floats with 17 significant
//! digits, absent values as empty cells.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::diagnostics::HistoryRecord;
use crate::error::{Error, Result};

pub const HISTORY_HEADER: [&str; 11] = [
    "step",
    "t",
    "mass",
    "energy",
    "r",
    "xi",
    "sav_r",
    "h2",
    "dissipation",
    "linf_err",
    "l2_err",
];

/// Formats `v` with 17 significant digits, which round-trips every `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn format_opt(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse(format!("{other:?}")),
    }
}

/// Streams records to a CSV sink, flushing after every row so that a run
/// interrupted by a divergence leaves all earlier rows on disk.
pub struct HistoryWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl HistoryWriter<BufWriter<File>> {
    pub fn create(path: impl AsRef<Path>) -> Result<Self> {
        HistoryWriter::new(BufWriter::new(File::create(path)?))
    }
}

impl<W: Write> HistoryWriter<W> {
    /// Wraps `sink` and writes the header line.
    pub fn new(sink: W) -> Result<Self> {
        let mut inner = csv::WriterBuilder::new().has_headers(false).from_writer(sink);
        inner.write_record(HISTORY_HEADER).map_err(csv_err)?;
        inner.flush()?;
        Ok(HistoryWriter { inner })
    }

    pub fn write(&mut self, rec: &HistoryRecord) -> Result<()> {
        let row = [
            rec.step.to_string(),
            format_float(rec.t),
            format_float(rec.mass),
            format_float(rec.energy),
            format_opt(rec.r),
            format_opt(rec.xi),
            format_opt(rec.sav_r),
            format_float(rec.h2),
            format_float(rec.dissipation),
            format_opt(rec.linf_err),
            format_opt(rec.l2_err),
        ];
        self.inner.write_record(&row).map_err(csv_err)?;
        self.inner.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> Result<W> {
        self.inner
            .into_inner()
            .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
    }
}

pub fn write_history_csv(records: &[HistoryRecord], path: impl AsRef<Path>) -> Result<()> {
    let mut w = HistoryWriter::create(path)?;
    for rec in records {
        w.write(rec)?;
    }
    Ok(())
}

/// Parses a file produced by [`HistoryWriter`].
pub fn parse_history_csv(text: &str) -> Result<Vec<HistoryRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(csv_err)?;
    if header.iter().ne(HISTORY_HEADER) {
        return Err(Error::Parse(format!("unexpected header {header:?}")));
    }
    let mut out = Vec::new();
    for (line, row) in reader.records().enumerate() {
        let row = row.map_err(csv_err)?;
        let bad = |col: &str| Error::Parse(format!("row {}: bad value in column {col}", line + 1));
        let num = |idx: usize| -> Result<f64> { row[idx].parse().map_err(|_| bad(HISTORY_HEADER[idx])) };
        let opt = |idx: usize| -> Result<Option<f64>> {
            if row[idx].is_empty() {
                Ok(None)
            } else {
                num(idx).map(Some)
            }
        };
        out.push(HistoryRecord {
            step: row[0].parse().map_err(|_| bad("step"))?,
            t: num(1)?,
            mass: num(2)?,
            energy: num(3)?,
            r: opt(4)?,
            xi: opt(5)?,
            sav_r: opt(6)?,
            h2: num(7)?,
            dissipation: num(8)?,
            linf_err: opt(9)?,
            l2_err: opt(10)?,
        });
    }
    Ok(out)
}

pub fn read_history_csv(path: impl AsRef<Path>) -> Result<Vec<HistoryRecord>> {
    parse_history_csv(&std::fs::read_to_string(path)?)
}
