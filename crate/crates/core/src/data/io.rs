//! CSV ingestion and serialization.
//!
//! One header row of column names, one record per line. Numeric columns carry
//! their bare name; discrete columns are tagged `name:discrete`, or
//! `name:discrete:<bins>:<min>:<max>` when the bin layout is known. Cells are
//! written with Rust's shortest round-trip float formatting, so a write
//! followed by a read returns bit-identical values.

use std::io::{Read, Write};
use std::path::Path;

use super::{BinEdges, Column, ColumnKind, Dataset};
use crate::error::{Error, Result};

const DISCRETE_TAG: &str = "discrete";

pub fn read_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv_from(file)
}

pub fn read_csv_from<R: Read>(reader: R) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::Csv("missing header row".into()));
    }
    let columns: Vec<Column> = headers.iter().map(parse_header).collect();
    let mut values = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(csv_error)?;
        for (cell, col) in record.iter().zip(&columns) {
            let v = parse_cell(cell, col).map_err(|message| Error::Cell {
                row: i + 1,
                column: col.name.clone(),
                message,
            })?;
            values.push(v);
        }
    }
    Dataset::from_flat(columns, values)
}

pub fn write_csv(d: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut buf = Vec::new();
    write_csv_to(d, &mut buf)?;
    write_atomic(path.as_ref(), &buf)
}

pub fn write_csv_to<W: Write>(d: &Dataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(d.columns().iter().map(render_header))
        .map_err(csv_error)?;
    for row in d.rows().take(d.n_rows()) {
        w.write_record(row.iter().map(|v| v.to_string()))
            .map_err(csv_error)?;
    }
    w.flush().map_err(|e| Error::Csv(e.to_string()))
}

/// Writes `bytes` to a temporary file next to `path`, then renames it over
/// `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    let at = e
        .position()
        .map(|p| format!(" (line {})", p.line()))
        .unwrap_or_default();
    Error::Csv(format!("{e}{at}"))
}

fn parse_cell(cell: &str, col: &Column) -> std::result::Result<f64, String> {
    let cell = cell.trim();
    let v: f64 = cell
        .parse()
        .map_err(|_| format!("cannot parse {cell:?} as a number"))?;
    if !v.is_finite() {
        return Err(format!("non-finite value {cell:?}"));
    }
    if !col.is_numeric() && (v < 0.0 || v.fract() != 0.0) {
        return Err(format!("{cell:?} is not a non-negative integer code"));
    }
    Ok(v)
}

fn render_header(col: &Column) -> String {
    match &col.kind {
        ColumnKind::Numeric => col.name.clone(),
        ColumnKind::Discrete { bins: None } => format!("{}:{DISCRETE_TAG}", col.name),
        ColumnKind::Discrete { bins: Some(b) } => {
            format!(
                "{}:{DISCRETE_TAG}:{}:{}:{}",
                col.name, b.count, b.min, b.max
            )
        }
    }
}

fn parse_header(raw: &str) -> Column {
    let raw = raw.trim();
    if let Some(name) = raw.strip_suffix(&format!(":{DISCRETE_TAG}")) {
        return Column::discrete(name, None);
    }
    let parts: Vec<&str> = raw.rsplitn(4, ':').collect();
    if let [max, min, count, rest] = parts[..] {
        if let Some(name) = rest.strip_suffix(&format!(":{DISCRETE_TAG}")) {
            if let (Ok(count), Ok(min), Ok(max)) = (count.parse(), min.parse(), max.parse()) {
                return Column::discrete(name, Some(BinEdges { count, min, max }));
            }
        }
    }
    Column::numeric(raw)
}
