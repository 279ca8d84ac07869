//! CSV to Parquet. Every column is an untyped string.

use std::collections::HashSet;
use std::path::Path;

use super::schema::{ColumnDef, ColumnType, TableSchema};
use super::table::{Cell, ConversionReport, RowWriter};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub has_header: bool,
    pub delimiter: u8,
    pub source: String,
    pub batch_size: usize,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            has_header: true,
            delimiter: b',',
            source: String::new(),
            batch_size: 8192,
        }
    }
}

fn header_names(record: &csv::StringRecord) -> Vec<String> {
    let mut seen = HashSet::new();
    record
        .iter()
        .enumerate()
        .map(|(i, raw)| {
            let base = if raw.trim().is_empty() {
                format!("c{i}")
            } else {
                raw.trim().to_string()
            };
            let mut name = base.clone();
            let mut k = 1;
            while !seen.insert(name.clone()) {
                name = format!("{base}_{k}");
                k += 1;
            }
            name
        })
        .collect()
}

/// Convert an RFC 4180 CSV file into a Parquet table of string columns.
///
/// Rows whose field count differs from the header are rejected with reason
/// `arity`; undecodable rows with `parse`.
pub fn convert_csv(path: &Path, out: &Path, opts: &CsvOptions) -> Result<ConversionReport> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .delimiter(opts.delimiter)
        .from_reader(std::io::BufReader::new(file));
    let mut records = reader.records();

    let mut report = ConversionReport::new(out);
    let mut first_row = None;
    let names = loop {
        match records.next() {
            None => return Err(Error::NoRecords),
            Some(Ok(rec)) => {
                if opts.has_header {
                    break header_names(&rec);
                }
                let names = (0..rec.len()).map(|i| format!("c{i}")).collect();
                first_row = Some(rec);
                break names;
            }
            Some(Err(e)) if is_data_error(&e) => report.reject("parse"),
            Some(Err(e)) => return Err(e.into()),
        }
    };
    let schema = TableSchema::new(
        names
            .into_iter()
            .map(|n| ColumnDef::new(n, ColumnType::String, false))
            .collect(),
    )?;
    let width = schema.len();
    let mut writer = RowWriter::create(out, &schema, &opts.source, opts.batch_size)?;

    let mut handle = |rec: csv::StringRecord, report: &mut ConversionReport| -> Result<()> {
        if rec.len() != width {
            report.reject("arity");
            return Ok(());
        }
        writer.push(rec.iter().map(|f| Cell::Str(f.to_string())).collect())?;
        report.accept();
        Ok(())
    };
    if let Some(rec) = first_row {
        handle(rec, &mut report)?;
    }
    for rec in records {
        match rec {
            Ok(rec) => handle(rec, &mut report)?,
            Err(e) if is_data_error(&e) => report.reject("parse"),
            Err(e) => return Err(e.into()),
        }
    }
    writer.finish()?;
    Ok(report)
}

fn is_data_error(e: &csv::Error) -> bool {
    !matches!(e.kind(), csv::ErrorKind::Io(_))
}
