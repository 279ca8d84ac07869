//! JSON Lines to Parquet.

use std::io::{BufRead, BufReader};
use std::path::Path;

use rayon::prelude::*;
use serde_json::Value;

use super::schema::{discover_schema_file, ColumnType, TableSchema, DEFAULT_SAMPLE_SIZE};
use super::table::{Cell, ConversionReport, RowWriter};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct JsonlOptions {
    pub sample_size: usize,
    /// Recorded in the output file metadata.
    pub source: String,
    pub batch_size: usize,
}

impl Default for JsonlOptions {
    fn default() -> Self {
        Self {
            sample_size: DEFAULT_SAMPLE_SIZE,
            source: String::new(),
            batch_size: 8192,
        }
    }
}

/// Compact JSON with object keys sorted at every level.
pub fn canonical_json(value: &Value) -> String {
    fn sorted(value: &Value) -> Value {
        match value {
            Value::Object(map) => {
                let mut entries: Vec<_> = map.iter().collect();
                entries.sort_by(|a, b| a.0.cmp(b.0));
                Value::Object(entries.into_iter().map(|(k, v)| (k.clone(), sorted(v))).collect())
            }
            Value::Array(items) => Value::Array(items.iter().map(sorted).collect()),
            other => other.clone(),
        }
    }
    sorted(value).to_string()
}

/// Convert a JSON value into a cell of the given column type.
///
/// `Err` carries the reject reason.
fn to_cell(value: Option<&Value>, ty: ColumnType, nullable: bool) -> std::result::Result<Cell, &'static str> {
    let value = match value {
        None | Some(Value::Null) => {
            return if nullable { Ok(Cell::Null) } else { Err("null") };
        }
        Some(v) => v,
    };
    match ty {
        ColumnType::Bool => value.as_bool().map(Cell::Bool).ok_or("type"),
        ColumnType::Int64 => value.as_i64().map(Cell::Int).ok_or("type"),
        ColumnType::Float64 => value.as_f64().map(Cell::Float).ok_or("type"),
        ColumnType::String => Ok(Cell::Str(match value {
            Value::String(s) => s.clone(),
            other @ (Value::Array(_) | Value::Object(_)) => canonical_json(other),
            other => other.to_string(),
        })),
        ColumnType::ListString => match value {
            Value::Array(items) => items
                .iter()
                .map(|v| v.as_str().map(str::to_string))
                .collect::<Option<Vec<_>>>()
                .map(Cell::List)
                .ok_or("type"),
            _ => Err("type"),
        },
        ColumnType::Nested => Ok(Cell::Str(canonical_json(value))),
    }
}

fn convert_line(line: &str, schema: &TableSchema) -> std::result::Result<Vec<Cell>, &'static str> {
    let record = match serde_json::from_str::<Value>(line) {
        Ok(Value::Object(map)) => map,
        Ok(_) => return Err("not_object"),
        Err(_) => return Err("parse"),
    };
    schema
        .columns
        .iter()
        .map(|c| to_cell(record.get(&c.name), c.ty, c.nullable))
        .collect()
}

/// Convert a JSON Lines file into a Parquet table.
///
/// When `schema` is `None` it is discovered from the file first. Keys not in
/// the schema are dropped. Rows are rejected, never fatal: `parse` for
/// malformed JSON, `not_object` for non-object values, `type` when a value
/// does not fit its column, `null` when a non-nullable column is absent.
pub fn convert_jsonl(
    path: &Path,
    schema: Option<&TableSchema>,
    out: &Path,
    opts: &JsonlOptions,
) -> Result<ConversionReport> {
    let discovered;
    let schema = match schema {
        Some(s) => s,
        None => {
            discovered = discover_schema_file(path, opts.sample_size)?.schema;
            &discovered
        }
    };

    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let mut writer = RowWriter::create(out, schema, &opts.source, opts.batch_size)?;
    let mut report = ConversionReport::new(out);

    let chunk = opts.batch_size.max(1);
    loop {
        let mut buf = Vec::with_capacity(chunk);
        for line in lines.by_ref().take(chunk) {
            let line = line.map_err(|e| Error::io(path, e))?;
            if !line.trim().is_empty() {
                buf.push(line);
            }
        }
        if buf.is_empty() {
            break;
        }
        let rows: Vec<_> = buf
            .par_iter()
            .map(|line| convert_line(line.trim(), schema))
            .collect();
        for row in rows {
            match row {
                Ok(cells) => {
                    writer.push(cells)?;
                    report.accept();
                }
                Err(reason) => report.reject(reason),
            }
        }
    }
    writer.finish()?;
    Ok(report)
}
