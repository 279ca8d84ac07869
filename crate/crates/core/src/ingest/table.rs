//! Row-to-column plumbing shared by the converters.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use arrow_array::builder::{
    BooleanBuilder, Float64Builder, Int64Builder, ListBuilder, StringBuilder,
};
use arrow_array::{Array, ArrayRef, ListArray, RecordBatch};
use arrow_schema::{DataType, Schema};
use serde::Serialize;

use super::schema::{ColumnDef, ColumnType, TableSchema, NESTED_MARKER};
use crate::error::{Error, Result};
use crate::lake;

/// One cell of a converted row.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
    List(Vec<String>),
}

/// Totals for one conversion. `rows_read = rows_written + rows_rejected`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ConversionReport {
    pub rows_read: u64,
    pub rows_written: u64,
    pub rows_rejected: u64,
    pub reject_reasons: BTreeMap<String, u64>,
    pub output_path: PathBuf,
}

impl ConversionReport {
    pub(crate) fn new(output_path: &Path) -> Self {
        Self {
            output_path: output_path.to_path_buf(),
            ..Self::default()
        }
    }

    pub(crate) fn reject(&mut self, reason: &str) {
        self.rows_read += 1;
        self.rows_rejected += 1;
        *self.reject_reasons.entry(reason.to_string()).or_default() += 1;
    }

    pub(crate) fn accept(&mut self) {
        self.rows_read += 1;
        self.rows_written += 1;
    }
}

enum Builder {
    Bool(BooleanBuilder),
    Int(Int64Builder),
    Float(Float64Builder),
    Str(StringBuilder),
    List(ListBuilder<StringBuilder>),
}

impl Builder {
    fn new(ty: ColumnType) -> Self {
        match ty {
            ColumnType::Bool => Builder::Bool(BooleanBuilder::new()),
            ColumnType::Int64 => Builder::Int(Int64Builder::new()),
            ColumnType::Float64 => Builder::Float(Float64Builder::new()),
            ColumnType::String | ColumnType::Nested => Builder::Str(StringBuilder::new()),
            ColumnType::ListString => Builder::List(ListBuilder::new(StringBuilder::new())),
        }
    }

    fn push(&mut self, cell: Cell) {
        match (self, cell) {
            (Builder::Bool(b), Cell::Bool(v)) => b.append_value(v),
            (Builder::Int(b), Cell::Int(v)) => b.append_value(v),
            (Builder::Float(b), Cell::Float(v)) => b.append_value(v),
            (Builder::Str(b), Cell::Str(v)) => b.append_value(v),
            (Builder::List(b), Cell::List(items)) => {
                for item in items {
                    b.values().append_value(item);
                }
                b.append(true);
            }
            (Builder::Bool(b), _) => b.append_null(),
            (Builder::Int(b), _) => b.append_null(),
            (Builder::Float(b), _) => b.append_null(),
            (Builder::Str(b), _) => b.append_null(),
            (Builder::List(b), _) => b.append(false),
        }
    }

    fn finish(&mut self) -> ArrayRef {
        match self {
            Builder::Bool(b) => Arc::new(b.finish()),
            Builder::Int(b) => Arc::new(b.finish()),
            Builder::Float(b) => Arc::new(b.finish()),
            Builder::Str(b) => Arc::new(b.finish()),
            Builder::List(b) => Arc::new(b.finish()),
        }
    }
}

/// Accumulates typed rows and flushes them to a Parquet sink in batches.
pub(crate) struct RowWriter {
    schema: Arc<Schema>,
    builders: Vec<Builder>,
    pending: usize,
    batch_size: usize,
    sink: lake::ParquetSink,
}

impl RowWriter {
    pub fn create(out: &Path, schema: &TableSchema, source: &str, batch_size: usize) -> Result<Self> {
        let arrow = Arc::new(schema.to_arrow());
        let sink = lake::ParquetSink::create(out, arrow.clone(), source)?;
        Ok(Self {
            schema: arrow,
            builders: schema.columns.iter().map(|c| Builder::new(c.ty)).collect(),
            pending: 0,
            batch_size: batch_size.max(1),
            sink,
        })
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<()> {
        debug_assert_eq!(row.len(), self.builders.len());
        for (b, cell) in self.builders.iter_mut().zip(row) {
            b.push(cell);
        }
        self.pending += 1;
        if self.pending >= self.batch_size {
            self.flush()?;
        }
        Ok(())
    }

    fn flush(&mut self) -> Result<()> {
        if self.pending == 0 {
            return Ok(());
        }
        let columns = self.builders.iter_mut().map(Builder::finish).collect();
        let batch = RecordBatch::try_new(self.schema.clone(), columns)?;
        self.sink.write(&batch)?;
        self.pending = 0;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.flush()?;
        self.sink.finish()
    }
}

/// Read a converted table back as its schema and rows of cells.
pub fn read_rows(path: &Path) -> Result<(TableSchema, Vec<Vec<Cell>>)> {
    let batch = lake::read_table(path)?;
    let arrow = batch.schema();
    let mut defs = Vec::with_capacity(arrow.fields().len());
    let mut columns: Vec<Vec<Cell>> = Vec::with_capacity(arrow.fields().len());
    for (field, array) in arrow.fields().iter().zip(batch.columns()) {
        let (ty, cells) = match field.data_type() {
            DataType::Boolean => (
                ColumnType::Bool,
                lake::bools(array.as_ref())?
                    .into_iter()
                    .map(|v| v.map_or(Cell::Null, Cell::Bool))
                    .collect(),
            ),
            DataType::Int64 => (
                ColumnType::Int64,
                lake::i64s(array.as_ref())?
                    .into_iter()
                    .map(|v| v.map_or(Cell::Null, Cell::Int))
                    .collect(),
            ),
            DataType::Float64 => {
                let a = array
                    .as_any()
                    .downcast_ref::<arrow_array::Float64Array>()
                    .expect("float64");
                (
                    ColumnType::Float64,
                    (0..a.len())
                        .map(|i| {
                            if a.is_null(i) {
                                Cell::Null
                            } else {
                                Cell::Float(a.value(i))
                            }
                        })
                        .collect(),
                )
            }
            DataType::Utf8 => {
                let ty = if field.metadata().contains_key(NESTED_MARKER) {
                    ColumnType::Nested
                } else {
                    ColumnType::String
                };
                (
                    ty,
                    lake::strings(array.as_ref())?
                        .into_iter()
                        .map(|v| v.map_or(Cell::Null, Cell::Str))
                        .collect(),
                )
            }
            DataType::List(_) => {
                let a = array.as_any().downcast_ref::<ListArray>().expect("list");
                let cells = (0..a.len())
                    .map(|i| {
                        if a.is_null(i) {
                            Ok(Cell::Null)
                        } else {
                            let items = lake::strings(a.value(i).as_ref())?;
                            Ok(Cell::List(
                                items.into_iter().map(Option::unwrap_or_default).collect(),
                            ))
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                (ColumnType::ListString, cells)
            }
            other => {
                return Err(Error::invalid(format!(
                    "{}: unsupported column type {other}",
                    field.name()
                )))
            }
        };
        defs.push(ColumnDef::new(field.name(), ty, field.is_nullable()));
        columns.push(cells);
    }
    let n = batch.num_rows();
    let mut rows: Vec<Vec<Cell>> = (0..n).map(|_| Vec::with_capacity(columns.len())).collect();
    for col in columns {
        for (row, cell) in rows.iter_mut().zip(col) {
            row.push(cell);
        }
    }
    Ok((TableSchema { columns: defs }, rows))
}
