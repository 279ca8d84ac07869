//! Parquet storage for lake tables.
//!
//! Every logical table is one zstd-compressed Parquet file at
//! `<lake_root>/<schema>/<table>.parquet`. Writers stamp the file-level
//! key/value metadata with the source name and toolkit version, and write
//! through a temporary file so a failed stage never leaves a half-written
//! table behind.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use arrow_array::{
    Array, ArrayRef, BooleanArray, Float32Array, Float64Array, Int32Array, Int64Array,
    LargeStringArray, RecordBatch, StringArray, UInt32Array, UInt64Array,
};
use arrow_schema::{DataType, SchemaRef};
use parquet::arrow::arrow_reader::ParquetRecordBatchReaderBuilder;
use parquet::arrow::ArrowWriter;
use parquet::basic::{Compression, ZstdLevel};
use parquet::file::metadata::KeyValue;
use parquet::file::properties::WriterProperties;
use parquet::file::reader::{FileReader, SerializedFileReader};

use crate::error::{Error, Result};

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const META_SOURCE: &str = "scilake.source";
pub const META_VERSION: &str = "scilake.version";

/// Location of a logical table such as `xref/doi_map`.
pub fn table_file(root: &Path, table: &str) -> PathBuf {
    root.join(format!("{table}.parquet"))
}

/// Streaming Parquet writer for one output table.
pub struct ParquetSink {
    writer: ArrowWriter<File>,
    tmp: PathBuf,
    dest: PathBuf,
}

impl ParquetSink {
    pub fn create(path: &Path, schema: SchemaRef, source: &str) -> Result<Self> {
        Self::create_with_metadata(path, schema, source, &[])
    }

    pub fn create_with_metadata(
        path: &Path,
        schema: SchemaRef,
        source: &str,
        extra: &[(&str, String)],
    ) -> Result<Self> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let tmp = path.with_extension("parquet.tmp");
        let file = File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;

        let mut kv = vec![
            KeyValue::new(META_SOURCE.to_string(), source.to_string()),
            KeyValue::new(META_VERSION.to_string(), TOOLKIT_VERSION.to_string()),
        ];
        kv.extend(
            extra
                .iter()
                .map(|(k, v)| KeyValue::new(k.to_string(), v.clone())),
        );
        let props = WriterProperties::builder()
            .set_compression(Compression::ZSTD(ZstdLevel::default()))
            .set_created_by(format!("scilake {TOOLKIT_VERSION}"))
            .set_key_value_metadata(Some(kv))
            .build();
        let writer = ArrowWriter::try_new(file, schema, Some(props))?;
        Ok(Self {
            writer,
            tmp,
            dest: path.to_path_buf(),
        })
    }

    pub fn write(&mut self, batch: &RecordBatch) -> Result<()> {
        self.writer.write(batch)?;
        Ok(())
    }

    pub fn finish(self) -> Result<()> {
        self.writer.close()?;
        fs::rename(&self.tmp, &self.dest).map_err(|e| Error::io(&self.dest, e))?;
        Ok(())
    }
}

/// Write a single batch as a complete table.
pub fn write_batch(path: &Path, batch: &RecordBatch, source: &str) -> Result<()> {
    let mut sink = ParquetSink::create(path, batch.schema(), source)?;
    sink.write(batch)?;
    sink.finish()
}

/// Read a whole table into one batch.
pub fn read_table(path: &Path) -> Result<RecordBatch> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let builder = ParquetRecordBatchReaderBuilder::try_new(file)?;
    let schema = builder.schema().clone();
    let reader = builder.with_batch_size(64 * 1024).build()?;
    let batches = reader.collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(arrow_select::concat::concat_batches(&schema, &batches)?)
}

/// File-level key/value metadata.
pub fn read_metadata(path: &Path) -> Result<BTreeMap<String, String>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = SerializedFileReader::new(file)?;
    let mut out = BTreeMap::new();
    if let Some(kv) = reader.metadata().file_metadata().key_value_metadata() {
        for entry in kv {
            if let Some(v) = &entry.value {
                out.insert(entry.key.clone(), v.clone());
            }
        }
    }
    Ok(out)
}

/// Row count from the footer, without decoding pages.
pub fn row_count(path: &Path) -> Result<u64> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = SerializedFileReader::new(file)?;
    Ok(reader.metadata().file_metadata().num_rows().max(0) as u64)
}

pub fn column<'a>(batch: &'a RecordBatch, table: &str, name: &str) -> Result<&'a ArrayRef> {
    batch
        .column_by_name(name)
        .ok_or_else(|| Error::MissingColumn {
            table: table.to_string(),
            column: name.to_string(),
        })
}

macro_rules! downcast {
    ($arr:expr, $ty:ty) => {
        $arr.as_any().downcast_ref::<$ty>().expect("data type checked")
    };
}

/// Column values rendered as strings; numbers and booleans are formatted.
pub fn strings(array: &dyn Array) -> Result<Vec<Option<String>>> {
    let n = array.len();
    let get = |i: usize, f: &dyn Fn(usize) -> String| {
        if array.is_null(i) {
            None
        } else {
            Some(f(i))
        }
    };
    let out = match array.data_type() {
        DataType::Utf8 => {
            let a = downcast!(array, StringArray);
            (0..n).map(|i| get(i, &|i| a.value(i).to_string())).collect()
        }
        DataType::LargeUtf8 => {
            let a = downcast!(array, LargeStringArray);
            (0..n).map(|i| get(i, &|i| a.value(i).to_string())).collect()
        }
        DataType::Int64 => {
            let a = downcast!(array, Int64Array);
            (0..n).map(|i| get(i, &|i| a.value(i).to_string())).collect()
        }
        DataType::Int32 => {
            let a = downcast!(array, Int32Array);
            (0..n).map(|i| get(i, &|i| a.value(i).to_string())).collect()
        }
        DataType::UInt64 => {
            let a = downcast!(array, UInt64Array);
            (0..n).map(|i| get(i, &|i| a.value(i).to_string())).collect()
        }
        DataType::Float64 => {
            let a = downcast!(array, Float64Array);
            (0..n).map(|i| get(i, &|i| a.value(i).to_string())).collect()
        }
        DataType::Boolean => {
            let a = downcast!(array, BooleanArray);
            (0..n).map(|i| get(i, &|i| a.value(i).to_string())).collect()
        }
        other => {
            return Err(Error::invalid(format!(
                "cannot read {other} column as strings"
            )))
        }
    };
    Ok(out)
}

/// Integer view of a column; string cells are parsed, unparsable cells are null.
pub fn i64s(array: &dyn Array) -> Result<Vec<Option<i64>>> {
    let n = array.len();
    let out = match array.data_type() {
        DataType::Int64 => {
            let a = downcast!(array, Int64Array);
            (0..n).map(|i| a.is_valid(i).then(|| a.value(i))).collect()
        }
        DataType::Int32 => {
            let a = downcast!(array, Int32Array);
            (0..n)
                .map(|i| a.is_valid(i).then(|| a.value(i) as i64))
                .collect()
        }
        DataType::UInt32 => {
            let a = downcast!(array, UInt32Array);
            (0..n)
                .map(|i| a.is_valid(i).then(|| a.value(i) as i64))
                .collect()
        }
        DataType::UInt64 => {
            let a = downcast!(array, UInt64Array);
            (0..n)
                .map(|i| {
                    a.is_valid(i)
                        .then(|| i64::try_from(a.value(i)).ok())
                        .flatten()
                })
                .collect()
        }
        DataType::Float64 => {
            let a = downcast!(array, Float64Array);
            (0..n)
                .map(|i| {
                    let v = a.value(i);
                    (a.is_valid(i) && v.fract() == 0.0 && v.is_finite()).then_some(v as i64)
                })
                .collect()
        }
        DataType::Utf8 | DataType::LargeUtf8 => strings(array)?
            .into_iter()
            .map(|s| s.and_then(|s| parse_i64(&s)))
            .collect(),
        other => {
            return Err(Error::invalid(format!(
                "cannot read {other} column as integers"
            )))
        }
    };
    Ok(out)
}

fn parse_i64(s: &str) -> Option<i64> {
    let s = s.trim();
    s.parse::<i64>().ok().or_else(|| {
        let f = s.parse::<f64>().ok()?;
        (f.is_finite() && f.fract() == 0.0).then_some(f as i64)
    })
}

/// Real view of a column; string cells are parsed, unparsable or non-finite cells are null.
pub fn f64s(array: &dyn Array) -> Result<Vec<Option<f64>>> {
    let n = array.len();
    let out: Vec<Option<f64>> = match array.data_type() {
        DataType::Float64 => {
            let a = downcast!(array, Float64Array);
            (0..n).map(|i| a.is_valid(i).then(|| a.value(i))).collect()
        }
        DataType::Float32 => {
            let a = downcast!(array, Float32Array);
            (0..n)
                .map(|i| a.is_valid(i).then(|| a.value(i) as f64))
                .collect()
        }
        DataType::Int64 | DataType::Int32 | DataType::UInt32 | DataType::UInt64 => i64s(array)?
            .into_iter()
            .map(|v| v.map(|v| v as f64))
            .collect(),
        DataType::Utf8 | DataType::LargeUtf8 => strings(array)?
            .into_iter()
            .map(|s| s.and_then(|s| s.trim().parse::<f64>().ok()))
            .collect(),
        other => {
            return Err(Error::invalid(format!(
                "cannot read {other} column as reals"
            )))
        }
    };
    Ok(out
        .into_iter()
        .map(|v: Option<f64>| v.filter(|x| x.is_finite()))
        .collect())
}

pub fn bools(array: &dyn Array) -> Result<Vec<Option<bool>>> {
    let n = array.len();
    match array.data_type() {
        DataType::Boolean => {
            let a = downcast!(array, BooleanArray);
            Ok((0..n).map(|i| a.is_valid(i).then(|| a.value(i))).collect())
        }
        DataType::Utf8 | DataType::LargeUtf8 => Ok(strings(array)?
            .into_iter()
            .map(|s| match s.as_deref().map(str::trim) {
                Some("true") | Some("1") => Some(true),
                Some("false") | Some("0") => Some(false),
                _ => None,
            })
            .collect()),
        other => Err(Error::invalid(format!(
            "cannot read {other} column as booleans"
        ))),
    }
}

pub fn string_column(batch: &RecordBatch, table: &str, name: &str) -> Result<Vec<Option<String>>> {
    strings(column(batch, table, name)?.as_ref())
}

pub fn i64_column(batch: &RecordBatch, table: &str, name: &str) -> Result<Vec<Option<i64>>> {
    i64s(column(batch, table, name)?.as_ref())
}

pub fn f64_column(batch: &RecordBatch, table: &str, name: &str) -> Result<Vec<Option<f64>>> {
    f64s(column(batch, table, name)?.as_ref())
}

pub fn bool_column(batch: &RecordBatch, table: &str, name: &str) -> Result<Vec<Option<bool>>> {
    bools(column(batch, table, name)?.as_ref())
}

/// Builders for the common column shapes.
pub fn utf8<I, S>(values: I) -> ArrayRef
where
    I: IntoIterator<Item = Option<S>>,
    S: AsRef<str>,
{
    Arc::new(values.into_iter().collect::<StringArray>())
}

pub fn int64(values: impl IntoIterator<Item = Option<i64>>) -> ArrayRef {
    Arc::new(values.into_iter().collect::<Int64Array>())
}

pub fn float64(values: impl IntoIterator<Item = Option<f64>>) -> ArrayRef {
    Arc::new(values.into_iter().collect::<Float64Array>())
}

pub fn boolean(values: impl IntoIterator<Item = Option<bool>>) -> ArrayRef {
    Arc::new(values.into_iter().collect::<BooleanArray>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use arrow_schema::{Field, Schema};

    #[test]
    fn write_then_read_with_metadata() {
        let dir = tempfile::tempdir().unwrap();
        let path = table_file(dir.path(), "x/t");
        let schema = Arc::new(Schema::new(vec![
            Field::new("a", DataType::Utf8, true),
            Field::new("b", DataType::Int64, true),
        ]));
        let batch = RecordBatch::try_new(
            schema,
            vec![utf8([Some("x"), None]), int64([Some(1), Some(2)])],
        )
        .unwrap();
        write_batch(&path, &batch, "unit").unwrap();

        let back = read_table(&path).unwrap();
        assert_eq!(back.num_rows(), 2);
        assert_eq!(
            string_column(&back, "t", "a").unwrap(),
            vec![Some("x".to_string()), None]
        );
        let meta = read_metadata(&path).unwrap();
        assert_eq!(meta[META_SOURCE], "unit");
        assert_eq!(meta[META_VERSION], TOOLKIT_VERSION);
        assert_eq!(row_count(&path).unwrap(), 2);
        assert!(!path.with_extension("parquet.tmp").exists());
    }

    #[test]
    fn string_cells_parse_as_numbers() {
        let arr = utf8([Some(" 12 "), Some("3.0"), Some("x"), None]);
        assert_eq!(i64s(arr.as_ref()).unwrap(), vec![Some(12), Some(3), None, None]);
        let arr = utf8([Some("0.5"), Some("inf"), Some("")]);
        assert_eq!(f64s(arr.as_ref()).unwrap(), vec![Some(0.5), None, None]);
    }

    #[test]
    fn missing_column_is_named() {
        let batch = RecordBatch::try_new(
            Arc::new(Schema::new(vec![Field::new("a", DataType::Int64, true)])),
            vec![int64([Some(1)])],
        )
        .unwrap();
        let err = string_column(&batch, "works", "doi").unwrap_err();
        assert_eq!(err.to_string(), "works: missing column doi");
    }
}
