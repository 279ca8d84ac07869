//! Machine-readable reference of every table in a lake.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::path::Path;

use parquet::arrow::arrow_reader::ParquetRecordBatchReaderBuilder;
use serde::Serialize;

use crate::error::{Error, Result};

/// Column names used to join tables across schemas.
pub const JOIN_KEYS: [&str; 2] = ["doi", "topic_id"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SizeTier {
    #[serde(rename = "<1MB")]
    Small,
    #[serde(rename = "1MB-1GB")]
    Medium,
    #[serde(rename = ">1GB")]
    Large,
}

impl SizeTier {
    pub fn of(bytes: u64) -> Self {
        const MB: u64 = 1 << 20;
        const GB: u64 = 1 << 30;
        match bytes {
            b if b < MB => SizeTier::Small,
            b if b <= GB => SizeTier::Medium,
            _ => SizeTier::Large,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SizeTier::Small => "<1MB",
            SizeTier::Medium => "1MB-1GB",
            SizeTier::Large => ">1GB",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColumnEntry {
    pub name: String,
    pub data_type: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableEntry {
    pub name: String,
    pub bytes: u64,
    pub size_tier: SizeTier,
    /// `None` when the file could not be read.
    pub rows: Option<u64>,
    pub columns: Vec<ColumnEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemaSection {
    pub schema: String,
    pub tables: Vec<TableEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JoinKey {
    pub key: String,
    /// `schema.table` names carrying the column.
    pub tables: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemaReport {
    pub schemas: Vec<SchemaSection>,
    pub joins: Vec<JoinKey>,
}

fn describe(path: &Path) -> Option<(u64, Vec<ColumnEntry>)> {
    let file = File::open(path).ok()?;
    let builder = ParquetRecordBatchReaderBuilder::try_new(file).ok()?;
    let rows = builder.metadata().file_metadata().num_rows();
    let columns = builder
        .schema()
        .fields()
        .iter()
        .map(|f| ColumnEntry {
            name: f.name().clone(),
            data_type: f.data_type().to_string(),
        })
        .collect();
    Some((u64::try_from(rows).ok()?, columns))
}

/// A directory is a schema when it holds nothing but Parquet tables;
/// report and evaluation directories are therefore left out.
pub fn schema_report(lake_root: &Path) -> Result<SchemaReport> {
    let mut sections = BTreeMap::new();
    let entries = std::fs::read_dir(lake_root).map_err(|e| Error::io(lake_root, e))?;
    for entry in entries {
        let dir = entry.map_err(|e| Error::io(lake_root, e))?.path();
        if !dir.is_dir() {
            continue;
        }
        let mut files = Vec::new();
        let mut only_tables = true;
        for f in std::fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
            let p = f.map_err(|e| Error::io(&dir, e))?.path();
            if p.extension().is_some_and(|x| x == "parquet") && p.is_file() {
                files.push(p);
            } else {
                only_tables = false;
            }
        }
        if !only_tables {
            continue;
        }
        files.sort();
        let mut tables = Vec::with_capacity(files.len());
        for p in files {
            let bytes = std::fs::metadata(&p).map_err(|e| Error::io(&p, e))?.len();
            let described = describe(&p);
            if described.is_none() {
                tracing::warn!(path = %p.display(), "unreadable table");
            }
            let (rows, columns) = match described {
                Some((r, c)) => (Some(r), c),
                None => (None, Vec::new()),
            };
            tables.push(TableEntry {
                name: p.file_stem().unwrap_or_default().to_string_lossy().into_owned(),
                bytes,
                size_tier: SizeTier::of(bytes),
                rows,
                columns,
            });
        }
        let schema = dir.file_name().unwrap_or_default().to_string_lossy().into_owned();
        sections.insert(schema.clone(), SchemaSection { schema, tables });
    }
    if sections.values().all(|s| s.tables.is_empty()) {
        return Err(Error::invalid(format!("{}: lake holds no tables", lake_root.display())));
    }
    let schemas: Vec<SchemaSection> = sections.into_values().collect();
    let joins = JOIN_KEYS
        .iter()
        .map(|k| JoinKey {
            key: k.to_string(),
            tables: schemas
                .iter()
                .flat_map(|s| {
                    s.tables
                        .iter()
                        .filter(|t| t.columns.iter().any(|c| c.name == *k))
                        .map(|t| format!("{}.{}", s.schema, t.name))
                })
                .collect(),
        })
        .collect();
    Ok(SchemaReport { schemas, joins })
}

pub fn render_text(report: &SchemaReport) -> String {
    let mut s = String::new();
    for section in &report.schemas {
        let _ = writeln!(s, "schema {}", section.schema);
        if section.tables.is_empty() {
            let _ = writeln!(s, "  (empty)");
        }
        for t in &section.tables {
            match t.rows {
                Some(rows) => {
                    let _ = writeln!(s, "  table {} rows={rows} size={}", t.name, t.size_tier.label());
                }
                None => {
                    let _ = writeln!(s, "  table {} unreadable size={}", t.name, t.size_tier.label());
                }
            }
            for c in &t.columns {
                let _ = writeln!(s, "    {}: {}", c.name, c.data_type);
            }
        }
        s.push('\n');
    }
    s.push_str("joins\n");
    for j in &report.joins {
        let _ = writeln!(s, "  {}: {}", j.key, j.tables.join(", "));
    }
    s
}
