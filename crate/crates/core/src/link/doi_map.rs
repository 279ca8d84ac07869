use std::path::Path;
use std::sync::Arc;

use arrow_array::RecordBatch;
use arrow_schema::{DataType, Field, Schema};
use rayon::prelude::*;
use serde::Serialize;

use super::doi::Doi;
use super::registry::SourceTable;
use crate::error::Result;
use crate::lake;

/// One linked source record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DoiMapEntry {
    pub doi: Doi,
    /// Index into [`DoiMap::sources`].
    pub source: usize,
    pub native_id: String,
    /// Row of the record in its source table.
    pub row: usize,
}

/// Per-source tally of the normalization pass.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SourceLinkReport {
    pub source: String,
    pub records: u64,
    pub linked: u64,
    /// Records whose DOI was empty or did not normalize.
    pub excluded: u64,
}

/// Union of all sources' normalized DOIs, sorted by `(doi, source, row)`.
#[derive(Debug, Clone, Default)]
pub struct DoiMap {
    pub sources: Vec<String>,
    pub entries: Vec<DoiMapEntry>,
    pub report: Vec<SourceLinkReport>,
}

impl DoiMap {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn schema() -> Arc<Schema> {
        Arc::new(Schema::new(vec![
            Field::new("doi", DataType::Utf8, false),
            Field::new("source", DataType::Utf8, false),
            Field::new("native_id", DataType::Utf8, false),
        ]))
    }

    pub fn to_batch(&self) -> Result<RecordBatch> {
        Ok(RecordBatch::try_new(
            Self::schema(),
            vec![
                lake::utf8(self.entries.iter().map(|e| Some(e.doi.as_str()))),
                lake::utf8(self.entries.iter().map(|e| Some(&self.sources[e.source]))),
                lake::utf8(self.entries.iter().map(|e| Some(&e.native_id))),
            ],
        )?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        lake::write_batch(path, &self.to_batch()?, "xref")
    }
}

/// A `doi_map` row as read back from disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DoiMapRow {
    pub doi: String,
    pub source: String,
    pub native_id: String,
}

pub fn read_doi_map(path: &Path) -> Result<Vec<DoiMapRow>> {
    let batch = lake::read_table(path)?;
    let dois = lake::string_column(&batch, "doi_map", "doi")?;
    let sources = lake::string_column(&batch, "doi_map", "source")?;
    let ids = lake::string_column(&batch, "doi_map", "native_id")?;
    Ok(dois
        .into_iter()
        .zip(sources)
        .zip(ids)
        .map(|((d, s), i)| DoiMapRow {
            doi: d.unwrap_or_default(),
            source: s.unwrap_or_default(),
            native_id: i.unwrap_or_default(),
        })
        .collect())
}

/// Normalize every source's DOI column and union the results.
pub fn build_doi_map(sources: &[SourceTable]) -> Result<DoiMap> {
    let per_source: Vec<(Vec<DoiMapEntry>, SourceLinkReport)> = sources
        .par_iter()
        .enumerate()
        .map(|(idx, table)| {
            let dois = table.strings(&table.spec.doi_column)?;
            let ids = match &table.spec.id_column {
                Some(col) => Some(table.strings(col)?),
                None => None,
            };
            let mut entries = Vec::with_capacity(dois.len());
            for (row, raw) in dois.iter().enumerate() {
                if let Some(doi) = raw.as_deref().and_then(Doi::normalize) {
                    let native_id = match &ids {
                        Some(ids) => ids[row].clone().unwrap_or_default(),
                        None => row.to_string(),
                    };
                    entries.push(DoiMapEntry {
                        doi,
                        source: idx,
                        native_id,
                        row,
                    });
                }
            }
            let report = SourceLinkReport {
                source: table.spec.name.clone(),
                records: dois.len() as u64,
                linked: entries.len() as u64,
                excluded: (dois.len() - entries.len()) as u64,
            };
            Ok((entries, report))
        })
        .collect::<Result<_>>()?;

    let names: Vec<String> = sources.iter().map(|s| s.spec.name.clone()).collect();
    let mut rank: Vec<usize> = (0..names.len()).collect();
    rank.sort_by(|&a, &b| names[a].cmp(&names[b]));
    let mut name_rank = vec![0; names.len()];
    for (r, &i) in rank.iter().enumerate() {
        name_rank[i] = r;
    }

    let mut report = Vec::with_capacity(per_source.len());
    let mut entries = Vec::new();
    for (e, r) in per_source {
        entries.extend(e);
        report.push(r);
    }
    entries.par_sort_unstable_by(|a, b| {
        a.doi
            .cmp(&b.doi)
            .then(name_rank[a.source].cmp(&name_rank[b.source]))
            .then(a.row.cmp(&b.row))
    });
    Ok(DoiMap {
        sources: names,
        entries,
        report,
    })
}
