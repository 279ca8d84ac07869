//! `unified_papers`: one row per DOI across all sources.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use arrow_array::{ArrayRef, RecordBatch, UInt32Array};
use arrow_schema::{DataType, Field, Schema};
use serde::Serialize;

use super::doi::Doi;
use super::doi_map::DoiMap;
use super::registry::{Coverage, SourceTable};
use crate::error::{Error, Result};
use crate::lake;

/// Default year precedence when sources disagree.
pub const DEFAULT_YEAR_PRECEDENCE: [&str; 3] = ["openalex", "s2ag", "sciscinet"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnifiedPaper {
    pub doi: String,
    pub year: Option<i64>,
    pub citations_s2ag: Option<i64>,
    pub citations_openalex: Option<i64>,
    pub citations_sciscinet: Option<i64>,
    pub fwci: Option<f64>,
    pub cd5: Option<f64>,
    pub has_s2ag: bool,
    pub has_openalex: bool,
    pub has_sciscinet: bool,
    pub has_pwc: bool,
    pub has_retraction: bool,
    pub has_patent: bool,
}

impl UnifiedPaper {
    pub fn new(doi: impl Into<String>) -> Self {
        Self {
            doi: doi.into(),
            year: None,
            citations_s2ag: None,
            citations_openalex: None,
            citations_sciscinet: None,
            fwci: None,
            cd5: None,
            has_s2ag: false,
            has_openalex: false,
            has_sciscinet: false,
            has_pwc: false,
            has_retraction: false,
            has_patent: false,
        }
    }

    pub fn has(&self, c: Coverage) -> bool {
        match c {
            Coverage::S2ag => self.has_s2ag,
            Coverage::Openalex => self.has_openalex,
            Coverage::Sciscinet => self.has_sciscinet,
            Coverage::Pwc => self.has_pwc,
            Coverage::Retraction => self.has_retraction,
            Coverage::Patent => self.has_patent,
        }
    }

    pub fn set(&mut self, c: Coverage, v: bool) {
        match c {
            Coverage::S2ag => self.has_s2ag = v,
            Coverage::Openalex => self.has_openalex = v,
            Coverage::Sciscinet => self.has_sciscinet = v,
            Coverage::Pwc => self.has_pwc = v,
            Coverage::Retraction => self.has_retraction = v,
            Coverage::Patent => self.has_patent = v,
        }
    }

    pub fn citations(&self, c: Coverage) -> Option<i64> {
        match c {
            Coverage::S2ag => self.citations_s2ag,
            Coverage::Openalex => self.citations_openalex,
            Coverage::Sciscinet => self.citations_sciscinet,
            _ => None,
        }
    }

    fn set_citations(&mut self, c: Coverage, v: Option<i64>) {
        match c {
            Coverage::S2ag => self.citations_s2ag = v,
            Coverage::Openalex => self.citations_openalex = v,
            Coverage::Sciscinet => self.citations_sciscinet = v,
            _ => {}
        }
    }

    pub fn flags(&self) -> [bool; 6] {
        Coverage::ALL.map(|c| self.has(c))
    }
}

/// Counters from materialization.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct UnifiedReport {
    pub rows: u64,
    /// Extra rows per source that shared a DOI with an earlier row.
    pub duplicates: BTreeMap<String, u64>,
    /// CD5 values outside [-1, 1], stored as null.
    pub cd5_out_of_range: u64,
}

#[derive(Debug, Clone)]
pub struct Unified {
    pub papers: Vec<UnifiedPaper>,
    /// Configured pass-through columns, named `<source>_<column>`.
    pub passthrough: Vec<(String, ArrayRef)>,
    pub report: UnifiedReport,
}

struct Columns {
    year: Option<Vec<Option<i64>>>,
    citations: Option<Vec<Option<i64>>>,
    fwci: Option<Vec<Option<f64>>>,
    cd5: Option<Vec<Option<f64>>>,
}

impl Columns {
    fn load(t: &SourceTable) -> Result<Self> {
        let i = |c: &Option<String>| -> Result<Option<Vec<Option<i64>>>> {
            c.as_ref()
                .map(|c| lake::i64_column(&t.batch, &t.spec.name, c))
                .transpose()
        };
        let f = |c: &Option<String>| -> Result<Option<Vec<Option<f64>>>> {
            c.as_ref()
                .map(|c| lake::f64_column(&t.batch, &t.spec.name, c))
                .transpose()
        };
        Ok(Self {
            year: i(&t.spec.year_column)?,
            citations: i(&t.spec.citation_column)?,
            fwci: f(&t.spec.fwci_column)?,
            cd5: f(&t.spec.cd5_column)?,
        })
    }
}

/// Join the DOI map back to its source rows.
///
/// Within a source the first row (in source order) for a DOI wins; later
/// rows only bump the duplicate counter. The year is taken from the first
/// source in `year_precedence` (matched by source name, then by coverage
/// name) that has a non-null value. FWCI and CD5 come from the first source
/// in registry order that provides the column and holds the DOI.
pub fn materialize_unified(
    doi_map: &DoiMap,
    sources: &[SourceTable],
    year_precedence: &[String],
) -> Result<Unified> {
    if doi_map.sources.len() != sources.len()
        || doi_map
            .sources
            .iter()
            .zip(sources)
            .any(|(a, b)| *a != b.spec.name)
    {
        return Err(Error::invalid("doi_map was built from a different registry"));
    }
    let columns = sources.iter().map(Columns::load).collect::<Result<Vec<_>>>()?;

    let mut year_order: Vec<usize> = Vec::new();
    for name in year_precedence {
        let hit = sources
            .iter()
            .position(|s| &s.spec.name == name)
            .or_else(|| sources.iter().position(|s| s.coverage.name() == name));
        if let Some(i) = hit {
            if !year_order.contains(&i) {
                year_order.push(i);
            }
        }
    }

    let mut report = UnifiedReport::default();
    let mut papers = Vec::new();
    let mut picks: Vec<Vec<Option<u32>>> = vec![Vec::new(); sources.len()];
    let mut dup = vec![0u64; sources.len()];

    let entries = &doi_map.entries;
    let mut start = 0;
    while start < entries.len() {
        let doi = &entries[start].doi;
        let mut end = start;
        let mut row_of: Vec<Option<usize>> = vec![None; sources.len()];
        while end < entries.len() && &entries[end].doi == doi {
            let e = &entries[end];
            match row_of[e.source] {
                None => row_of[e.source] = Some(e.row),
                Some(r) if e.row < r => {
                    row_of[e.source] = Some(e.row);
                    dup[e.source] += 1;
                }
                Some(_) => dup[e.source] += 1,
            }
            end += 1;
        }

        let mut paper = UnifiedPaper::new(doi.as_str());
        for (s, row) in row_of.iter().enumerate() {
            let Some(row) = *row else { continue };
            let cov = sources[s].coverage;
            paper.set(cov, true);
            if let Some(c) = &columns[s].citations {
                paper.set_citations(cov, c[row]);
            }
            if paper.fwci.is_none() {
                if let Some(c) = &columns[s].fwci {
                    paper.fwci = c[row];
                }
            }
            if paper.cd5.is_none() {
                if let Some(c) = &columns[s].cd5 {
                    match c[row] {
                        Some(v) if (-1.0..=1.0).contains(&v) => paper.cd5 = Some(v),
                        Some(_) => report.cd5_out_of_range += 1,
                        None => {}
                    }
                }
            }
        }
        paper.year = year_order.iter().find_map(|&s| {
            let row = row_of[s]?;
            columns[s].year.as_ref()?[row]
        });
        for (s, row) in row_of.iter().enumerate() {
            if !sources[s].spec.extra_columns.is_empty() {
                picks[s].push(row.map(|r| r as u32));
            }
        }
        papers.push(paper);
        start = end;
    }

    let mut passthrough = Vec::new();
    for (s, table) in sources.iter().enumerate() {
        if table.spec.extra_columns.is_empty() {
            continue;
        }
        let indices = UInt32Array::from(std::mem::take(&mut picks[s]));
        for col in &table.spec.extra_columns {
            let array = lake::column(&table.batch, &table.spec.name, col)?;
            let taken = arrow_select::take::take(array.as_ref(), &indices, None)?;
            passthrough.push((format!("{}_{}", table.spec.name, col), taken));
        }
    }

    report.rows = papers.len() as u64;
    report.duplicates = sources
        .iter()
        .zip(dup)
        .map(|(s, d)| (s.spec.name.clone(), d))
        .collect();
    Ok(Unified {
        papers,
        passthrough,
        report,
    })
}

fn core_fields() -> Vec<Field> {
    let mut fields = vec![
        Field::new("doi", DataType::Utf8, false),
        Field::new("year", DataType::Int64, true),
        Field::new("citations_s2ag", DataType::Int64, true),
        Field::new("citations_openalex", DataType::Int64, true),
        Field::new("citations_sciscinet", DataType::Int64, true),
        Field::new("fwci", DataType::Float64, true),
        Field::new("cd5", DataType::Float64, true),
    ];
    fields.extend(
        Coverage::ALL
            .iter()
            .map(|c| Field::new(c.flag_column(), DataType::Boolean, false)),
    );
    fields
}

pub fn papers_batch(papers: &[UnifiedPaper], passthrough: &[(String, ArrayRef)]) -> Result<RecordBatch> {
    let mut fields = core_fields();
    let mut columns: Vec<ArrayRef> = vec![
        lake::utf8(papers.iter().map(|p| Some(&p.doi))),
        lake::int64(papers.iter().map(|p| p.year)),
        lake::int64(papers.iter().map(|p| p.citations_s2ag)),
        lake::int64(papers.iter().map(|p| p.citations_openalex)),
        lake::int64(papers.iter().map(|p| p.citations_sciscinet)),
        lake::float64(papers.iter().map(|p| p.fwci)),
        lake::float64(papers.iter().map(|p| p.cd5)),
    ];
    for c in Coverage::ALL {
        columns.push(lake::boolean(papers.iter().map(|p| Some(p.has(c)))));
    }
    for (name, array) in passthrough {
        fields.push(Field::new(name, array.data_type().clone(), true));
        columns.push(array.clone());
    }
    Ok(RecordBatch::try_new(Arc::new(Schema::new(fields)), columns)?)
}

impl Unified {
    pub fn to_batch(&self) -> Result<RecordBatch> {
        papers_batch(&self.papers, &self.passthrough)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        lake::write_batch(path, &self.to_batch()?, "xref")
    }
}

/// Read the core columns of `unified_papers`; pass-through columns are ignored.
pub fn read_unified(path: &Path) -> Result<Vec<UnifiedPaper>> {
    let batch = lake::read_table(path)?;
    let t = "unified_papers";
    let dois = lake::string_column(&batch, t, "doi")?;
    let year = lake::i64_column(&batch, t, "year")?;
    let cs = lake::i64_column(&batch, t, "citations_s2ag")?;
    let co = lake::i64_column(&batch, t, "citations_openalex")?;
    let cn = lake::i64_column(&batch, t, "citations_sciscinet")?;
    let fwci = lake::f64_column(&batch, t, "fwci")?;
    let cd5 = lake::f64_column(&batch, t, "cd5")?;
    let flags = Coverage::ALL
        .iter()
        .map(|c| lake::bool_column(&batch, t, c.flag_column()))
        .collect::<Result<Vec<_>>>()?;
    Ok((0..batch.num_rows())
        .map(|i| {
            let mut p = UnifiedPaper::new(dois[i].clone().unwrap_or_default());
            p.year = year[i];
            p.citations_s2ag = cs[i];
            p.citations_openalex = co[i];
            p.citations_sciscinet = cn[i];
            p.fwci = fwci[i];
            p.cd5 = cd5[i];
            for (c, col) in Coverage::ALL.iter().zip(&flags) {
                p.set(*c, col[i].unwrap_or(false));
            }
            p
        })
        .collect())
}

/// True when every DOI is canonical; used by callers that want a quick gate.
pub fn all_canonical(papers: &[UnifiedPaper]) -> bool {
    papers.iter().all(|p| Doi::is_canonical(&p.doi))
}
