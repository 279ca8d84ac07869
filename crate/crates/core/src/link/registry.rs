use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use arrow_array::RecordBatch;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lake;

/// The six sources that carry a coverage flag in `unified_papers`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coverage {
    S2ag,
    Openalex,
    Sciscinet,
    Pwc,
    Retraction,
    Patent,
}

impl Coverage {
    pub const ALL: [Coverage; 6] = [
        Coverage::S2ag,
        Coverage::Openalex,
        Coverage::Sciscinet,
        Coverage::Pwc,
        Coverage::Retraction,
        Coverage::Patent,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Coverage::S2ag => "s2ag",
            Coverage::Openalex => "openalex",
            Coverage::Sciscinet => "sciscinet",
            Coverage::Pwc => "pwc",
            Coverage::Retraction => "retraction",
            Coverage::Patent => "patent",
        }
    }

    /// Column name of the flag, e.g. `has_openalex`.
    pub fn flag_column(self) -> &'static str {
        match self {
            Coverage::S2ag => "has_s2ag",
            Coverage::Openalex => "has_openalex",
            Coverage::Sciscinet => "has_sciscinet",
            Coverage::Pwc => "has_pwc",
            Coverage::Retraction => "has_retraction",
            Coverage::Patent => "has_patent",
        }
    }

    /// Sources whose citation counts are kept side by side.
    pub fn citation_column(self) -> Option<&'static str> {
        match self {
            Coverage::S2ag => Some("citations_s2ag"),
            Coverage::Openalex => Some("citations_openalex"),
            Coverage::Sciscinet => Some("citations_sciscinet"),
            _ => None,
        }
    }
}

impl fmt::Display for Coverage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Coverage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "s2ag" => Coverage::S2ag,
            "openalex" => Coverage::Openalex,
            "sciscinet" => Coverage::Sciscinet,
            "pwc" => Coverage::Pwc,
            "retraction" | "retwatch" => Coverage::Retraction,
            "patent" | "ros" => Coverage::Patent,
            other => return Err(Error::Config(format!("unknown coverage source {other}"))),
        })
    }
}

/// How one source table takes part in linkage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    pub name: String,
    /// Coverage flag fed by this source; defaults to the one named like the source.
    #[serde(default)]
    pub coverage: Option<Coverage>,
    /// Lake-relative table, e.g. `openalex/works`.
    pub table_path: String,
    pub doi_column: String,
    #[serde(default)]
    pub id_column: Option<String>,
    #[serde(default)]
    pub id_pattern: Option<String>,
    #[serde(default)]
    pub year_column: Option<String>,
    #[serde(default)]
    pub citation_column: Option<String>,
    #[serde(default)]
    pub fwci_column: Option<String>,
    #[serde(default)]
    pub cd5_column: Option<String>,
    #[serde(default)]
    pub extra_columns: Vec<String>,
}

impl SourceSpec {
    pub fn new(name: &str, table_path: &str, doi_column: &str) -> Self {
        Self {
            name: name.to_string(),
            coverage: None,
            table_path: table_path.to_string(),
            doi_column: doi_column.to_string(),
            id_column: None,
            id_pattern: None,
            year_column: None,
            citation_column: None,
            fwci_column: None,
            cd5_column: None,
            extra_columns: Vec::new(),
        }
    }

    pub fn coverage(&self) -> Result<Coverage> {
        match self.coverage {
            Some(c) => Ok(c),
            None => self.name.parse().map_err(|_| {
                Error::Config(format!(
                    "source {}: no coverage flag given and the name is not one of s2ag, openalex, sciscinet, pwc, retraction, patent",
                    self.name
                ))
            }),
        }
    }

    /// Columns the table must provide.
    pub fn required_columns(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.doi_column.as_str())
            .chain(self.id_column.as_deref())
            .chain(self.year_column.as_deref())
            .chain(self.citation_column.as_deref())
            .chain(self.fwci_column.as_deref())
            .chain(self.cd5_column.as_deref())
            .chain(self.extra_columns.iter().map(String::as_str))
    }
}

/// Check registry-level invariants: unique names, one source per coverage flag.
pub fn validate_registry(registry: &[SourceSpec]) -> Result<()> {
    let mut names = HashSet::new();
    let mut flags = HashSet::new();
    for spec in registry {
        if !names.insert(spec.name.as_str()) {
            return Err(Error::Config(format!("duplicate source {}", spec.name)));
        }
        let cov = spec.coverage()?;
        if !flags.insert(cov) {
            return Err(Error::Config(format!(
                "source {}: coverage {cov} already provided by another source",
                spec.name
            )));
        }
        if let Some(p) = &spec.id_pattern {
            regex::Regex::new(p)
                .map_err(|e| Error::Config(format!("source {}: id_pattern: {e}", spec.name)))?;
        }
    }
    Ok(())
}

/// A source spec with its table loaded.
#[derive(Debug, Clone)]
pub struct SourceTable {
    pub spec: SourceSpec,
    pub coverage: Coverage,
    pub batch: RecordBatch,
}

impl SourceTable {
    pub fn load(lake_root: &Path, spec: &SourceSpec) -> Result<Self> {
        let path = lake::table_file(lake_root, &spec.table_path);
        if !path.exists() {
            return Err(Error::MissingTable {
                source_name: spec.name.clone(),
                path,
            });
        }
        let batch = lake::read_table(&path)?;
        for col in spec.required_columns() {
            lake::column(&batch, &spec.name, col)?;
        }
        Ok(Self {
            coverage: spec.coverage()?,
            spec: spec.clone(),
            batch,
        })
    }

    pub fn strings(&self, column: &str) -> Result<Vec<Option<String>>> {
        lake::string_column(&self.batch, &self.spec.name, column)
    }
}

pub fn load_sources(lake_root: &Path, registry: &[SourceSpec]) -> Result<Vec<SourceTable>> {
    validate_registry(registry)?;
    registry
        .iter()
        .map(|spec| SourceTable::load(lake_root, spec))
        .collect()
}
