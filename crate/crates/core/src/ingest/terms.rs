//! Ontology term tables and the CSV term format.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::Arc;

use arrow_array::builder::{ListBuilder, StringBuilder};
use arrow_array::{Array, BooleanArray, ListArray, RecordBatch};
use arrow_schema::{DataType, Field, Schema};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lake;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OntologyTerm {
    pub term_id: String,
    pub ontology: String,
    pub label: String,
    pub synonyms: Vec<String>,
    pub obsolete: bool,
}

impl OntologyTerm {
    /// Label followed by synonyms.
    pub fn strings(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.label.as_str())
            .chain(self.synonyms.iter().map(String::as_str))
            .filter(|s| !s.is_empty())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HierarchyEdge {
    pub child_id: String,
    pub parent_id: String,
    pub relation: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermXref {
    pub term_id: String,
    pub xref: String,
}

/// Output of any ontology parser.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OntologyParse {
    pub terms: Vec<OntologyTerm>,
    pub edges: Vec<HierarchyEdge>,
    pub xrefs: Vec<TermXref>,
    /// Skipped stanzas, lines or rows by reason.
    pub rejected: BTreeMap<String, u64>,
}

impl OntologyParse {
    pub(crate) fn reject(&mut self, reason: &str) {
        *self.rejected.entry(reason.to_string()).or_default() += 1;
    }

    pub fn rejected_total(&self) -> u64 {
        self.rejected.values().sum()
    }
}

/// Source formats an ontology can be supplied in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OntologyFormat {
    Obo,
    Skos,
    Csv,
}

/// Parse an ontology file in the given format.
pub fn parse_ontology(path: &Path, format: OntologyFormat, ontology: &str) -> Result<OntologyParse> {
    match format {
        OntologyFormat::Obo => super::obo::parse_obo(path, ontology),
        OntologyFormat::Skos => super::ntriples::parse_skos_ntriples(path, ontology),
        OntologyFormat::Csv => parse_term_csv(path, ontology),
    }
}

/// Parse a term CSV with header `id,label[,synonyms][,parents][,obsolete]`.
///
/// `synonyms` and `parents` hold `|`-separated lists; parents become `is_a` edges.
pub fn parse_term_csv(path: &Path, ontology: &str) -> Result<OntologyParse> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::invalid(format!("{}: {other:?}", path.display())),
        })?;
    let headers = reader.headers()?.clone();
    let idx = |name: &str| headers.iter().position(|h| h.trim() == name);
    let id_col = idx("id").ok_or_else(|| Error::MissingColumn {
        table: path.display().to_string(),
        column: "id".into(),
    })?;
    let label_col = idx("label").ok_or_else(|| Error::MissingColumn {
        table: path.display().to_string(),
        column: "label".into(),
    })?;
    let syn_col = idx("synonyms");
    let parent_col = idx("parents").or_else(|| idx("parent"));
    let obsolete_col = idx("obsolete");

    let split = |s: Option<&str>| -> Vec<String> {
        s.unwrap_or("")
            .split('|')
            .map(str::trim)
            .filter(|v| !v.is_empty())
            .map(str::to_string)
            .collect()
    };

    let mut out = OntologyParse::default();
    let mut seen = HashMap::new();
    for rec in reader.records() {
        let rec = match rec {
            Ok(r) if r.len() == headers.len() => r,
            Ok(_) => {
                out.reject("arity");
                continue;
            }
            Err(e) if !matches!(e.kind(), csv::ErrorKind::Io(_)) => {
                out.reject("parse");
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let id = rec.get(id_col).unwrap_or("").trim().to_string();
        if id.is_empty() {
            out.reject("missing_id");
            continue;
        }
        let obsolete = obsolete_col
            .and_then(|c| rec.get(c))
            .is_some_and(|v| matches!(v.trim(), "true" | "1" | "yes"));
        let label = rec.get(label_col).unwrap_or("").trim().to_string();
        if label.is_empty() && !obsolete {
            out.reject("missing_label");
            continue;
        }
        if seen.insert(id.clone(), ()).is_some() {
            out.reject("duplicate_id");
            continue;
        }
        for parent in split(parent_col.and_then(|c| rec.get(c))) {
            if parent != id {
                out.edges.push(HierarchyEdge {
                    child_id: id.clone(),
                    parent_id: parent,
                    relation: "is_a".into(),
                });
            }
        }
        out.terms.push(OntologyTerm {
            term_id: id,
            ontology: ontology.to_string(),
            label,
            synonyms: split(syn_col.and_then(|c| rec.get(c))),
            obsolete,
        });
    }
    Ok(out)
}

fn terms_schema() -> Arc<Schema> {
    Arc::new(Schema::new(vec![
        Field::new("term_id", DataType::Utf8, false),
        Field::new("ontology", DataType::Utf8, false),
        Field::new("label", DataType::Utf8, false),
        Field::new(
            "synonyms",
            DataType::List(Arc::new(Field::new("item", DataType::Utf8, true))),
            false,
        ),
        Field::new("obsolete", DataType::Boolean, false),
    ]))
}

pub fn terms_batch(terms: &[OntologyTerm]) -> Result<RecordBatch> {
    let mut synonyms = ListBuilder::new(StringBuilder::new());
    for t in terms {
        for s in &t.synonyms {
            synonyms.values().append_value(s);
        }
        synonyms.append(true);
    }
    Ok(RecordBatch::try_new(
        terms_schema(),
        vec![
            lake::utf8(terms.iter().map(|t| Some(&t.term_id))),
            lake::utf8(terms.iter().map(|t| Some(&t.ontology))),
            lake::utf8(terms.iter().map(|t| Some(&t.label))),
            Arc::new(synonyms.finish()),
            Arc::new(terms.iter().map(|t| Some(t.obsolete)).collect::<BooleanArray>()),
        ],
    )?)
}

pub fn edges_batch(edges: &[HierarchyEdge]) -> Result<RecordBatch> {
    let schema = Arc::new(Schema::new(vec![
        Field::new("child_id", DataType::Utf8, false),
        Field::new("parent_id", DataType::Utf8, false),
        Field::new("relation", DataType::Utf8, false),
    ]));
    Ok(RecordBatch::try_new(
        schema,
        vec![
            lake::utf8(edges.iter().map(|e| Some(&e.child_id))),
            lake::utf8(edges.iter().map(|e| Some(&e.parent_id))),
            lake::utf8(edges.iter().map(|e| Some(&e.relation))),
        ],
    )?)
}

pub fn xrefs_batch(xrefs: &[TermXref]) -> Result<RecordBatch> {
    let schema = Arc::new(Schema::new(vec![
        Field::new("term_id", DataType::Utf8, false),
        Field::new("xref", DataType::Utf8, false),
    ]));
    Ok(RecordBatch::try_new(
        schema,
        vec![
            lake::utf8(xrefs.iter().map(|x| Some(&x.term_id))),
            lake::utf8(xrefs.iter().map(|x| Some(&x.xref))),
        ],
    )?)
}

/// Table names used for an ontology inside the lake: `<name>/<name>_terms` etc.
pub fn ontology_table(ontology: &str, kind: &str) -> String {
    format!("{ontology}/{ontology}_{kind}")
}

/// Write `*_terms`, `*_hierarchy` and, when present, `*_xrefs`.
pub fn write_ontology(lake_root: &Path, ontology: &str, parse: &OntologyParse) -> Result<()> {
    lake::write_batch(
        &lake::table_file(lake_root, &ontology_table(ontology, "terms")),
        &terms_batch(&parse.terms)?,
        ontology,
    )?;
    lake::write_batch(
        &lake::table_file(lake_root, &ontology_table(ontology, "hierarchy")),
        &edges_batch(&parse.edges)?,
        ontology,
    )?;
    if !parse.xrefs.is_empty() {
        lake::write_batch(
            &lake::table_file(lake_root, &ontology_table(ontology, "xrefs")),
            &xrefs_batch(&parse.xrefs)?,
            ontology,
        )?;
    }
    Ok(())
}

pub fn read_terms(path: &Path) -> Result<Vec<OntologyTerm>> {
    let batch = lake::read_table(path)?;
    let table = path.display().to_string();
    let ids = lake::string_column(&batch, &table, "term_id")?;
    let onts = lake::string_column(&batch, &table, "ontology")?;
    let labels = lake::string_column(&batch, &table, "label")?;
    let obsolete = lake::bool_column(&batch, &table, "obsolete")?;
    let syn = lake::column(&batch, &table, "synonyms")?;
    let syn = syn
        .as_any()
        .downcast_ref::<ListArray>()
        .ok_or_else(|| Error::invalid(format!("{table}: synonyms is not a list")))?;
    (0..batch.num_rows())
        .map(|i| {
            let synonyms = if syn.is_null(i) {
                Vec::new()
            } else {
                lake::strings(syn.value(i).as_ref())?
                    .into_iter()
                    .flatten()
                    .collect()
            };
            Ok(OntologyTerm {
                term_id: ids[i].clone().unwrap_or_default(),
                ontology: onts[i].clone().unwrap_or_default(),
                label: labels[i].clone().unwrap_or_default(),
                synonyms,
                obsolete: obsolete[i].unwrap_or(false),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_terms_with_synonyms_and_parents() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        std::fs::write(
            &p,
            "id,label,synonyms,parents\nA1,Soil science,,\nA2,Soil chemistry,soil chem|chemistry of soils,A1\nA3,,x,\n,orphan,,\nA2,dup,,\n",
        )
        .unwrap();
        let parse = parse_term_csv(&p, "agro").unwrap();
        assert_eq!(parse.terms.len(), 2);
        assert_eq!(parse.terms[1].synonyms, ["soil chem", "chemistry of soils"]);
        assert_eq!(
            parse.edges,
            vec![HierarchyEdge {
                child_id: "A2".into(),
                parent_id: "A1".into(),
                relation: "is_a".into()
            }]
        );
        assert_eq!(parse.rejected["missing_label"], 1);
        assert_eq!(parse.rejected["missing_id"], 1);
        assert_eq!(parse.rejected["duplicate_id"], 1);
    }

    #[test]
    fn term_tables_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let parse = OntologyParse {
            terms: vec![OntologyTerm {
                term_id: "GO:1".into(),
                ontology: "go".into(),
                label: "x".into(),
                synonyms: vec!["y".into(), "z".into()],
                obsolete: false,
            }],
            ..Default::default()
        };
        write_ontology(dir.path(), "go", &parse).unwrap();
        let back = read_terms(&lake::table_file(dir.path(), "go/go_terms")).unwrap();
        assert_eq!(back, parse.terms);
        assert!(lake::table_file(dir.path(), "go/go_hierarchy").exists());
        assert!(!lake::table_file(dir.path(), "go/go_xrefs").exists());
    }

    #[test]
    fn strings_skip_empty_label() {
        let t = OntologyTerm {
            term_id: "x".into(),
            ontology: "o".into(),
            label: String::new(),
            synonyms: vec!["s".into()],
            obsolete: true,
        };
        assert_eq!(t.strings().collect::<Vec<_>>(), ["s"]);
    }
}
