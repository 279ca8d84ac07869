//! Per-ontology method routing and the alignment tables.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;
use std::sync::Arc;

use arrow_array::RecordBatch;
use arrow_schema::{DataType, Field, Schema};
use serde::{Deserialize, Serialize};

use super::bm25::{bm25_match, Bm25Params};
use super::embed::{nearest_neighbours, EmbeddingSet};
use super::exact::exact_match;
use super::jw::jw_match;
use super::labels::{term_label_id, Hit, LabelIndex};
use super::tfidf::tfidf_match;
use super::types::{assign_tier, sort_mappings, Mapping, Method, Tier, Topic};
use crate::error::{Error, Result};
use crate::ingest::OntologyTerm;
use crate::lake;
use crate::scalar::Real;

pub const TOPIC_ONTOLOGY_MAP: &str = "align/topic_ontology_map";
pub const COVERAGE_SUMMARY: &str = "align/coverage_summary";
pub const LABELS_TOPICS: &str = "align/labels_topics";
pub const LABELS_TERMS: &str = "align/labels_terms";

pub fn candidates_table(method: Method) -> String {
    format!("align/candidates_{}", method.name())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OntologyRoute {
    pub ontology: String,
    pub method: Method,
    #[serde(default)]
    pub threshold: Option<f64>,
    #[serde(default)]
    pub top_k: Option<usize>,
}

impl OntologyRoute {
    pub fn new(ontology: &str, method: Method) -> Self {
        Self {
            ontology: ontology.to_string(),
            method,
            threshold: None,
            top_k: None,
        }
    }

    pub fn threshold(&self) -> f64 {
        self.threshold.unwrap_or(self.method.default_threshold())
    }

    pub fn top_k(&self) -> Option<usize> {
        self.top_k.or(self.method.default_top_k())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MethodRegistry {
    pub routes: Vec<OntologyRoute>,
}

impl MethodRegistry {
    pub fn get(&self, ontology: &str) -> Option<&OntologyRoute> {
        self.routes.iter().find(|r| r.ontology == ontology)
    }

    /// Every ontology must have exactly one route and every route an ontology.
    pub fn validate<'a>(&self, ontologies: impl IntoIterator<Item = &'a str>) -> Result<()> {
        let mut seen = HashSet::new();
        for r in &self.routes {
            if !seen.insert(r.ontology.as_str()) {
                return Err(Error::Config(format!("ontology {} routed twice", r.ontology)));
            }
            if let Some(t) = r.threshold {
                if !(0.0..=1.0).contains(&t) {
                    return Err(Error::Config(format!("ontology {}: threshold {t} outside [0, 1]", r.ontology)));
                }
            }
        }
        let present: HashSet<&str> = ontologies.into_iter().collect();
        for o in &present {
            if !seen.contains(o) {
                return Err(Error::Config(format!("ontology {o} has no method route")));
            }
        }
        for o in &seen {
            if !present.contains(o) {
                return Err(Error::Config(format!("route for unknown ontology {o}")));
            }
        }
        Ok(())
    }

    pub fn needs_vectors(&self) -> bool {
        self.routes.iter().any(|r| r.method == Method::Embedding)
    }
}

/// Topic vectors keyed by topic id and term-string vectors keyed by
/// [`term_label_id`].
#[derive(Debug, Clone)]
pub struct Vectors<T> {
    pub topics: EmbeddingSet<T>,
    pub terms: EmbeddingSet<T>,
}

/// Embedding nearest neighbours of each topic among one ontology's terms.
pub fn embed_nn_match<T: Real>(
    topics: &[Topic],
    index: &LabelIndex,
    vectors: &Vectors<T>,
    threshold: T,
    top_k: Option<usize>,
) -> Result<Vec<Mapping>> {
    let missing = |id: String| Error::InvalidVector {
        id,
        reason: "no vector".into(),
    };
    let topic_ids: Vec<String> = topics.iter().map(|t| t.topic_id.clone()).collect();
    let q = vectors.topics.select(&topic_ids).map_err(missing)?;
    let string_ids: Vec<String> = index
        .strings
        .iter()
        .map(|s| term_label_id(&index.ontology, &index.term_ids[s.term], s.ordinal))
        .collect();
    let c = vectors.terms.select(&string_ids).map_err(missing)?;
    let owners: Vec<usize> = index.strings.iter().map(|s| s.term).collect();
    let ranked = nearest_neighbours(&q, &c, &owners, &index.term_ids, threshold, top_k)?;
    Ok(ranked
        .into_iter()
        .flatten()
        .map(|n| {
            let hit = Hit {
                string: n.row,
                score: n.score,
            };
            index.mapping(&topics[n.query], &hit, Method::Embedding)
        })
        .collect())
}

/// Run one method over one ontology.
pub fn match_ontology<T: Real>(
    method: Method,
    topics: &[Topic],
    index: &LabelIndex,
    threshold: f64,
    top_k: Option<usize>,
    vectors: Option<&Vectors<T>>,
) -> Result<Vec<Mapping>> {
    let t = T::lit(threshold);
    Ok(match method {
        Method::Exact => exact_match(topics, index)
            .into_iter()
            .filter(|m| m.similarity >= threshold)
            .collect(),
        Method::JaroWinkler => jw_match(topics, index, t),
        Method::Tfidf => tfidf_match(topics, index, t, top_k),
        Method::Bm25 => bm25_match(topics, index, Bm25Params::<T>::default(), top_k, t),
        Method::Embedding => {
            let v = vectors.ok_or_else(|| {
                Error::Config(format!(
                    "ontology {} is routed to embeddings but no vector files are configured",
                    index.ontology
                ))
            })?;
            embed_nn_match(topics, index, v, t, top_k)?
        }
    })
}

/// Cumulative mapping and topic counts at or above each tier.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverageRow {
    /// Ontology name, or `all`.
    pub scope: String,
    pub tier: Tier,
    pub n_mappings: u64,
    pub n_topics: u64,
}

pub fn coverage_summary(mappings: &[Mapping]) -> Vec<CoverageRow> {
    let mut scopes: BTreeMap<&str, Vec<&Mapping>> = BTreeMap::new();
    for m in mappings {
        scopes.entry(m.ontology.as_str()).or_default().push(m);
    }
    let mut out = Vec::new();
    let all: Vec<&Mapping> = mappings.iter().collect();
    let mut emit = |scope: &str, ms: &[&Mapping]| {
        for tier in Tier::ALL {
            let within: Vec<&&Mapping> = ms
                .iter()
                .filter(|m| m.tier.is_some_and(|t| t <= tier))
                .collect();
            let topics: BTreeSet<&str> = within.iter().map(|m| m.topic_id.as_str()).collect();
            out.push(CoverageRow {
                scope: scope.to_string(),
                tier,
                n_mappings: within.len() as u64,
                n_topics: topics.len() as u64,
            });
        }
    };
    emit("all", &all);
    for (scope, ms) in &scopes {
        emit(scope, ms);
    }
    out
}

#[derive(Debug, Clone)]
pub struct HybridOutput {
    /// Tiered mappings, sorted; pairs below the lowest tier are dropped.
    pub mappings: Vec<Mapping>,
    pub coverage: Vec<CoverageRow>,
    /// Routed method output before tier filtering, for threshold sweeps.
    pub candidates: Vec<Mapping>,
}

/// Dispatch every ontology to its routed method and merge the results.
///
/// `candidate_floor` lowers each route's threshold for the candidates list.
pub fn run_hybrid<T: Real>(
    topics: &[Topic],
    ontologies: &[(String, Vec<OntologyTerm>)],
    registry: &MethodRegistry,
    vectors: Option<&Vectors<T>>,
    candidate_floor: f64,
) -> Result<HybridOutput> {
    registry.validate(ontologies.iter().map(|(o, _)| o.as_str()))?;
    let mut candidates = Vec::new();
    for (name, terms) in ontologies {
        let route = registry.get(name).expect("validated");
        let index = LabelIndex::new(name, terms);
        let floor = route.threshold().min(candidate_floor);
        let found = match_ontology(route.method, topics, &index, floor, route.top_k(), vectors)?;
        tracing::debug!(ontology = %name, method = %route.method, n = found.len(), "matched");
        candidates.extend(found);
    }
    let mut mappings: Vec<Mapping> = candidates
        .iter()
        .filter(|m| m.similarity >= registry.get(&m.ontology).expect("validated").threshold())
        .filter_map(|m| {
            assign_tier(m.similarity).map(|tier| Mapping {
                tier: Some(tier),
                ..m.clone()
            })
        })
        .collect();
    sort_mappings(&mut mappings);
    sort_mappings(&mut candidates);
    let coverage = coverage_summary(&mappings);
    Ok(HybridOutput {
        mappings,
        coverage,
        candidates,
    })
}

pub fn mappings_batch(mappings: &[Mapping]) -> Result<RecordBatch> {
    let schema = Schema::new(vec![
        Field::new("topic_id", DataType::Utf8, false),
        Field::new("term_id", DataType::Utf8, false),
        Field::new("ontology", DataType::Utf8, false),
        Field::new("similarity", DataType::Float64, false),
        Field::new("method", DataType::Utf8, false),
        Field::new("tier", DataType::Utf8, true),
        Field::new("matched_text", DataType::Utf8, false),
    ]);
    Ok(RecordBatch::try_new(
        Arc::new(schema),
        vec![
            lake::utf8(mappings.iter().map(|m| Some(&m.topic_id))),
            lake::utf8(mappings.iter().map(|m| Some(&m.term_id))),
            lake::utf8(mappings.iter().map(|m| Some(&m.ontology))),
            lake::float64(mappings.iter().map(|m| Some(m.similarity))),
            lake::utf8(mappings.iter().map(|m| Some(m.method.name()))),
            lake::utf8(mappings.iter().map(|m| m.tier.map(Tier::name))),
            lake::utf8(mappings.iter().map(|m| Some(&m.matched_text))),
        ],
    )?)
}

pub fn write_mappings(path: &Path, mappings: &[Mapping]) -> Result<()> {
    lake::write_batch(path, &mappings_batch(mappings)?, "align")
}

pub fn read_mappings(path: &Path) -> Result<Vec<Mapping>> {
    let batch = lake::read_table(path)?;
    let t = "topic_ontology_map";
    let s = |c| lake::string_column(&batch, t, c);
    let (topic, term, onto, method, tier, text) = (
        s("topic_id")?,
        s("term_id")?,
        s("ontology")?,
        s("method")?,
        s("tier")?,
        s("matched_text")?,
    );
    let sim = lake::f64_column(&batch, t, "similarity")?;
    (0..batch.num_rows())
        .map(|i| {
            Ok(Mapping {
                topic_id: topic[i].clone().unwrap_or_default(),
                term_id: term[i].clone().unwrap_or_default(),
                ontology: onto[i].clone().unwrap_or_default(),
                similarity: sim[i].unwrap_or(f64::NAN),
                method: method[i].as_deref().unwrap_or_default().parse()?,
                tier: tier[i].as_deref().map(str::parse).transpose()?,
                matched_text: text[i].clone().unwrap_or_default(),
            })
        })
        .collect()
}

pub fn write_coverage_summary(path: &Path, rows: &[CoverageRow]) -> Result<()> {
    let schema = Schema::new(vec![
        Field::new("scope", DataType::Utf8, false),
        Field::new("tier", DataType::Utf8, false),
        Field::new("n_mappings", DataType::Int64, false),
        Field::new("n_topics", DataType::Int64, false),
    ]);
    let batch = RecordBatch::try_new(
        Arc::new(schema),
        vec![
            lake::utf8(rows.iter().map(|r| Some(&r.scope))),
            lake::utf8(rows.iter().map(|r| Some(r.tier.name()))),
            lake::int64(rows.iter().map(|r| Some(r.n_mappings as i64))),
            lake::int64(rows.iter().map(|r| Some(r.n_topics as i64))),
        ],
    )?;
    lake::write_batch(path, &batch, "align")
}

/// Topics table: `topic_id`, `display_name`, optional `subfield`, `field`, `domain`.
pub fn read_topics(path: &Path) -> Result<Vec<Topic>> {
    let batch = lake::read_table(path)?;
    let t = "topics";
    let ids = lake::string_column(&batch, t, "topic_id")?;
    let names = lake::string_column(&batch, t, "display_name")?;
    let optional = |c: &str| -> Result<Vec<Option<String>>> {
        if batch.schema().index_of(c).is_ok() {
            lake::string_column(&batch, t, c)
        } else {
            Ok(vec![None; batch.num_rows()])
        }
    };
    let (sub, field, domain) = (optional("subfield")?, optional("field")?, optional("domain")?);
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(batch.num_rows());
    for i in 0..batch.num_rows() {
        let id = ids[i].clone().unwrap_or_default();
        let name = names[i].clone().unwrap_or_default();
        if id.is_empty() || name.trim().is_empty() {
            return Err(Error::invalid(format!("topics row {i}: empty topic_id or display_name")));
        }
        if !seen.insert(id.clone()) {
            return Err(Error::invalid(format!("topics: duplicate topic_id {id}")));
        }
        out.push(Topic {
            topic_id: id,
            display_name: name,
            subfield: sub[i].clone().unwrap_or_default(),
            field: field[i].clone().unwrap_or_default(),
            domain: domain[i].clone().unwrap_or_default(),
        });
    }
    Ok(out)
}

/// `(id, text)` rows for topic embedding export.
pub fn labels_topics_batch(topics: &[Topic]) -> Result<RecordBatch> {
    let schema = Schema::new(vec![
        Field::new("id", DataType::Utf8, false),
        Field::new("text", DataType::Utf8, false),
    ]);
    Ok(RecordBatch::try_new(
        Arc::new(schema),
        vec![
            lake::utf8(topics.iter().map(|t| Some(&t.topic_id))),
            lake::utf8(topics.iter().map(|t| Some(&t.display_name))),
        ],
    )?)
}

/// `(id, text, term_id, ontology)` rows, one per matchable term string.
pub fn labels_terms_batch(indexes: &[&LabelIndex]) -> Result<RecordBatch> {
    let rows: Vec<(String, &str, &str, &str)> = indexes
        .iter()
        .flat_map(|idx| {
            idx.strings.iter().map(move |s| {
                let term = idx.term_ids[s.term].as_str();
                (
                    term_label_id(&idx.ontology, term, s.ordinal),
                    s.text.as_str(),
                    term,
                    idx.ontology.as_str(),
                )
            })
        })
        .collect();
    let schema = Schema::new(vec![
        Field::new("id", DataType::Utf8, false),
        Field::new("text", DataType::Utf8, false),
        Field::new("term_id", DataType::Utf8, false),
        Field::new("ontology", DataType::Utf8, false),
    ]);
    Ok(RecordBatch::try_new(
        Arc::new(schema),
        vec![
            lake::utf8(rows.iter().map(|r| Some(&r.0))),
            lake::utf8(rows.iter().map(|r| Some(r.1))),
            lake::utf8(rows.iter().map(|r| Some(r.2))),
            lake::utf8(rows.iter().map(|r| Some(r.3))),
        ],
    )?)
}
