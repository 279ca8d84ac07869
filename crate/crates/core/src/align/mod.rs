//! Topic to ontology-term alignment.

mod bm25;
mod embed;
mod exact;
mod hybrid;
mod jaro;
mod jw;
mod labels;
mod text;
mod tfidf;
mod types;

pub use bm25::{bm25_match, min_max_normalize, Bm25Index, Bm25Params};
pub use embed::{
    nearest_neighbours, read_vectors, write_vectors, EmbeddingSet, Neighbour, DEFAULT_DIMENSION,
    META_DIMENSION,
};
pub use exact::exact_match;
pub use hybrid::{
    candidates_table, coverage_summary, embed_nn_match, labels_terms_batch, labels_topics_batch,
    mappings_batch, match_ontology, read_mappings, read_topics, run_hybrid, write_coverage_summary,
    write_mappings, CoverageRow, HybridOutput, MethodRegistry, OntologyRoute, Vectors,
    COVERAGE_SUMMARY, LABELS_TERMS, LABELS_TOPICS, TOPIC_ONTOLOGY_MAP,
};
pub use jaro::{jaro, jaro_winkler};
pub use jw::jw_match;
pub use labels::{term_label_id, top_k, Hit, LabelIndex, LabelString};
pub use text::normalize_label;
pub use tfidf::{char_wb_ngrams, tfidf_match, TfidfIndex};
pub use types::{assign_tier, sort_mappings, Mapping, Method, Tier, Topic};
