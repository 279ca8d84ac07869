//! Source dumps to typed columnar tables.
//!
//! JSON Lines get a discovered schema, CSV stays untyped, and ontology files
//! (OBO, SKOS N-Triples, term CSV) become `*_terms` / `*_hierarchy` /
//! `*_xrefs` tables.

mod csv;
mod jsonl;
mod ntriples;
mod obo;
mod schema;
mod table;
mod terms;

pub use self::csv::{convert_csv, CsvOptions};
pub use jsonl::{canonical_json, convert_jsonl, JsonlOptions};
pub use ntriples::{
    parse_line as parse_ntriples_line, parse_skos_ntriples, parse_skos_reader, Node, Triple,
    SKOS_ALT_LABEL, SKOS_BROADER, SKOS_PREF_LABEL,
};
pub use obo::{parse_obo, parse_obo_reader};
pub use schema::{
    discover_schema, discover_schema_file, ColumnDef, ColumnType, Discovery, TableSchema,
    DEFAULT_SAMPLE_SIZE, NESTED_MARKER,
};
pub use table::{read_rows, Cell, ConversionReport};
pub use terms::{
    ontology_table, parse_ontology, parse_term_csv, read_terms, terms_batch, write_ontology,
    HierarchyEdge, OntologyFormat, OntologyParse, OntologyTerm, TermXref,
};
