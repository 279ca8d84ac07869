//! Building blocks for a multi-source scholarly data lake.
//!
//! The crate converts source dumps into Parquet tables ([`ingest`]), links
//! records across sources by normalized DOI ([`link`]), aligns a topic
//! taxonomy to ontologies ([`align`]), scores alignments against gold
//! annotations ([`eval`]), and checks the result ([`validate`], [`stats`]).
//! [`pipeline`] strings the stages together for the `scilake` binary.

pub mod align;
pub mod config;
pub mod error;
pub mod eval;
pub mod ingest;
pub mod lake;
pub mod link;
pub mod pipeline;
pub mod scalar;
pub mod schema_report;
pub mod stats;
pub mod synth;
pub mod validate;

pub use error::{Error, Result};
pub use scalar::Real;

pub type EmbeddingSet32 = align::EmbeddingSet<f32>;
pub type EmbeddingSet64 = align::EmbeddingSet<f64>;
pub type Neighbour32 = align::Neighbour<f32>;
pub type Neighbour64 = align::Neighbour<f64>;
pub type TfidfIndex32 = align::TfidfIndex<f32>;
pub type TfidfIndex64 = align::TfidfIndex<f64>;
pub type Bm25Index32 = align::Bm25Index<f32>;
pub type Bm25Index64 = align::Bm25Index<f64>;
pub type Vectors32 = align::Vectors<f32>;
pub type Vectors64 = align::Vectors<f64>;
pub type BlandAltman64 = validate::BlandAltman<f64>;
