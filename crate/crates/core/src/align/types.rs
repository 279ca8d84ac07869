use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topic {
    pub topic_id: String,
    pub display_name: String,
    pub subfield: String,
    pub field: String,
    pub domain: String,
}

impl Topic {
    pub fn new(topic_id: impl Into<String>, display_name: impl Into<String>) -> Self {
        Self {
            topic_id: topic_id.into(),
            display_name: display_name.into(),
            subfield: String::new(),
            field: String::new(),
            domain: String::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    JaroWinkler,
    Tfidf,
    Bm25,
    Embedding,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Exact,
        Method::JaroWinkler,
        Method::Tfidf,
        Method::Bm25,
        Method::Embedding,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::JaroWinkler => "jaro_winkler",
            Method::Tfidf => "tfidf",
            Method::Bm25 => "bm25",
            Method::Embedding => "embedding",
        }
    }

    pub fn default_threshold(self) -> f64 {
        match self {
            Method::Exact => 1.0,
            Method::JaroWinkler => 0.90,
            Method::Tfidf => 0.65,
            Method::Bm25 => 0.0,
            Method::Embedding => 0.65,
        }
    }

    pub fn default_top_k(self) -> Option<usize> {
        match self {
            Method::Bm25 | Method::Embedding => Some(20),
            _ => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown alignment method {s}")))
    }
}

/// Confidence band of a mapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Exact,
    High,
    All,
}

impl Tier {
    pub const ALL: [Tier; 3] = [Tier::Exact, Tier::High, Tier::All];

    pub fn name(self) -> &'static str {
        match self {
            Tier::Exact => "exact",
            Tier::High => "high",
            Tier::All => "all",
        }
    }

    pub fn lower_bound(self) -> f64 {
        match self {
            Tier::Exact => 0.95,
            Tier::High => 0.85,
            Tier::All => 0.65,
        }
    }
}

impl FromStr for Tier {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Tier::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown tier {s}")))
    }
}

pub fn assign_tier(similarity: f64) -> Option<Tier> {
    Tier::ALL.into_iter().find(|t| similarity >= t.lower_bound())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mapping {
    pub topic_id: String,
    pub term_id: String,
    pub ontology: String,
    pub similarity: f64,
    pub method: Method,
    pub tier: Option<Tier>,
    /// Label or synonym that produced the score.
    pub matched_text: String,
}

impl Mapping {
    pub fn key(&self) -> (&str, &str, &str) {
        (&self.topic_id, &self.term_id, &self.ontology)
    }
}

/// Order used by every mapping table: topic, ontology, best first, term id.
pub fn sort_mappings(mappings: &mut [Mapping]) {
    mappings.sort_by(|a, b| {
        a.topic_id
            .cmp(&b.topic_id)
            .then_with(|| a.ontology.cmp(&b.ontology))
            .then_with(|| b.similarity.total_cmp(&a.similarity))
            .then_with(|| a.term_id.cmp(&b.term_id))
            .then_with(|| a.method.cmp(&b.method))
    });
}
