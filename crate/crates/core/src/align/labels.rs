//! Matchable strings of one ontology.

use crate::ingest::OntologyTerm;
use crate::scalar::Real;

use super::text::normalize_label;
use super::types::{Method, Mapping, Topic};

#[derive(Debug, Clone, PartialEq)]
pub struct LabelString {
    /// Index into [`LabelIndex::term_ids`].
    pub term: usize,
    /// Position within the term's label-then-synonyms list.
    pub ordinal: usize,
    pub text: String,
    pub key: String,
}

/// Label and synonyms of every live term, normalized once.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelIndex {
    pub ontology: String,
    pub term_ids: Vec<String>,
    pub strings: Vec<LabelString>,
}

impl LabelIndex {
    /// Obsolete terms and strings that normalize to nothing are left out.
    pub fn new(ontology: &str, terms: &[OntologyTerm]) -> Self {
        let mut term_ids = Vec::new();
        let mut strings = Vec::new();
        for t in terms.iter().filter(|t| !t.obsolete) {
            let term = term_ids.len();
            term_ids.push(t.term_id.clone());
            for (ordinal, text) in t.strings().enumerate() {
                let key = normalize_label(text);
                if !key.is_empty() {
                    strings.push(LabelString {
                        term,
                        ordinal,
                        text: text.to_string(),
                        key,
                    });
                }
            }
        }
        Self {
            ontology: ontology.to_string(),
            term_ids,
            strings,
        }
    }

    pub fn len(&self) -> usize {
        self.strings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strings.is_empty()
    }

    pub fn mapping(&self, topic: &Topic, hit: &Hit<impl Real>, method: Method) -> Mapping {
        let s = &self.strings[hit.string];
        Mapping {
            topic_id: topic.topic_id.clone(),
            term_id: self.term_ids[s.term].clone(),
            ontology: self.ontology.clone(),
            similarity: hit.score.to_f64_lossy().clamp(0.0, 1.0),
            method,
            tier: None,
            matched_text: s.text.clone(),
        }
    }

    /// Collapse per-string scores to the best string per term.
    ///
    /// Ties keep the earlier string. Output is ordered by term index.
    pub fn best_per_term<T: Real>(&self, scores: impl IntoIterator<Item = (usize, T)>) -> Vec<Hit<T>> {
        let mut best: Vec<Option<Hit<T>>> = vec![None; self.term_ids.len()];
        for (string, score) in scores {
            let term = self.strings[string].term;
            match &best[term] {
                Some(h) if h.score > score || (h.score == score && h.string < string) => {}
                _ => best[term] = Some(Hit { string, score }),
            }
        }
        best.into_iter().flatten().collect()
    }

    pub fn term_of(&self, hit: &Hit<impl Real>) -> &str {
        &self.term_ids[self.strings[hit.string].term]
    }
}

/// Score of one label string.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit<T> {
    pub string: usize,
    pub score: T,
}

/// Stable id of a term string in the labels table and in vector files.
pub fn term_label_id(ontology: &str, term_id: &str, ordinal: usize) -> String {
    format!("{ontology}|{term_id}|{ordinal}")
}

/// Keep the `k` best hits, highest score first, ties by term id.
pub fn top_k<T: Real>(index: &LabelIndex, hits: &mut Vec<Hit<T>>, k: Option<usize>) {
    hits.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| index.term_of(a).cmp(index.term_of(b)))
    });
    if let Some(k) = k {
        hits.truncate(k);
    }
}
