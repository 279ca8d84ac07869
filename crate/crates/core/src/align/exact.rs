use std::collections::HashMap;

use rayon::prelude::*;

use super::labels::{Hit, LabelIndex};
use super::text::normalize_label;
use super::types::{Mapping, Method, Topic};

/// Topic/term pairs whose normalized strings are equal; similarity 1.0.
pub fn exact_match(topics: &[Topic], index: &LabelIndex) -> Vec<Mapping> {
    let mut by_key: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, s) in index.strings.iter().enumerate() {
        by_key.entry(s.key.as_str()).or_default().push(i);
    }
    topics
        .par_iter()
        .flat_map_iter(|topic| {
            let key = normalize_label(&topic.display_name);
            let hits = by_key
                .get(key.as_str())
                .map(|v| index.best_per_term(v.iter().map(|&s| (s, 1.0f64))))
                .unwrap_or_default();
            hits.into_iter()
                .map(|h: Hit<f64>| index.mapping(topic, &h, Method::Exact))
                .collect::<Vec<_>>()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::OntologyTerm;

    pub(crate) fn term(id: &str, label: &str, synonyms: &[&str]) -> OntologyTerm {
        OntologyTerm {
            term_id: id.into(),
            ontology: "o".into(),
            label: label.into(),
            synonyms: synonyms.iter().map(|s| s.to_string()).collect(),
            obsolete: false,
        }
    }

    #[test]
    fn case_only_difference_matches() {
        let idx = LabelIndex::new("o", &[term("T1", "machine learning", &[])]);
        let m = exact_match(&[Topic::new("t", "Machine Learning")], &idx);
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].similarity, 1.0);
        assert_eq!(m[0].matched_text, "machine learning");
    }

    #[test]
    fn synonym_must_match_whole() {
        let idx = LabelIndex::new("o", &[term("T1", "ml", &["Machine Learning (field)"])]);
        assert!(exact_match(&[Topic::new("t", "Machine Learning")], &idx).is_empty());
        let idx = LabelIndex::new("o", &[term("T1", "ml", &["machine  LEARNING"])]);
        let m = exact_match(&[Topic::new("t", "Machine Learning")], &idx);
        assert_eq!(m[0].matched_text, "machine  LEARNING");
    }

    #[test]
    fn label_and_synonym_hit_gives_one_row() {
        let idx = LabelIndex::new("o", &[term("T1", "Soil", &["soil"])]);
        let m = exact_match(&[Topic::new("t", "soil")], &idx);
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].matched_text, "Soil");
    }

    #[test]
    fn obsolete_terms_are_skipped() {
        let mut t = term("T1", "soil", &[]);
        t.obsolete = true;
        let idx = LabelIndex::new("o", &[t]);
        assert!(exact_match(&[Topic::new("t", "soil")], &idx).is_empty());
    }
}
