use rayon::prelude::*;

use super::jaro::jaro_winkler;
use super::labels::LabelIndex;
use super::text::normalize_label;
use super::types::{Mapping, Method, Topic};
use crate::scalar::Real;

/// Every (topic, term) whose best string scores at least `threshold`.
pub fn jw_match<T: Real>(topics: &[Topic], index: &LabelIndex, threshold: T) -> Vec<Mapping> {
    topics
        .par_iter()
        .flat_map_iter(|topic| {
            let key = normalize_label(&topic.display_name);
            let scores = index
                .strings
                .iter()
                .enumerate()
                .map(|(i, s)| (i, jaro_winkler::<T>(&key, &s.key)));
            index
                .best_per_term(scores)
                .into_iter()
                .filter(|h| h.score >= threshold)
                .map(|h| index.mapping(topic, &h, Method::JaroWinkler))
                .collect::<Vec<_>>()
        })
        .collect()
}
