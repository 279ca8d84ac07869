//! Character n-gram TF-IDF within word boundaries.

use std::collections::HashMap;

use rayon::prelude::*;

use super::labels::{top_k, LabelIndex};
use super::text::normalize_label;
use super::types::{Mapping, Method, Topic};
use crate::scalar::Real;

pub const MIN_N: usize = 2;
pub const MAX_N: usize = 4;

/// N-grams of each whitespace-separated word padded with one space per side.
///
/// A word shorter than `n` contributes itself once and stops the loop over
/// larger `n`, the same as scikit-learn's `char_wb` analyzer.
pub fn char_wb_ngrams(text: &str, min_n: usize, max_n: usize) -> Vec<String> {
    let mut out = Vec::new();
    for word in text.split_whitespace() {
        let padded: Vec<char> = std::iter::once(' ')
            .chain(word.chars())
            .chain(std::iter::once(' '))
            .collect();
        for n in min_n..=max_n {
            let mut offset = 0;
            out.push(padded[offset..(offset + n).min(padded.len())].iter().collect());
            while offset + n < padded.len() {
                offset += 1;
                out.push(padded[offset..offset + n].iter().collect());
            }
            if offset == 0 {
                break;
            }
        }
    }
    out
}

/// Sparse L2-normalized TF-IDF vectors of a label index.
#[derive(Debug, Clone)]
pub struct TfidfIndex<T> {
    vocab: HashMap<String, usize>,
    idf: Vec<T>,
    /// Per n-gram: (string, weight) postings.
    postings: Vec<Vec<(usize, T)>>,
}

fn counts(text: &str) -> HashMap<String, usize> {
    let mut c = HashMap::new();
    for g in char_wb_ngrams(text, MIN_N, MAX_N) {
        *c.entry(g).or_insert(0) += 1;
    }
    c
}

impl<T: Real> TfidfIndex<T> {
    pub fn build(index: &LabelIndex) -> Self {
        let docs: Vec<HashMap<String, usize>> = index.strings.par_iter().map(|s| counts(&s.key)).collect();
        let mut vocab: HashMap<String, usize> = HashMap::new();
        let mut df: Vec<usize> = Vec::new();
        let mut names: Vec<&str> = docs.iter().flat_map(|d| d.keys().map(String::as_str)).collect();
        names.sort_unstable();
        names.dedup();
        for g in names {
            vocab.insert(g.to_string(), df.len());
            df.push(0);
        }
        for d in &docs {
            for g in d.keys() {
                df[vocab[g]] += 1;
            }
        }
        let n = T::count(docs.len());
        let idf: Vec<T> = df
            .iter()
            .map(|&d| ((T::one() + n) / (T::one() + T::count(d))).ln() + T::one())
            .collect();
        let mut postings = vec![Vec::new(); idf.len()];
        for (s, d) in docs.iter().enumerate() {
            let mut weights: Vec<(usize, T)> =
                d.iter().map(|(g, &c)| (vocab[g], T::count(c) * idf[vocab[g]])).collect();
            // fixed summation order keeps the norm bit-identical across runs
            weights.sort_by_key(|(g, _)| *g);
            let norm = weights.iter().map(|(_, w)| *w * *w).sum::<T>().sqrt();
            if norm > T::zero() {
                for (g, w) in weights {
                    postings[g].push((s, w / norm));
                }
            }
        }
        Self { vocab, idf, postings }
    }

    /// L2-normalized query weights over the index vocabulary.
    pub fn query(&self, text: &str) -> Vec<(usize, T)> {
        let mut weights: Vec<(usize, T)> = counts(text)
            .into_iter()
            .filter_map(|(g, c)| self.vocab.get(&g).map(|&i| (i, T::count(c) * self.idf[i])))
            .collect();
        weights.sort_by_key(|(g, _)| *g);
        let norm = weights.iter().map(|(_, w)| *w * *w).sum::<T>().sqrt();
        if norm > T::zero() {
            for (_, w) in &mut weights {
                *w = *w / norm;
            }
        }
        weights
    }

    /// Cosine of `text` against every indexed string with a shared n-gram.
    pub fn scores(&self, text: &str) -> Vec<(usize, T)> {
        let mut acc: HashMap<usize, T> = HashMap::new();
        for (g, qw) in self.query(text) {
            for &(s, w) in &self.postings[g] {
                let e = acc.entry(s).or_insert(T::zero());
                *e = *e + qw * w;
            }
        }
        let mut out: Vec<_> = acc.into_iter().collect();
        out.sort_by_key(|(s, _)| *s);
        out
    }
}

/// Pairs whose best-string cosine is at least `threshold`.
pub fn tfidf_match<T: Real>(
    topics: &[Topic],
    index: &LabelIndex,
    threshold: T,
    k: Option<usize>,
) -> Vec<Mapping> {
    let tfidf = TfidfIndex::<T>::build(index);
    topics
        .par_iter()
        .flat_map_iter(|topic| {
            let key = normalize_label(&topic.display_name);
            let mut hits: Vec<_> = index
                .best_per_term(tfidf.scores(&key))
                .into_iter()
                .map(|mut h| {
                    h.score = h.score.min(T::one());
                    h
                })
                .filter(|h| h.score >= threshold && h.score > T::zero())
                .collect();
            top_k(index, &mut hits, k);
            hits.into_iter()
                .map(|h| index.mapping(topic, &h, Method::Tfidf))
                .collect::<Vec<_>>()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn char_wb_short_word_quirk() {
        assert_eq!(char_wb_ngrams("a", 2, 4), vec![" a", "a ", " a "]);
        assert_eq!(char_wb_ngrams("ab", 2, 4), vec![" a", "ab", "b ", " ab", "ab ", " ab "]);
        // a padded word no longer than n is emitted whole and ends the word
        assert_eq!(char_wb_ngrams("a", 3, 4), vec![" a "]);
        assert_eq!(char_wb_ngrams("a", 4, 4), vec![" a "]);
    }
}
