//! Okapi BM25 over whitespace tokens.

use std::collections::HashMap;

use rayon::prelude::*;

use super::labels::{top_k, Hit, LabelIndex};
use super::text::normalize_label;
use super::types::{Mapping, Method, Topic};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bm25Params<T> {
    pub k1: T,
    pub b: T,
}

impl<T: Real> Default for Bm25Params<T> {
    fn default() -> Self {
        Self {
            k1: T::lit(1.2),
            b: T::lit(0.75),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Bm25Index<T> {
    params: Bm25Params<T>,
    idf: HashMap<String, T>,
    /// Per token: (string, term frequency).
    postings: HashMap<String, Vec<(usize, usize)>>,
    lengths: Vec<usize>,
    avg_len: T,
}

impl<T: Real> Bm25Index<T> {
    pub fn build(index: &LabelIndex, params: Bm25Params<T>) -> Self {
        Self::from_docs(index.strings.iter().map(|s| s.key.as_str()), params)
    }

    pub fn from_docs<'a>(docs: impl IntoIterator<Item = &'a str>, params: Bm25Params<T>) -> Self {
        let mut postings: HashMap<String, Vec<(usize, usize)>> = HashMap::new();
        let mut lengths = Vec::new();
        for (d, text) in docs.into_iter().enumerate() {
            let mut tf: HashMap<&str, usize> = HashMap::new();
            let mut len = 0;
            for tok in text.split_whitespace() {
                *tf.entry(tok).or_insert(0) += 1;
                len += 1;
            }
            lengths.push(len);
            for (tok, c) in tf {
                postings.entry(tok.to_string()).or_default().push((d, c));
            }
        }
        let n = T::count(lengths.len());
        let half = T::lit(0.5);
        let idf = postings
            .iter()
            .map(|(tok, p)| {
                let df = T::count(p.len());
                (tok.clone(), (T::one() + (n - df + half) / (df + half)).ln())
            })
            .collect();
        let avg_len = if lengths.is_empty() {
            T::zero()
        } else {
            T::count(lengths.iter().sum()) / n
        };
        Self {
            params,
            idf,
            postings,
            lengths,
            avg_len,
        }
    }

    /// Raw scores of every document sharing a token with `query`.
    ///
    /// Repeated query tokens contribute once per occurrence.
    pub fn scores(&self, query: &str) -> Vec<(usize, T)> {
        let Bm25Params { k1, b } = self.params;
        let mut acc: HashMap<usize, T> = HashMap::new();
        for tok in query.split_whitespace() {
            let Some(p) = self.postings.get(tok) else { continue };
            let idf = self.idf[tok];
            for &(d, tf) in p {
                let tf = T::count(tf);
                let len = T::count(self.lengths[d]);
                let norm = if self.avg_len > T::zero() {
                    T::one() - b + b * len / self.avg_len
                } else {
                    T::one()
                };
                let s = idf * tf * (k1 + T::one()) / (tf + k1 * norm);
                let e = acc.entry(d).or_insert(T::zero());
                *e = *e + s;
            }
        }
        let mut out: Vec<_> = acc.into_iter().collect();
        out.sort_by_key(|(d, _)| *d);
        out
    }
}

/// Min-max scale hit scores in place. A list whose scores are all equal,
/// including a single hit, scales to 1.0.
pub fn min_max_normalize<T: Real>(hits: &mut [Hit<T>]) {
    let Some(first) = hits.first() else { return };
    let (lo, hi) = hits
        .iter()
        .fold((first.score, first.score), |(lo, hi), h| (lo.min(h.score), hi.max(h.score)));
    for h in hits.iter_mut() {
        h.score = if hi > lo { (h.score - lo) / (hi - lo) } else { T::one() };
    }
}

/// Top `k` terms per topic by raw BM25, min-max normalized within the list,
/// kept when the normalized score is at least `threshold`.
pub fn bm25_match<T: Real>(
    topics: &[Topic],
    index: &LabelIndex,
    params: Bm25Params<T>,
    k: Option<usize>,
    threshold: T,
) -> Vec<Mapping> {
    let bm25 = Bm25Index::build(index, params);
    topics
        .par_iter()
        .flat_map_iter(|topic| {
            let key = normalize_label(&topic.display_name);
            let mut hits: Vec<_> = index
                .best_per_term(bm25.scores(&key))
                .into_iter()
                .filter(|h| h.score > T::zero())
                .collect();
            top_k(index, &mut hits, k);
            min_max_normalize(&mut hits);
            hits.into_iter()
                .filter(|h| h.score >= threshold)
                .map(|h| index.mapping(topic, &h, Method::Bm25))
                .collect::<Vec<_>>()
        })
        .collect()
}
