//! Strict scoring and threshold sweeps.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use serde::Serialize;

use super::gold::{GoldPair, Label, Stratum};
use crate::align::Mapping;
use crate::error::{Error, Result};

type Key<'a> = (&'a str, &'a str, &'a str);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalResult {
    /// `None` when no gold pair was predicted.
    pub precision: Option<f64>,
    /// `None` when the gold set holds no correct pair.
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub per_stratum_precision: BTreeMap<Stratum, Option<f64>>,
    /// Correct pairs the method scored, but below the threshold.
    pub fn_below_threshold: Option<u64>,
    /// Correct pairs the method never scored at all.
    pub fn_not_emitted: Option<u64>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// F1 from unrounded P and R; 0 when both are 0 or when nothing was
/// predicted but recall is defined.
pub fn f1_score(precision: Option<f64>, recall: Option<f64>) -> Option<f64> {
    match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        (_, Some(_)) => Some(0.0),
        (_, None) => None,
    }
}

/// Score predicted keys against the gold universe. Predictions outside the
/// gold set are ignored; duplicates count once.
pub fn score_keys<'a>(predicted: &HashSet<Key<'a>>, gold: &'a [GoldPair]) -> Result<EvalResult> {
    if gold.is_empty() {
        return Err(Error::invalid("empty gold set"));
    }
    let (mut tp, mut fp, mut fn_) = (0u64, 0u64, 0u64);
    let mut strata: BTreeMap<Stratum, (u64, u64)> = BTreeMap::new();
    for g in gold {
        let label = g
            .label
            .ok_or_else(|| Error::invalid(format!("gold pair ({}, {}) is unlabelled", g.topic_id, g.term_id)))?;
        let hit = predicted.contains(&g.key());
        match (label, hit) {
            (Label::Correct, true) => tp += 1,
            (Label::Correct, false) => fn_ += 1,
            (_, true) => fp += 1,
            (_, false) => {}
        }
        if hit {
            let e = strata.entry(g.stratum).or_default();
            e.1 += 1;
            if label == Label::Correct {
                e.0 += 1;
            }
        }
    }
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let per_stratum_precision = Stratum::ALL
        .into_iter()
        .filter(|s| gold.iter().any(|g| g.stratum == *s))
        .map(|s| {
            let (c, n) = strata.get(&s).copied().unwrap_or_default();
            (s, ratio(c, n))
        })
        .collect();
    Ok(EvalResult {
        precision,
        recall,
        f1: f1_score(precision, recall),
        tp,
        fp,
        fn_,
        per_stratum_precision,
        fn_below_threshold: None,
        fn_not_emitted: None,
    })
}

/// Strict scoring: only `correct` counts as a true positive.
pub fn score_strict(predictions: &[Mapping], gold: &[GoldPair]) -> Result<EvalResult> {
    let keys: HashSet<Key> = predictions.iter().map(Mapping::key).collect();
    score_keys(&keys, gold)
}

/// Score the mappings at or above `threshold`, attributing false negatives to
/// the threshold or to the method's candidate space.
pub fn score_at(scored: &[Mapping], gold: &[GoldPair], threshold: f64) -> Result<EvalResult> {
    let keys: HashSet<Key> = scored
        .iter()
        .filter(|m| m.similarity >= threshold)
        .map(Mapping::key)
        .collect();
    let mut r = score_keys(&keys, gold)?;
    let emitted: HashSet<Key> = scored.iter().map(Mapping::key).collect();
    let (mut below, mut never) = (0, 0);
    for g in gold.iter().filter(|g| g.label == Some(Label::Correct)) {
        if keys.contains(&g.key()) {
            continue;
        }
        if emitted.contains(&g.key()) {
            below += 1;
        } else {
            never += 1;
        }
    }
    r.fn_below_threshold = Some(below);
    r.fn_not_emitted = Some(never);
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub threshold: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    /// Distinct predicted pairs at or above the threshold.
    pub n_predictions: u64,
}

/// `i / 100` for `i` in 60..=100.
pub fn default_thresholds() -> Vec<f64> {
    (60..=100).map(|i| i as f64 / 100.0).collect()
}

pub fn pr_sweep(scored: &[Mapping], gold: &[GoldPair], thresholds: &[f64]) -> Result<Vec<SweepRow>> {
    if thresholds.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::invalid("sweep thresholds must be ascending"));
    }
    let mut best: HashMap<Key, f64> = HashMap::new();
    for m in scored {
        let e = best.entry(m.key()).or_insert(m.similarity);
        *e = e.max(m.similarity);
    }
    thresholds
        .iter()
        .map(|&t| {
            let keys: HashSet<Key> = best.iter().filter(|(_, s)| **s >= t).map(|(k, _)| *k).collect();
            let r = score_keys(&keys, gold)?;
            Ok(SweepRow {
                threshold: t,
                precision: r.precision,
                recall: r.recall,
                f1: r.f1,
                n_predictions: keys.len() as u64,
            })
        })
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_sweep(path: &Path, rows: &[SweepRow]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["threshold", "precision", "recall", "f1", "n_predictions"])?;
    for r in rows {
        w.write_record([
            format!("{:.2}", r.threshold),
            opt(r.precision),
            opt(r.recall),
            opt(r.f1),
            r.n_predictions.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::align::Method;

    fn gold(id: &str, label: Label, stratum: Stratum) -> GoldPair {
        GoldPair {
            topic_id: id.into(),
            term_id: "T".into(),
            ontology: "o".into(),
            similarity: 0.9,
            stratum,
            label: Some(label),
        }
    }

    fn pred(id: &str, sim: f64) -> Mapping {
        Mapping {
            topic_id: id.into(),
            term_id: "T".into(),
            ontology: "o".into(),
            similarity: sim,
            method: Method::Embedding,
            tier: None,
            matched_text: String::new(),
        }
    }

    #[test]
    fn two_correct_one_partial_one_incorrect() {
        let g = vec![
            gold("a", Label::Correct, Stratum::High),
            gold("b", Label::Correct, Stratum::High),
            gold("c", Label::Partial, Stratum::Mid),
            gold("d", Label::Incorrect, Stratum::Mid),
        ];
        let p: Vec<_> = ["a", "b", "c", "d", "outside"].iter().map(|i| pred(i, 0.9)).collect();
        let r = score_strict(&p, &g).unwrap();
        assert_eq!(r.precision, Some(0.5));
        assert_eq!(r.recall, Some(1.0));
        assert_eq!(r.f1, Some(2.0 / 3.0));
        assert_eq!((r.tp, r.fp, r.fn_), (2, 2, 0));
        assert_eq!(r.per_stratum_precision[&Stratum::High], Some(1.0));
        assert_eq!(r.per_stratum_precision[&Stratum::Mid], Some(0.0));
    }

    #[test]
    fn no_predictions_and_no_correct() {
        let g = vec![gold("a", Label::Correct, Stratum::High)];
        let r = score_strict(&[], &g).unwrap();
        assert_eq!((r.precision, r.recall, r.f1), (None, Some(0.0), Some(0.0)));
        let g = vec![gold("a", Label::Incorrect, Stratum::High)];
        let r = score_strict(&[pred("a", 1.0)], &g).unwrap();
        assert_eq!((r.precision, r.recall, r.f1), (Some(0.0), None, None));
        assert!(score_strict(&[], &[]).is_err());
    }

    #[test]
    fn duplicates_and_order_do_not_matter() {
        let g = vec![gold("a", Label::Correct, Stratum::High), gold("b", Label::Partial, Stratum::High)];
        let once = score_strict(&[pred("a", 0.9), pred("b", 0.9)], &g).unwrap();
        let twice = score_strict(&[pred("b", 0.9), pred("a", 0.9), pred("a", 0.7)], &g).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn fn_provenance() {
        let g = vec![gold("a", Label::Correct, Stratum::High), gold("b", Label::Correct, Stratum::High)];
        let r = score_at(&[pred("a", 0.6)], &g, 0.65).unwrap();
        assert_eq!((r.fn_below_threshold, r.fn_not_emitted), (Some(1), Some(1)));
    }

    #[test]
    fn sweep_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let g = vec![gold("a", Label::Correct, Stratum::High)];
        let rows = pr_sweep(&[pred("a", 0.7)], &g, &[0.6, 1.0]).unwrap();
        write_sweep(&path, &rows).unwrap();
        assert_eq!(
            std::fs::read_to_string(&path).unwrap(),
            "threshold,precision,recall,f1,n_predictions\n0.60,1,1,1,1\n1.00,,0,0,0\n"
        );
    }
}
