use std::collections::HashMap;

use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scilake::align::{Mapping, Method, Tier};
use scilake::link::UnifiedPaper;
use scilake::stats::{citation_reliability, disruption_by_code, patent_impact, retraction_enrichment, summarize};
use scilake::validate::{bin_of, relative_difference};

fn paper(i: usize) -> UnifiedPaper {
    UnifiedPaper::new(format!("10.1000/p{i}"))
}

fn mapping(topic: &str, term: &str) -> Mapping {
    Mapping {
        topic_id: topic.into(),
        term_id: term.into(),
        ontology: "o".into(),
        similarity: 1.0,
        method: Method::Exact,
        tier: Some(Tier::Exact),
        matched_text: term.into(),
    }
}

/// Flat accumulation: (n, sum) per key in one pass.
fn group_means(rows: impl IntoIterator<Item = (bool, f64)>) -> HashMap<bool, (u64, f64)> {
    let mut acc: HashMap<bool, (u64, f64)> = HashMap::new();
    for (k, v) in rows {
        let e = acc.entry(k).or_default();
        e.0 += 1;
        e.1 += v;
    }
    acc
}

/// Percentile by explicit rank interpolation, for cross-checking.
fn percentile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = q * (v.len() - 1) as f64;
    let (lo, hi) = (rank.floor() as usize, rank.ceil() as usize);
    v[lo] + (v[hi] - v[lo]) * (rank - lo as f64)
}

#[test]
fn disruption_matches_group_by_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let papers: Vec<UnifiedPaper> = (0..1000)
        .map(|i| {
            let mut p = paper(i);
            p.has_pwc = rng.random_bool(0.3);
            p.cd5 = (!rng.random_bool(0.1)).then(|| rng.random_range(-1.0..1.0));
            p
        })
        .collect();
    let r = disruption_by_code(&papers);
    let oracle = group_means(papers.iter().filter_map(|p| p.cd5.map(|c| (p.has_pwc, c))));
    for (flag, g) in [(true, r.with_code.unwrap()), (false, r.without_code.unwrap())] {
        let (n, sum) = oracle[&flag];
        assert_eq!(g.n, n);
        assert!((g.mean - sum / n as f64).abs() < 1e-12);
        let vals: Vec<f64> = papers.iter().filter(|p| p.has_pwc == flag).filter_map(|p| p.cd5).collect();
        for (q, got) in [(0.5, g.median), (0.1, g.p10), (0.9, g.p90)] {
            assert!((got - percentile(&vals, q)).abs() < 1e-12);
        }
    }
    assert_eq!(r.n_with_code, papers.iter().filter(|p| p.has_pwc).count() as u64);
}

#[test]
fn disruption_constant_groups_and_empty_group() {
    let papers: Vec<UnifiedPaper> = (0..10)
        .map(|i| {
            let mut p = paper(i);
            p.has_pwc = i < 4;
            p.cd5 = Some(if p.has_pwc { -0.1 } else { 0.1 });
            p
        })
        .collect();
    let r = disruption_by_code(&papers);
    let (w, wo) = (r.with_code.unwrap(), r.without_code.unwrap());
    assert!((w.mean + 0.1).abs() < 1e-15 && (wo.mean - 0.1).abs() < 1e-15);
    assert_eq!((w.median, wo.median), (-0.1, 0.1));

    let only_code: Vec<UnifiedPaper> = papers.into_iter().filter(|p| p.has_pwc).collect();
    let r = disruption_by_code(&only_code);
    assert!(r.without_code.is_none());
    assert_eq!(r.warnings.len(), 1);
}

/// 1,000 papers, ten retracted. Topic TA (40 papers, 8 retracted) maps to term A.
fn enrichment_fixture() -> (Vec<UnifiedPaper>, Vec<(String, String)>, Vec<Mapping>) {
    let papers: Vec<UnifiedPaper> = (0..1000)
        .map(|i| {
            let mut p = paper(i);
            p.has_retraction = i < 8 || (500..502).contains(&i);
            p
        })
        .collect();
    let assignments = (0..1000)
        .map(|i| (format!("https://doi.org/10.1000/P{i}"), if i < 40 { "TA" } else { "TB" }.to_string()))
        .collect();
    let mappings = vec![mapping("TA", "A"), mapping("TB", "B")];
    (papers, assignments, mappings)
}

#[test]
fn planted_enrichment_is_exact() {
    let (papers, assignments, mappings) = enrichment_fixture();
    let rows = retraction_enrichment(&papers, &assignments, &mappings, 20);
    assert_eq!(rows[0].group, "o:A");
    assert_eq!((rows[0].n_retracted, rows[0].n_total), (8, 40));
    assert_eq!(rows[0].enrichment, Some(20.0));
}

#[test]
fn enrichment_of_whole_population_is_one() {
    let (papers, assignments, _) = enrichment_fixture();
    let mappings = vec![mapping("TA", "ALL"), mapping("TB", "ALL")];
    let rows = retraction_enrichment(&papers, &assignments, &mappings, 20);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].enrichment, Some(1.0));
}

#[test]
fn enrichment_double_rate_support_and_zero_baseline() {
    // baseline 4/100; group G holds 20 papers with 2 retracted... scaled so its rate is 0.08
    let papers: Vec<UnifiedPaper> = (0..100)
        .map(|i| {
            let mut p = paper(i);
            p.has_retraction = i < 2 || i == 50 || i == 51;
            p
        })
        .collect();
    let assignments: Vec<(String, String)> = (0..100)
        .map(|i| (format!("10.1000/p{i}"), if i < 25 { "TG" } else { "TX" }.to_string()))
        .collect();
    let mappings = vec![mapping("TG", "G"), mapping("TX", "X"), mapping("TX", "SMALL")];
    let rows = retraction_enrichment(&papers, &assignments, &mappings, 20);
    let g = rows.iter().find(|r| r.group == "o:G").unwrap();
    assert_eq!(g.enrichment, Some(2.0));
    assert!(retraction_enrichment(&papers, &assignments, &mappings, 80).iter().all(|r| r.n_total >= 80));

    let clean: Vec<UnifiedPaper> = (0..100).map(paper).collect();
    let rows = retraction_enrichment(&clean, &assignments, &mappings, 20);
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.enrichment.is_none()));
}

#[test]
fn patent_impact_matches_group_by_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let papers: Vec<UnifiedPaper> = (0..500)
        .map(|i| {
            let mut p = paper(i);
            p.has_patent = rng.random_bool(0.2);
            p.citations_openalex = (!rng.random_bool(0.05)).then(|| rng.random_range(0..400));
            p.fwci = (!rng.random_bool(0.05)).then(|| rng.random_range(0.0..8.0));
            p
        })
        .collect();
    let r = patent_impact(&papers);
    let cites = group_means(papers.iter().filter_map(|p| p.citations_openalex.map(|c| (p.has_patent, c as f64))));
    let fwci = group_means(papers.iter().filter_map(|p| p.fwci.map(|c| (p.has_patent, c))));
    for (m, oracle) in r.metrics.iter().zip([cites, fwci]) {
        let (pa, ot) = (m.patent.as_ref().unwrap(), m.other.as_ref().unwrap());
        let (n1, s1) = oracle[&true];
        let (n0, s0) = oracle[&false];
        assert_eq!((pa.n, ot.n), (n1, n0), "{}", m.metric);
        assert!((pa.mean - s1 / n1 as f64).abs() < 1e-12);
        assert!((ot.mean - s0 / n0 as f64).abs() < 1e-12);
        assert!((m.ratio_of_means.unwrap() - pa.mean / ot.mean).abs() < 1e-12);
    }
}

#[test]
fn patent_impact_ratio_and_degenerate_partition() {
    let papers: Vec<UnifiedPaper> = (0..20)
        .map(|i| {
            let mut p = paper(i);
            p.has_patent = i % 2 == 0;
            p.citations_openalex = Some(if p.has_patent { 50 } else { 10 });
            p
        })
        .collect();
    assert_eq!(patent_impact(&papers).metrics[0].ratio_of_means, Some(5.0));

    let all: Vec<UnifiedPaper> = papers.into_iter().filter(|p| p.has_patent).collect();
    let r = patent_impact(&all);
    assert!(r.metrics[0].other.is_none());
    assert!(r.metrics[0].ratio_of_means.is_none());
    assert!(!r.warnings.is_empty());
}

#[test]
fn relative_difference_and_bins() {
    assert_eq!(relative_difference(10.0f64, 30.0), 1.0);
    assert_eq!(relative_difference(0.0f64, 0.0), 0.0);
    assert_eq!(relative_difference(0.0f64, 1.0), 1.0);
    assert_eq!(bin_of(5.0), 0);
    assert_eq!(bin_of(50.0), 1);
    assert_eq!(bin_of(500.0), 2);
}

#[test]
fn identical_columns_have_zero_relative_difference() {
    let papers: Vec<UnifiedPaper> = (0..30)
        .map(|i| {
            let mut p = paper(i);
            let c = Some((i * i) as i64);
            (p.citations_s2ag, p.citations_openalex, p.citations_sciscinet) = (c, c, c);
            p
        })
        .collect();
    let r = citation_reliability(&papers);
    assert_eq!(r.pairs.len(), 3);
    assert!(r.bins.iter().all(|b| b.mean_relative_difference.unwrap_or(0.0) == 0.0));
    assert!(r.pairs.iter().all(|p| p.pearson_r == Some(1.0) && p.mean_diff == 0.0));
}

proptest! {
    #[test]
    fn summary_bounds(values in prop::collection::vec(-1e6f64..1e6, 1..60)) {
        let g = summarize("g", &values).unwrap();
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(lo <= g.p10 && g.p10 <= g.median && g.median <= g.p90 && g.p90 <= hi);
        prop_assert!(lo - 1e-9 <= g.mean && g.mean <= hi + 1e-9);
    }

    #[test]
    fn enrichment_whole_population(n_ret in 1usize..30, n in 40usize..120) {
        let papers: Vec<UnifiedPaper> = (0..n).map(|i| { let mut p = paper(i); p.has_retraction = i < n_ret.min(n); p }).collect();
        let assignments: Vec<(String, String)> = (0..n).map(|i| (format!("10.1000/p{i}"), format!("T{}", i % 3))).collect();
        let mappings: Vec<Mapping> = (0..3).map(|t| mapping(&format!("T{t}"), "ALL")).collect();
        let rows = retraction_enrichment(&papers, &assignments, &mappings, 1);
        prop_assert_eq!(rows[0].enrichment, Some(1.0));
    }
}
