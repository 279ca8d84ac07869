//! Vignette analytics over the unified table.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::align::Mapping;
use crate::error::{Error, Result};
use crate::link::{normalize_doi, UnifiedPaper};
use crate::scalar::Real;
use crate::validate::{citation_agreement, AgreementReport};

/// Linear-interpolation quantile of sorted data (the common "type 7").
pub fn quantile<T: Real>(sorted: &[T], q: T) -> T {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = T::count(n - 1) * q;
    let lo = h.floor();
    let i = lo.to_usize().unwrap_or(0).min(n - 1);
    if i + 1 >= n {
        return sorted[n - 1];
    }
    sorted[i] + (h - lo) * (sorted[i + 1] - sorted[i])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub group_key: String,
    pub n: u64,
    pub mean: f64,
    pub median: f64,
    pub p10: f64,
    pub p90: f64,
}

/// `None` for an empty group. Non-finite values must be filtered by the caller.
pub fn summarize<T: Real>(group_key: &str, values: &[T]) -> Option<GroupSummary> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let mean = v.iter().copied().sum::<T>() / T::count(v.len());
    Some(GroupSummary {
        group_key: group_key.to_string(),
        n: v.len() as u64,
        mean: mean.to_f64_lossy(),
        median: quantile(&v, T::lit(0.5)).to_f64_lossy(),
        p10: quantile(&v, T::lit(0.1)).to_f64_lossy(),
        p90: quantile(&v, T::lit(0.9)).to_f64_lossy(),
    })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DisruptionReport {
    pub with_code: Option<GroupSummary>,
    pub without_code: Option<GroupSummary>,
    /// All papers flagged with code, with or without a CD5 value.
    pub n_with_code: u64,
    pub warnings: Vec<String>,
}

/// CD5 of papers with and without linked code.
pub fn disruption_by_code(papers: &[UnifiedPaper]) -> DisruptionReport {
    let mut with = Vec::new();
    let mut without = Vec::new();
    for p in papers {
        if let Some(c) = p.cd5.filter(|c| c.is_finite()) {
            if p.has_pwc {
                with.push(c);
            } else {
                without.push(c);
            }
        }
    }
    let mut r = DisruptionReport {
        with_code: summarize("has_code", &with),
        without_code: summarize("no_code", &without),
        n_with_code: papers.iter().filter(|p| p.has_pwc).count() as u64,
        warnings: Vec::new(),
    };
    for (name, g) in [("has_code", &r.with_code), ("no_code", &r.without_code)] {
        if g.is_none() {
            r.warnings.push(format!("group {name} has no papers with CD5; omitted"));
        }
    }
    r
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnrichmentRow {
    pub group: String,
    pub enrichment: Option<f64>,
    pub n_retracted: u64,
    pub n_total: u64,
}

pub const DEFAULT_MIN_SUPPORT: u64 = 20;

/// Retraction rate of each ontology-term group relative to all papers with a
/// topic assignment.
///
/// A paper belongs to group `ontology:term_id` when any of its topics maps to
/// that term. Groups with fewer than `min_support` papers are dropped. Rows
/// are sorted by descending enrichment, then group.
pub fn retraction_enrichment(
    papers: &[UnifiedPaper],
    assignments: &[(String, String)],
    mappings: &[Mapping],
    min_support: u64,
) -> Vec<EnrichmentRow> {
    let retracted: HashMap<String, bool> = papers
        .iter()
        .filter_map(|p| normalize_doi(&p.doi).map(|d| (d.into_string(), p.has_retraction)))
        .fold(HashMap::new(), |mut m, (d, r)| {
            *m.entry(d).or_insert(false) |= r;
            m
        });
    let mut topics_of: BTreeMap<String, BTreeSet<&str>> = BTreeMap::new();
    for (doi, topic) in assignments {
        if let Some(d) = normalize_doi(doi) {
            if retracted.contains_key(d.as_str()) {
                topics_of.entry(d.into_string()).or_default().insert(topic);
            }
        }
    }
    let mut groups_of_topic: HashMap<&str, BTreeSet<String>> = HashMap::new();
    for m in mappings {
        groups_of_topic
            .entry(m.topic_id.as_str())
            .or_default()
            .insert(format!("{}:{}", m.ontology, m.term_id));
    }
    let total = topics_of.len() as u64;
    let total_retracted = topics_of.keys().filter(|d| retracted[d.as_str()]).count() as u64;
    let baseline = (total > 0).then(|| total_retracted as f64 / total as f64).filter(|b| *b > 0.0);

    let mut tally: BTreeMap<String, (u64, u64)> = BTreeMap::new();
    for (doi, topics) in &topics_of {
        let groups: BTreeSet<&String> = topics
            .iter()
            .filter_map(|t| groups_of_topic.get(t))
            .flatten()
            .collect();
        for g in groups {
            let e = tally.entry(g.clone()).or_default();
            e.1 += 1;
            if retracted[doi.as_str()] {
                e.0 += 1;
            }
        }
    }
    let mut rows: Vec<EnrichmentRow> = tally
        .into_iter()
        .filter(|(_, (_, n))| *n >= min_support)
        .map(|(group, (r, n))| EnrichmentRow {
            group,
            enrichment: baseline.map(|b| (r as f64 / n as f64) / b),
            n_retracted: r,
            n_total: n,
        })
        .collect();
    rows.sort_by(|a, b| {
        b.enrichment
            .unwrap_or(f64::NEG_INFINITY)
            .total_cmp(&a.enrichment.unwrap_or(f64::NEG_INFINITY))
            .then_with(|| a.group.cmp(&b.group))
    });
    rows
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricComparison {
    pub metric: String,
    pub patent: Option<GroupSummary>,
    pub other: Option<GroupSummary>,
    pub ratio_of_means: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PatentImpact {
    pub metrics: Vec<MetricComparison>,
    pub warnings: Vec<String>,
}

/// OpenAlex citations and FWCI of patent-cited papers against the rest.
pub fn patent_impact(papers: &[UnifiedPaper]) -> PatentImpact {
    let metrics: [(&str, fn(&UnifiedPaper) -> Option<f64>); 2] = [
        ("citations_openalex", |p| p.citations_openalex.map(|c| c as f64)),
        ("fwci", |p| p.fwci.filter(|v| v.is_finite())),
    ];
    let mut out = PatentImpact::default();
    for (name, get) in metrics {
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for p in papers {
            if let Some(v) = get(p) {
                if p.has_patent {
                    a.push(v);
                } else {
                    b.push(v);
                }
            }
        }
        let patent = summarize("patent_cited", &a);
        let other = summarize("not_patent_cited", &b);
        for (g, s) in [("patent_cited", &patent), ("not_patent_cited", &other)] {
            if s.is_none() {
                out.warnings.push(format!("{name}: group {g} is empty; omitted"));
            }
        }
        let ratio_of_means = match (&patent, &other) {
            (Some(p), Some(o)) if o.mean != 0.0 => Some(p.mean / o.mean),
            _ => None,
        };
        out.metrics.push(MetricComparison {
            metric: name.to_string(),
            patent,
            other,
            ratio_of_means,
        });
    }
    out
}

/// Cross-source citation agreement with per-bin relative differences.
pub fn citation_reliability(papers: &[UnifiedPaper]) -> AgreementReport {
    citation_agreement(papers)
}

/// Distinct-DOI counts that anchor the vignettes; re-checked during validation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VignetteCounts {
    pub with_code: u64,
    pub retracted: u64,
    pub patent_cited: u64,
    pub all_three_citations: u64,
}

impl VignetteCounts {
    pub fn fields(&self) -> [(&'static str, u64); 4] {
        [
            ("with_code", self.with_code),
            ("retracted", self.retracted),
            ("patent_cited", self.patent_cited),
            ("all_three_citations", self.all_three_citations),
        ]
    }
}

/// Counts are over distinct normalized DOIs, so formatting drift and repeated
/// rows leave them unchanged.
pub fn vignette_counts(papers: &[UnifiedPaper]) -> VignetteCounts {
    let mut sets: [HashSet<String>; 4] = Default::default();
    for p in papers {
        let Some(d) = normalize_doi(&p.doi) else { continue };
        let flags = [
            p.has_pwc,
            p.has_retraction,
            p.has_patent,
            p.citations_s2ag.is_some() && p.citations_openalex.is_some() && p.citations_sciscinet.is_some(),
        ];
        for (set, f) in sets.iter_mut().zip(flags) {
            if f {
                set.insert(d.as_str().to_string());
            }
        }
    }
    VignetteCounts {
        with_code: sets[0].len() as u64,
        retracted: sets[1].len() as u64,
        patent_cited: sets[2].len() as u64,
        all_three_citations: sets[3].len() as u64,
    }
}

pub const VIGNETTE_COUNTS: &str = "reports/vignette_counts.json";

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_counts(path: &Path) -> Result<VignetteCounts> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_csv<S: Serialize>(path: &Path, rows: &[S]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Serialize)]
struct MetricRow<'a> {
    metric: &'a str,
    group_key: &'a str,
    n: u64,
    mean: f64,
    median: f64,
    p10: f64,
    p90: f64,
    ratio_of_means: Option<f64>,
}

#[derive(Serialize)]
struct PairRow<'a> {
    source_a: &'a str,
    source_b: &'a str,
    n: u64,
    pearson_r: Option<f64>,
    mean_abs_diff: f64,
    mean_diff: f64,
    loa_low: f64,
    loa_high: f64,
    n_outliers: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Vignettes {
    pub disruption: DisruptionReport,
    pub enrichment: Vec<EnrichmentRow>,
    pub patent: PatentImpact,
    pub reliability: AgreementReport,
    pub counts: VignetteCounts,
}

pub fn compute_vignettes(
    papers: &[UnifiedPaper],
    assignments: &[(String, String)],
    mappings: &[Mapping],
    min_support: u64,
) -> Vignettes {
    Vignettes {
        disruption: disruption_by_code(papers),
        enrichment: retraction_enrichment(papers, assignments, mappings, min_support),
        patent: patent_impact(papers),
        reliability: citation_reliability(papers),
        counts: vignette_counts(papers),
    }
}

/// Write `reports/vignette_{1..4}/summary.{csv,json}` and the counts file.
pub fn write_vignettes(lake_root: &Path, v: &Vignettes) -> Result<()> {
    let dir = |n: u8| lake_root.join(format!("reports/vignette_{n}"));

    let groups: Vec<&GroupSummary> = [&v.disruption.with_code, &v.disruption.without_code]
        .into_iter()
        .flatten()
        .collect();
    write_csv(&dir(1).join("summary.csv"), &groups)?;
    write_json(&dir(1).join("summary.json"), &v.disruption)?;

    write_csv(&dir(2).join("summary.csv"), &v.enrichment)?;
    write_json(&dir(2).join("summary.json"), &v.enrichment)?;

    let rows: Vec<MetricRow> = v
        .patent
        .metrics
        .iter()
        .flat_map(|m| {
            [&m.patent, &m.other].into_iter().flatten().map(move |g| MetricRow {
                metric: &m.metric,
                group_key: &g.group_key,
                n: g.n,
                mean: g.mean,
                median: g.median,
                p10: g.p10,
                p90: g.p90,
                ratio_of_means: m.ratio_of_means,
            })
        })
        .collect();
    write_csv(&dir(3).join("summary.csv"), &rows)?;
    write_json(&dir(3).join("summary.json"), &v.patent)?;

    let pairs: Vec<PairRow> = v
        .reliability
        .pairs
        .iter()
        .map(|p| PairRow {
            source_a: &p.source_a,
            source_b: &p.source_b,
            n: p.n,
            pearson_r: p.pearson_r,
            mean_abs_diff: p.mean_abs_diff,
            mean_diff: p.mean_diff,
            loa_low: p.loa_low,
            loa_high: p.loa_high,
            n_outliers: p.n_outliers,
        })
        .collect();
    write_csv(&dir(4).join("summary.csv"), &pairs)?;
    write_csv(&dir(4).join("bins.csv"), &v.reliability.bins)?;
    write_json(&dir(4).join("summary.json"), &v.reliability)?;

    write_json(&lake_root.join(VIGNETTE_COUNTS), &v.counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_interpolate() {
        let v = [1.0f64, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert!((quantile(&v, 0.1) - 1.3).abs() < 1e-12);
        assert!((quantile(&v, 0.9) - 3.7).abs() < 1e-12);
        assert_eq!(quantile(&[7.0f64], 0.9), 7.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
    }

    fn paper(i: usize) -> UnifiedPaper {
        UnifiedPaper::new(format!("10.1000/{i}"))
    }

    #[test]
    fn constant_groups() {
        let papers: Vec<_> = (0..10)
            .map(|i| {
                let mut p = paper(i);
                p.has_pwc = i % 2 == 0;
                p.cd5 = Some(if p.has_pwc { -0.1 } else { 0.1 });
                p
            })
            .collect();
        let r = disruption_by_code(&papers);
        assert_eq!(r.with_code.unwrap().mean, -0.1);
        assert_eq!(r.without_code.unwrap().mean, 0.1);
        assert_eq!(r.n_with_code, 5);
    }

    #[test]
    fn empty_group_is_omitted() {
        let mut p = paper(0);
        p.has_patent = true;
        p.citations_openalex = Some(5);
        let r = patent_impact(&[p]);
        assert!(r.metrics[0].other.is_none());
        assert!(r.metrics[0].ratio_of_means.is_none());
        assert!(!r.warnings.is_empty());
    }

    #[test]
    fn ratio_of_means() {
        let papers: Vec<_> = (0..10)
            .map(|i| {
                let mut p = paper(i);
                p.has_patent = i < 5;
                p.citations_openalex = Some(if p.has_patent { 50 } else { 10 } + i as i64 % 5 - 2);
                p
            })
            .collect();
        let r = patent_impact(&papers);
        assert_eq!(r.metrics[0].ratio_of_means, Some(5.0));
    }

    fn mapping(topic: &str, term: &str) -> Mapping {
        Mapping {
            topic_id: topic.into(),
            term_id: term.into(),
            ontology: "o".into(),
            similarity: 0.9,
            method: crate::align::Method::Embedding,
            tier: None,
            matched_text: String::new(),
        }
    }

    #[test]
    fn planted_enrichment() {
        // 1000 papers, 10 retracted; group A holds 50 papers, 10 of them retracted
        let papers: Vec<_> = (0..1000)
            .map(|i| {
                let mut p = paper(i);
                p.has_retraction = i < 10;
                p
            })
            .collect();
        let assignments: Vec<(String, String)> = (0..1000)
            .map(|i| (format!("10.1000/{i}"), if i < 50 { "ta" } else { "tb" }.to_string()))
            .collect();
        let maps = vec![mapping("ta", "A"), mapping("tb", "B"), mapping("ta", "ALL"), mapping("tb", "ALL")];
        let rows = retraction_enrichment(&papers, &assignments, &maps, 20);
        let get = |g: &str| rows.iter().find(|r| r.group == g).unwrap();
        assert_eq!(get("o:A").enrichment, Some(20.0));
        assert_eq!((get("o:A").n_retracted, get("o:A").n_total), (10, 50));
        assert_eq!(get("o:ALL").enrichment, Some(1.0));
        assert_eq!(get("o:B").enrichment, Some(0.0));
        assert_eq!(rows[0].group, "o:A");
    }

    #[test]
    fn zero_baseline_gives_null() {
        let papers: Vec<_> = (0..30).map(paper).collect();
        let assignments: Vec<_> = (0..30).map(|i| (format!("10.1000/{i}"), "t".to_string())).collect();
        let rows = retraction_enrichment(&papers, &assignments, &[mapping("t", "A")], 20);
        assert_eq!(rows[0].enrichment, None);
    }

    #[test]
    fn counts_ignore_case_and_repeats() {
        let mut a = paper(1);
        a.has_pwc = true;
        let mut b = a.clone();
        b.doi = b.doi.to_uppercase();
        let c = vignette_counts(&[a, b]);
        assert_eq!(c.with_code, 1);
    }
}
