//! The ten lake sanity checks.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};

use super::agreement::citation_agreement;
use crate::align::Mapping;
use crate::error::{Error, Result};
use crate::link::{normalize_doi, Coverage, Doi, DoiMapRow, UnifiedPaper};
use crate::stats::{vignette_counts, VignetteCounts};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub check_id: u8,
    pub name: String,
    pub status: Status,
    pub violation_count: u64,
    pub detail: String,
}

impl CheckResult {
    fn new(check_id: u8, violation_count: u64, detail: String) -> Self {
        Self {
            check_id,
            name: CHECK_NAMES[check_id as usize - 1].to_string(),
            status: if violation_count == 0 { Status::Pass } else { Status::Fail },
            violation_count,
            detail,
        }
    }

    fn missing(check_id: u8, what: &[&str]) -> Self {
        let mut r = Self::new(check_id, 1, format!("missing input: {}", what.join(", ")));
        r.status = Status::Fail;
        r
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

pub const CHECK_NAMES: [&str; 10] = [
    "DOI format",
    "coverage flags match doi_map",
    "DOI uniqueness",
    "native id format",
    "topic references",
    "patent DOI match rate",
    "citation correlation",
    "publication year",
    "spot checks",
    "vignette counts",
];

/// A DOI with the coverage flags it is expected to carry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpotCheck {
    pub doi: String,
    /// Flag column (`has_openalex`) or source (`openalex`) to expected value.
    #[serde(flatten)]
    pub flags: BTreeMap<String, bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckConfig {
    pub id_pattern: String,
    pub patent_sample_size: usize,
    pub patent_min_match: f64,
    pub min_pearson: f64,
    pub max_null_year_rate: f64,
    pub max_invalid_year_rate: f64,
    pub min_year: i64,
    /// Defaults to the current calendar year.
    pub current_year: Option<i64>,
    pub seed: u64,
    pub spot_checks: Vec<SpotCheck>,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            id_pattern: r"^W\d+$".into(),
            patent_sample_size: 10_000,
            patent_min_match: 0.70,
            min_pearson: 0.5,
            max_null_year_rate: 0.05,
            max_invalid_year_rate: 0.001,
            min_year: 1400,
            current_year: None,
            seed: 0,
            spot_checks: Vec::new(),
        }
    }
}

/// Everything the checks read. `None` marks a table that was not found.
#[derive(Debug, Clone, Default)]
pub struct LakeSnapshot {
    pub unified: Option<Vec<UnifiedPaper>>,
    pub doi_map: Option<Vec<DoiMapRow>>,
    /// Source name per coverage flag, as registered.
    pub source_names: BTreeMap<Coverage, String>,
    pub mappings: Option<Vec<Mapping>>,
    pub topic_ids: Option<HashSet<String>>,
    /// (doi, topic_id) assignments; only used for the informational join rate.
    pub assignments: Option<Vec<(String, String)>>,
    /// Raw DOIs of the patent-citation source.
    pub patent_dois: Option<Vec<String>>,
    pub stored_counts: Option<VignetteCounts>,
}

fn rate(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Unified rows keyed by normalized DOI; repeated DOIs merge their flags.
fn by_doi(unified: &[UnifiedPaper]) -> HashMap<String, &UnifiedPaper> {
    let mut m = HashMap::new();
    for p in unified {
        if let Some(d) = normalize_doi(&p.doi) {
            m.entry(d.into_string()).or_insert(p);
        }
    }
    m
}

fn check_doi_format(u: &[UnifiedPaper]) -> CheckResult {
    let bad: Vec<&str> = u.iter().filter(|p| !Doi::is_canonical(&p.doi)).map(|p| p.doi.as_str()).collect();
    let detail = match bad.first() {
        None => format!("{} DOIs canonical", u.len()),
        Some(first) => format!("{} of {} not canonical, e.g. {first}", bad.len(), u.len()),
    };
    CheckResult::new(1, bad.len() as u64, detail)
}

fn check_flags(u: &[UnifiedPaper], map: &[DoiMapRow], names: &BTreeMap<Coverage, String>) -> CheckResult {
    let members: HashSet<(&str, &str)> = map.iter().map(|r| (r.doi.as_str(), r.source.as_str())).collect();
    let mut mismatches = 0u64;
    let mut example = None;
    for p in u {
        let key = normalize_doi(&p.doi).map(Doi::into_string).unwrap_or_else(|| p.doi.clone());
        for c in [Coverage::Openalex, Coverage::S2ag, Coverage::Sciscinet] {
            let in_map = names
                .get(&c)
                .is_some_and(|s| members.contains(&(key.as_str(), s.as_str())));
            if in_map != p.has(c) {
                mismatches += 1;
                example.get_or_insert_with(|| format!("{} {}={}", p.doi, c.flag_column(), p.has(c)));
            }
        }
    }
    let detail = match example {
        None => format!("{} rows x 3 flags consistent", u.len()),
        Some(e) => format!("{mismatches} mismatches, e.g. {e}"),
    };
    CheckResult::new(2, mismatches, detail)
}

fn check_unique(u: &[UnifiedPaper]) -> CheckResult {
    let distinct: HashSet<&str> = u.iter().map(|p| p.doi.as_str()).collect();
    let dup = (u.len() - distinct.len()) as u64;
    CheckResult::new(3, dup, format!("{} distinct of {} rows", distinct.len(), u.len()))
}

fn check_native_ids(
    u: &[UnifiedPaper],
    map: &[DoiMapRow],
    source: Option<&String>,
    pattern: &Regex,
    assignments: Option<&[(String, String)]>,
) -> CheckResult {
    let ids: Vec<&str> = source
        .map(|s| map.iter().filter(|r| &r.source == s).map(|r| r.native_id.as_str()).collect())
        .unwrap_or_default();
    let bad: Vec<&str> = ids.iter().copied().filter(|id| !pattern.is_match(id)).collect();
    let mut detail = match bad.first() {
        None => format!("{} ids match {}", ids.len(), pattern.as_str()),
        Some(e) => format!("{} of {} ids fail {}, e.g. {e}", bad.len(), ids.len(), pattern.as_str()),
    };
    if let Some(a) = assignments {
        let with_topic: HashSet<String> = a
            .iter()
            .filter_map(|(d, _)| normalize_doi(d).map(Doi::into_string))
            .collect();
        let covered: Vec<&UnifiedPaper> = u.iter().filter(|p| p.has_openalex).collect();
        let joined = covered
            .iter()
            .filter(|p| normalize_doi(&p.doi).is_some_and(|d| with_topic.contains(d.as_str())))
            .count() as u64;
        let _ = write!(
            detail,
            "; topic join {:.1}% ({joined}/{})",
            100.0 * rate(joined, covered.len() as u64),
            covered.len()
        );
    }
    CheckResult::new(4, bad.len() as u64, detail)
}

fn check_topics(mappings: &[Mapping], topics: &HashSet<String>) -> CheckResult {
    let orphans: Vec<&Mapping> = mappings.iter().filter(|m| !topics.contains(&m.topic_id)).collect();
    let detail = match orphans.first() {
        None => format!("{} mappings reference known topics", mappings.len()),
        Some(m) => format!("{} mappings with unknown topic, e.g. {}", orphans.len(), m.topic_id),
    };
    CheckResult::new(5, orphans.len() as u64, detail)
}

fn check_patent(u: &HashMap<String, &UnifiedPaper>, raw: &[String], cfg: &CheckConfig) -> CheckResult {
    let mut dois: Vec<String> = raw
        .iter()
        .filter_map(|d| normalize_doi(d).map(Doi::into_string))
        .collect::<HashSet<_>>()
        .into_iter()
        .collect();
    dois.sort();
    if dois.is_empty() {
        return CheckResult::new(6, 1, "no valid patent-citation DOIs".into());
    }
    let sample: Vec<&String> = if dois.len() > cfg.patent_sample_size {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        dois.sample(&mut rng, cfg.patent_sample_size).collect()
    } else {
        dois.iter().collect()
    };
    let hits = sample.iter().filter(|d| u.get(d.as_str()).is_some_and(|p| p.has_openalex)).count();
    let r = rate(hits as u64, sample.len() as u64);
    CheckResult::new(
        6,
        u64::from(r < cfg.patent_min_match),
        format!(
            "match rate {:.1}% ({hits}/{}), minimum {:.1}%",
            100.0 * r,
            sample.len(),
            100.0 * cfg.patent_min_match
        ),
    )
}

fn check_correlation(u: &[UnifiedPaper], cfg: &CheckConfig) -> CheckResult {
    let report = citation_agreement(u);
    if let Some(w) = report.warning {
        return CheckResult::new(7, 3, w);
    }
    let mut failed = 0;
    let mut parts = Vec::new();
    for p in &report.pairs {
        match p.pearson_r {
            Some(r) => {
                if r < cfg.min_pearson {
                    failed += 1;
                }
                parts.push(format!("{}/{} r={r:.3}", p.source_a, p.source_b));
            }
            None => {
                failed += 1;
                parts.push(format!("{}/{} undefined", p.source_a, p.source_b));
            }
        }
    }
    CheckResult::new(
        7,
        failed,
        format!("{} (n={}, minimum {})", parts.join(", "), report.n_complete, cfg.min_pearson),
    )
}

fn check_years(u: &[UnifiedPaper], cfg: &CheckConfig, current_year: i64) -> CheckResult {
    let total = u.len() as u64;
    let nulls = u.iter().filter(|p| p.year.is_none()).count() as u64;
    let max = current_year + 1;
    let invalid = u
        .iter()
        .filter(|p| p.year.is_some_and(|y| y < cfg.min_year || y > max))
        .count() as u64;
    let (nr, ir) = (rate(nulls, total), rate(invalid, total));
    let failed = u64::from(nr > cfg.max_null_year_rate) + u64::from(ir > cfg.max_invalid_year_rate);
    CheckResult::new(
        8,
        failed,
        format!(
            "null {:.2}% (max {:.2}%), outside [{}, {max}] {:.3}% (max {:.3}%)",
            100.0 * nr,
            100.0 * cfg.max_null_year_rate,
            cfg.min_year,
            100.0 * ir,
            100.0 * cfg.max_invalid_year_rate
        ),
    )
}

fn flag_by_name(name: &str) -> Option<Coverage> {
    let bare = name.strip_prefix("has_").unwrap_or(name);
    bare.parse().ok()
}

fn check_spots(u: &HashMap<String, &UnifiedPaper>, spots: &[SpotCheck]) -> CheckResult {
    let mut failed = Vec::new();
    for s in spots {
        let paper = normalize_doi(&s.doi).and_then(|d| u.get(d.as_str()).copied());
        let ok = paper.is_some_and(|p| {
            s.flags
                .iter()
                .all(|(k, v)| flag_by_name(k).is_some_and(|c| p.has(c) == *v))
        });
        if !ok {
            failed.push(s.doi.as_str());
        }
    }
    let detail = if failed.is_empty() {
        format!("{} spot checks hold", spots.len())
    } else {
        format!("{} of {} differ: {}", failed.len(), spots.len(), failed.join(", "))
    };
    CheckResult::new(9, failed.len() as u64, detail)
}

fn check_counts(u: &[UnifiedPaper], stored: &VignetteCounts) -> CheckResult {
    let now = vignette_counts(u);
    let diffs: Vec<String> = now
        .fields()
        .iter()
        .zip(stored.fields())
        .filter(|(a, b)| a.1 != b.1)
        .map(|(a, b)| format!("{} {} vs stored {}", a.0, a.1, b.1))
        .collect();
    let detail = if diffs.is_empty() {
        let f = now.fields();
        f.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(", ")
    } else {
        diffs.join("; ")
    };
    CheckResult::new(10, diffs.len() as u64, detail)
}

/// Year used for the upper bound of the plausible-year window.
pub fn calendar_year() -> i64 {
    time::OffsetDateTime::now_utc().year() as i64
}

/// Run all ten checks. Checks whose inputs are missing fail with
/// "missing input"; the rest still run.
pub fn run_checks(snap: &LakeSnapshot, cfg: &CheckConfig) -> Result<Vec<CheckResult>> {
    let pattern = Regex::new(&cfg.id_pattern)
        .map_err(|e| Error::Config(format!("validate.id_pattern: {e}")))?;
    for s in &cfg.spot_checks {
        if let Some(k) = s.flags.keys().find(|k| flag_by_name(k).is_none()) {
            return Err(Error::Config(format!("spot check {}: unknown flag {k}", s.doi)));
        }
    }
    let current_year = cfg.current_year.unwrap_or_else(calendar_year);
    let u = snap.unified.as_deref();
    let index = u.map(by_doi);
    let mut out = Vec::with_capacity(10);

    out.push(u.map_or_else(|| CheckResult::missing(1, &["unified_papers"]), check_doi_format));
    out.push(match (u, &snap.doi_map) {
        (Some(u), Some(m)) => check_flags(u, m, &snap.source_names),
        _ => CheckResult::missing(2, &["unified_papers", "doi_map"]),
    });
    out.push(u.map_or_else(|| CheckResult::missing(3, &["unified_papers"]), check_unique));
    out.push(match (u, &snap.doi_map) {
        (Some(u), Some(m)) => check_native_ids(
            u,
            m,
            snap.source_names.get(&Coverage::Openalex),
            &pattern,
            snap.assignments.as_deref(),
        ),
        _ => CheckResult::missing(4, &["unified_papers", "doi_map"]),
    });
    out.push(match (&snap.mappings, &snap.topic_ids) {
        (Some(m), Some(t)) => check_topics(m, t),
        _ => CheckResult::missing(5, &["topic_ontology_map", "topics"]),
    });
    out.push(match (&index, &snap.patent_dois) {
        (Some(i), Some(p)) => check_patent(i, p, cfg),
        _ => CheckResult::missing(6, &["unified_papers", "patent source"]),
    });
    out.push(u.map_or_else(|| CheckResult::missing(7, &["unified_papers"]), |u| check_correlation(u, cfg)));
    out.push(u.map_or_else(
        || CheckResult::missing(8, &["unified_papers"]),
        |u| check_years(u, cfg, current_year),
    ));
    out.push(index.as_ref().map_or_else(
        || CheckResult::missing(9, &["unified_papers"]),
        |i| check_spots(i, &cfg.spot_checks),
    ));
    out.push(match (u, &snap.stored_counts) {
        (Some(u), Some(c)) => check_counts(u, c),
        _ => CheckResult::missing(10, &["unified_papers", "vignette_counts"]),
    });
    Ok(out)
}

pub fn render_text(results: &[CheckResult]) -> String {
    let name_w = results.iter().map(|r| r.name.len()).max().unwrap_or(4).max(4);
    let mut s = format!("{:>2}  {:<name_w$}  {:<6}  {:>10}  detail\n", "id", "name", "status", "violations");
    for r in results {
        let _ = writeln!(
            s,
            "{:>2}  {:<name_w$}  {:<6}  {:>10}  {}",
            r.check_id,
            r.name,
            r.status.name(),
            r.violation_count,
            r.detail
        );
    }
    let passed = results.iter().filter(|r| r.passed()).count();
    let _ = writeln!(s, "{passed}/{} checks passed", results.len());
    s
}

pub fn write_report_csv(path: &Path, results: &[CheckResult]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["check_id", "name", "status", "violation_count", "detail"])?;
    for r in results {
        w.write_record([
            r.check_id.to_string(),
            r.name.clone(),
            r.status.name().to_string(),
            r.violation_count.to_string(),
            r.detail.clone(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
