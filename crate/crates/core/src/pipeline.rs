//! The pipeline stages over a configured lake.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs::OpenOptions;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::align::{
    self, candidates_table, match_ontology, read_mappings, read_topics, read_vectors, run_hybrid,
    write_coverage_summary, write_mappings, LabelIndex, Mapping, Method, Topic, Vectors,
};
use crate::config::{InputFormat, PipelineConfig, Precision};
use crate::error::{Error, Result};
use crate::eval::{default_thresholds, pr_sweep, read_gold, score_at, score_strict, stratified_sample, write_gold, write_sweep};
use crate::ingest::{self, convert_csv, convert_jsonl, ontology_table, CsvOptions, JsonlOptions};
use crate::lake;
use crate::link::{self, read_doi_map, read_unified, Coverage};
use crate::scalar::Real;
use crate::stats::{self, compute_vignettes, read_counts, write_json, VIGNETTE_COUNTS};
use crate::validate::{self, run_checks, CheckResult, LakeSnapshot};

/// Routed method output before tier filtering.
pub const ROUTED_CANDIDATES: &str = "align/candidates_routed";
pub const GOLD_TEMPLATE: &str = "eval/gold_template.csv";
pub const EVAL_SUMMARY: &str = "eval/summary.json";
pub const VALIDATION_CSV: &str = "reports/validation.csv";
pub const VALIDATION_TXT: &str = "reports/validation.txt";
pub const AGREEMENT_JSON: &str = "reports/citation_agreement.json";
pub const LOCK_FILE: &str = ".scilake.lock";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Ingest,
    Link,
    Align,
    Eval,
    Stats,
    Validate,
}

impl Stage {
    /// Dependency order used by `all`.
    pub const ORDER: [Stage; 6] = [
        Stage::Ingest,
        Stage::Link,
        Stage::Align,
        Stage::Eval,
        Stage::Stats,
        Stage::Validate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Link => "link",
            Stage::Align => "align",
            Stage::Eval => "eval",
            Stage::Stats => "stats",
            Stage::Validate => "validate",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ORDER
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown stage {s}")))
    }
}

/// Result of one stage. `ok` is false only for failed validation checks;
/// other failures are errors.
#[derive(Debug, Clone, Serialize)]
pub struct StageReport {
    pub stage: Stage,
    pub ok: bool,
    pub rows: u64,
    #[serde(skip)]
    pub elapsed_ms: u128,
    pub detail: Value,
}

/// Exclusive hold on a lake root for one run; released on drop.
#[derive(Debug)]
pub struct LakeLock {
    path: PathBuf,
}

impl LakeLock {
    pub fn acquire(lake_root: &Path) -> Result<Self> {
        std::fs::create_dir_all(lake_root).map_err(|e| Error::io(lake_root, e))?;
        let path = lake_root.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                use std::io::Write;
                let _ = writeln!(f, "{}", std::process::id());
                Ok(Self { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(Error::invalid(format!(
                "{} is locked by another run (remove {} if stale)",
                lake_root.display(),
                path.display()
            ))),
            Err(e) => Err(Error::io(&path, e)),
        }
    }
}

impl Drop for LakeLock {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.path);
    }
}

fn table(cfg: &PipelineConfig, name: &str) -> PathBuf {
    lake::table_file(&cfg.lake_root, name)
}

fn read_if_exists<T>(path: &Path, read: impl FnOnce(&Path) -> Result<T>) -> Result<Option<T>> {
    if path.exists() {
        read(path).map(Some)
    } else {
        Ok(None)
    }
}

pub fn run_stage(cfg: &PipelineConfig, stage: Stage) -> Result<StageReport> {
    let start = Instant::now();
    tracing::info!(stage = %stage, "stage started");
    let (ok, rows, detail) = match stage {
        Stage::Ingest => ingest_stage(cfg)?,
        Stage::Link => link_stage(cfg)?,
        Stage::Align => match cfg.align.precision {
            Precision::F32 => align_stage::<f32>(cfg)?,
            Precision::F64 => align_stage::<f64>(cfg)?,
        },
        Stage::Eval => eval_stage(cfg)?,
        Stage::Stats => stats_stage(cfg)?,
        Stage::Validate => validate_stage(cfg)?,
    };
    let elapsed_ms = start.elapsed().as_millis();
    tracing::info!(stage = %stage, rows, elapsed_ms, ok, "stage finished");
    Ok(StageReport {
        stage,
        ok,
        rows,
        elapsed_ms,
        detail,
    })
}

/// Run stages in order under the lake lock, stopping at the first error or
/// failed stage.
pub fn run_stages(cfg: &PipelineConfig, stages: &[Stage]) -> Result<Vec<StageReport>> {
    if stages.contains(&Stage::Ingest) {
        cfg.check_inputs()?;
    }
    let _lock = LakeLock::acquire(&cfg.lake_root)?;
    let mut out = Vec::with_capacity(stages.len());
    for &stage in stages {
        let report = run_stage(cfg, stage)?;
        let ok = report.ok;
        out.push(report);
        if !ok {
            break;
        }
    }
    Ok(out)
}

pub fn run_all(cfg: &PipelineConfig) -> Result<Vec<StageReport>> {
    run_stages(cfg, &Stage::ORDER)
}

type Outcome = (bool, u64, Value);

fn ingest_stage(cfg: &PipelineConfig) -> Result<Outcome> {
    cfg.check_inputs()?;
    let tables: Vec<(String, ingest::ConversionReport)> = cfg
        .ingest
        .par_iter()
        .map(|spec| {
            let out = table(cfg, &spec.table);
            let report = match spec.format {
                InputFormat::Jsonl => convert_jsonl(
                    &spec.path,
                    None,
                    &out,
                    &JsonlOptions {
                        source: spec.source_name().to_string(),
                        ..JsonlOptions::default()
                    },
                )?,
                InputFormat::Csv => convert_csv(
                    &spec.path,
                    &out,
                    &CsvOptions {
                        source: spec.source_name().to_string(),
                        ..CsvOptions::default()
                    },
                )?,
            };
            tracing::info!(table = %spec.table, rows = report.rows_written, rejected = report.rows_rejected, "converted");
            Ok((spec.table.clone(), report))
        })
        .collect::<Result<_>>()?;
    let ontologies: Vec<(String, usize, BTreeMap<String, u64>)> = cfg
        .ontologies
        .par_iter()
        .map(|o| {
            let parsed = ingest::parse_ontology(&o.path, o.format, &o.name)?;
            ingest::write_ontology(&cfg.lake_root, &o.name, &parsed)?;
            tracing::info!(ontology = %o.name, terms = parsed.terms.len(), edges = parsed.edges.len(), "parsed");
            Ok((o.name.clone(), parsed.terms.len(), parsed.rejected))
        })
        .collect::<Result<_>>()?;
    link::write_views(&cfg.lake_root)?;

    let rows = tables.iter().map(|(_, r)| r.rows_written).sum::<u64>()
        + ontologies.iter().map(|(_, n, _)| *n as u64).sum::<u64>();
    let detail = json!({
        "tables": tables.iter().map(|(t, r)| json!({
            "table": t,
            "rows_read": r.rows_read,
            "rows_written": r.rows_written,
            "rows_rejected": r.rows_rejected,
            "reject_reasons": r.reject_reasons,
        })).collect::<Vec<_>>(),
        "ontologies": ontologies.iter().map(|(o, n, rej)| json!({
            "ontology": o, "terms": n, "rejected": rej,
        })).collect::<Vec<_>>(),
    });
    Ok((true, rows, detail))
}

fn link_stage(cfg: &PipelineConfig) -> Result<Outcome> {
    let summary = link::link_lake(&cfg.lake_root, &cfg.sources, &cfg.link.year_precedence, cfg.cutoffs)?;
    for s in &summary.sources {
        tracing::info!(source = %s.source, records = s.records, linked = s.linked, excluded = s.excluded, "linked");
    }
    Ok((true, summary.unified.rows, serde_json::to_value(&summary)?))
}

fn load_ontologies(cfg: &PipelineConfig) -> Result<Vec<(String, Vec<ingest::OntologyTerm>)>> {
    cfg.ontologies
        .iter()
        .map(|o| {
            let path = table(cfg, &ontology_table(&o.name, "terms"));
            if !path.exists() {
                return Err(Error::MissingTable {
                    source_name: o.name.clone(),
                    path,
                });
            }
            Ok((o.name.clone(), ingest::read_terms(&path)?))
        })
        .collect()
}

fn load_vectors<T: Real>(cfg: &PipelineConfig) -> Result<Option<Vectors<T>>> {
    let needed = cfg.method_registry().needs_vectors() || cfg.align.baselines.contains(&Method::Embedding);
    match (&cfg.vectors, needed) {
        (Some(v), true) => Ok(Some(Vectors {
            topics: read_vectors(&v.topics)?,
            terms: read_vectors(&v.terms)?,
        })),
        _ => Ok(None),
    }
}

fn align_stage<T: Real>(cfg: &PipelineConfig) -> Result<Outcome> {
    let topics: Vec<Topic> = read_topics(&table(cfg, &cfg.topics.table))?;
    let ontologies = load_ontologies(cfg)?;
    let indexes: Vec<LabelIndex> = ontologies.iter().map(|(n, t)| LabelIndex::new(n, t)).collect();

    lake::write_batch(&table(cfg, align::LABELS_TOPICS), &align::labels_topics_batch(&topics)?, "align")?;
    let refs: Vec<&LabelIndex> = indexes.iter().collect();
    lake::write_batch(&table(cfg, align::LABELS_TERMS), &align::labels_terms_batch(&refs)?, "align")?;

    let vectors = load_vectors::<T>(cfg)?;
    let floor = cfg.align.candidate_floor;
    let out = run_hybrid(&topics, &ontologies, &cfg.method_registry(), vectors.as_ref(), floor)?;
    write_mappings(&table(cfg, align::TOPIC_ONTOLOGY_MAP), &out.mappings)?;
    write_mappings(&table(cfg, ROUTED_CANDIDATES), &out.candidates)?;
    write_coverage_summary(&table(cfg, align::COVERAGE_SUMMARY), &out.coverage)?;
    tracing::info!(mappings = out.mappings.len(), candidates = out.candidates.len(), "aligned");

    let mut baselines = BTreeMap::new();
    for &method in &cfg.align.baselines {
        let mut found: Vec<Mapping> = Vec::new();
        for index in &indexes {
            found.extend(match_ontology(method, &topics, index, floor, method.default_top_k(), vectors.as_ref())?);
        }
        align::sort_mappings(&mut found);
        write_mappings(&table(cfg, &candidates_table(method)), &found)?;
        tracing::info!(method = %method, candidates = found.len(), "baseline");
        baselines.insert(method.name(), found.len());
    }
    link::write_views(&cfg.lake_root)?;
    let detail = json!({
        "topics": topics.len(),
        "term_strings": indexes.iter().map(|i| i.len()).sum::<usize>(),
        "mappings": out.mappings.len(),
        "candidates": out.candidates.len(),
        "coverage": out.coverage,
        "baselines": baselines,
    });
    Ok((true, out.mappings.len() as u64, detail))
}

fn eval_stage(cfg: &PipelineConfig) -> Result<Outcome> {
    let mappings = read_mappings(&table(cfg, align::TOPIC_ONTOLOGY_MAP))?;
    let template = stratified_sample(&mappings, &cfg.eval.quotas, cfg.eval_seed())?;
    write_gold(&cfg.lake_root.join(GOLD_TEMPLATE), &template)?;
    tracing::info!(rows = template.len(), "gold template written");

    let mut detail = json!({ "template_rows": template.len() });
    if let Some(gold_path) = &cfg.eval.gold {
        let gold = read_gold(gold_path, true)?;
        let thresholds = default_thresholds();
        let routed = read_mappings(&table(cfg, ROUTED_CANDIDATES))?;
        let mut scores = serde_json::Map::new();
        scores.insert("routed".into(), serde_json::to_value(score_strict(&mappings, &gold)?)?);
        write_sweep(&cfg.lake_root.join("eval/sweep_routed.csv"), &pr_sweep(&routed, &gold, &thresholds)?)?;
        for &method in &cfg.align.baselines {
            let cands = read_mappings(&table(cfg, &candidates_table(method)))?;
            let at_default = score_at(&cands, &gold, method.default_threshold())?;
            scores.insert(method.name().into(), serde_json::to_value(at_default)?);
            let sweep = pr_sweep(&cands, &gold, &thresholds)?;
            write_sweep(&cfg.lake_root.join(format!("eval/sweep_{}.csv", method.name())), &sweep)?;
        }
        write_json(&cfg.lake_root.join(EVAL_SUMMARY), &scores)?;
        detail["gold_pairs"] = json!(gold.len());
        detail["scores"] = Value::Object(scores);
    }
    Ok((true, template.len() as u64, detail))
}

/// `(doi, topic_id)` pairs from the configured assignments table.
pub fn read_assignments(cfg: &PipelineConfig) -> Result<Option<Vec<(String, String)>>> {
    let Some(name) = &cfg.topics.assignments_table else {
        return Ok(None);
    };
    read_if_exists(&table(cfg, name), |p| {
        let batch = lake::read_table(p)?;
        let dois = lake::string_column(&batch, name, &cfg.topics.doi_column)?;
        let topics = lake::string_column(&batch, name, &cfg.topics.topic_column)?;
        Ok(dois
            .into_iter()
            .zip(topics)
            .filter_map(|(d, t)| Some((d?, t?)))
            .collect())
    })
}

fn stats_stage(cfg: &PipelineConfig) -> Result<Outcome> {
    let papers = read_unified(&table(cfg, link::UNIFIED_PAPERS))?;
    let assignments = read_assignments(cfg)?.unwrap_or_default();
    let mappings = read_if_exists(&table(cfg, align::TOPIC_ONTOLOGY_MAP), read_mappings)?.unwrap_or_default();
    let v = compute_vignettes(&papers, &assignments, &mappings, cfg.stats.min_support);
    stats::write_vignettes(&cfg.lake_root, &v)?;
    Ok((true, papers.len() as u64, serde_json::to_value(v.counts)?))
}

/// Read everything the checks need; absent tables stay `None`.
pub fn load_snapshot(cfg: &PipelineConfig) -> Result<LakeSnapshot> {
    let source_names = cfg
        .sources
        .iter()
        .filter_map(|s| Some((s.coverage().ok()?, s.name.clone())))
        .collect();
    let patent_dois = match cfg.source_for(Coverage::Patent) {
        Some(spec) => read_if_exists(&table(cfg, &spec.table_path), |p| {
            let batch = lake::read_table(p)?;
            Ok(lake::string_column(&batch, &spec.name, &spec.doi_column)?
                .into_iter()
                .flatten()
                .collect())
        })?,
        None => None,
    };
    let topic_ids = read_if_exists(&table(cfg, &cfg.topics.table), |p| {
        Ok(read_topics(p)?.into_iter().map(|t| t.topic_id).collect::<HashSet<_>>())
    })?;
    Ok(LakeSnapshot {
        unified: read_if_exists(&table(cfg, link::UNIFIED_PAPERS), read_unified)?,
        doi_map: read_if_exists(&table(cfg, link::DOI_MAP), read_doi_map)?,
        source_names,
        mappings: read_if_exists(&table(cfg, align::TOPIC_ONTOLOGY_MAP), read_mappings)?,
        topic_ids,
        assignments: read_assignments(cfg)?,
        patent_dois,
        stored_counts: read_if_exists(&cfg.lake_root.join(VIGNETTE_COUNTS), read_counts)?,
    })
}

/// Check settings with the OpenAlex source's own id pattern, when given.
pub fn check_config(cfg: &PipelineConfig) -> validate::CheckConfig {
    let mut c = cfg.validate.clone();
    if let Some(p) = cfg.source_for(Coverage::Openalex).and_then(|s| s.id_pattern.clone()) {
        c.id_pattern = p;
    }
    if c.seed == 0 {
        c.seed = cfg.seed;
    }
    c
}

pub fn validate_lake(cfg: &PipelineConfig) -> Result<Vec<CheckResult>> {
    let snap = load_snapshot(cfg)?;
    let results = run_checks(&snap, &check_config(cfg))?;
    validate::write_report_csv(&cfg.lake_root.join(VALIDATION_CSV), &results)?;
    let txt = cfg.lake_root.join(VALIDATION_TXT);
    std::fs::write(&txt, validate::render_text(&results)).map_err(|e| Error::io(&txt, e))?;
    if let Some(u) = &snap.unified {
        write_json(&cfg.lake_root.join(AGREEMENT_JSON), &validate::citation_agreement(u))?;
    }
    for r in results.iter().filter(|r| !r.passed()) {
        tracing::warn!(check = r.check_id, name = %r.name, violations = r.violation_count, detail = %r.detail, "check failed");
    }
    Ok(results)
}

fn validate_stage(cfg: &PipelineConfig) -> Result<Outcome> {
    let results = validate_lake(cfg)?;
    let ok = results.iter().all(CheckResult::passed);
    let violations = results.iter().map(|r| r.violation_count).sum();
    Ok((ok, violations, serde_json::to_value(&results)?))
}

/// Every file under the lake root except the lock, sorted.
pub fn output_files(lake_root: &Path) -> Result<Vec<PathBuf>> {
    fn walk(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
        for e in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
            let p = e.map_err(|e| Error::io(dir, e))?.path();
            if p.is_dir() {
                walk(&p, out)?;
            } else if p.file_name().is_some_and(|n| n != LOCK_FILE) {
                out.push(p);
            }
        }
        Ok(())
    }
    let mut out = Vec::new();
    walk(lake_root, &mut out)?;
    out.sort();
    Ok(out)
}
