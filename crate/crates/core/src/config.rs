//! Pipeline configuration, read from a single TOML file.
//!
//! Relative paths are resolved against the directory holding the file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::align::{Method, MethodRegistry, OntologyRoute};
use crate::error::{Error, Result};
use crate::eval::{default_quotas, StratumQuota};
use crate::ingest::OntologyFormat;
use crate::link::{validate_registry, Coverage, Cutoffs, SourceSpec, DEFAULT_YEAR_PRECEDENCE};
use crate::stats::DEFAULT_MIN_SUPPORT;
use crate::validate::CheckConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Jsonl,
    Csv,
}

/// One raw file converted into a lake table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IngestSpec {
    /// Lake-relative output table, e.g. `openalex/works`.
    pub table: String,
    pub format: InputFormat,
    pub path: PathBuf,
    /// Recorded in file metadata; defaults to the table's schema directory.
    #[serde(default)]
    pub source: Option<String>,
}

impl IngestSpec {
    pub fn source_name(&self) -> &str {
        self.source
            .as_deref()
            .unwrap_or_else(|| self.table.split('/').next().unwrap_or(&self.table))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OntologySpec {
    pub name: String,
    pub format: OntologyFormat,
    pub path: PathBuf,
    pub method: Method,
    #[serde(default)]
    pub threshold: Option<f64>,
    #[serde(default)]
    pub top_k: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopicsConfig {
    /// Lake table with `topic_id`, `display_name`.
    pub table: String,
    /// Lake table linking papers to topics.
    pub assignments_table: Option<String>,
    pub doi_column: String,
    pub topic_column: String,
}

impl Default for TopicsConfig {
    fn default() -> Self {
        Self {
            table: "openalex/topics".into(),
            assignments_table: None,
            doi_column: "doi".into(),
            topic_column: "topic_id".into(),
        }
    }
}

/// Vector files for embedding routes. Relative to the config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorsConfig {
    pub topics: PathBuf,
    pub terms: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkConfig {
    pub year_precedence: Vec<String>,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            year_precedence: DEFAULT_YEAR_PRECEDENCE.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    F32,
    F64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlignConfig {
    /// Lowest similarity kept in candidate tables used for sweeps.
    pub candidate_floor: f64,
    /// Methods also run over every ontology, for comparison.
    pub baselines: Vec<Method>,
    pub precision: Precision,
}

impl Default for AlignConfig {
    fn default() -> Self {
        Self {
            candidate_floor: 0.60,
            baselines: Vec::new(),
            precision: Precision::F32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub quotas: Vec<StratumQuota>,
    /// Labelled gold file; scoring is skipped when absent.
    pub gold: Option<PathBuf>,
    /// Overrides the top-level seed.
    pub seed: Option<u64>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            quotas: default_quotas(),
            gold: None,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsConfig {
    pub min_support: u64,
}

impl Default for StatsConfig {
    fn default() -> Self {
        Self {
            min_support: DEFAULT_MIN_SUPPORT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub lake_root: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub ingest: Vec<IngestSpec>,
    #[serde(default)]
    pub sources: Vec<SourceSpec>,
    #[serde(default)]
    pub ontologies: Vec<OntologySpec>,
    #[serde(default)]
    pub topics: TopicsConfig,
    #[serde(default)]
    pub vectors: Option<VectorsConfig>,
    #[serde(default)]
    pub cutoffs: Cutoffs,
    #[serde(default)]
    pub link: LinkConfig,
    #[serde(default)]
    pub align: AlignConfig,
    #[serde(default)]
    pub eval: EvalConfig,
    #[serde(default)]
    pub validate: CheckConfig,
    #[serde(default)]
    pub stats: StatsConfig,
}

impl PipelineConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.resolve(base_dir);
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.lake_root);
        self.ingest.iter_mut().for_each(|i| fix(&mut i.path));
        self.ontologies.iter_mut().for_each(|o| fix(&mut o.path));
        if let Some(v) = &mut self.vectors {
            fix(&mut v.topics);
            fix(&mut v.terms);
        }
        if let Some(g) = &mut self.eval.gold {
            fix(g);
        }
    }

    /// Structural checks that need no input files.
    pub fn check(&self) -> Result<()> {
        validate_registry(&self.sources)?;
        let registry = self.method_registry();
        registry.validate(self.ontologies.iter().map(|o| o.name.as_str()))?;
        if registry.needs_vectors() && self.vectors.is_none() {
            return Err(Error::Config("an ontology is routed to embedding but [vectors] is missing".into()));
        }
        if self.align.baselines.contains(&Method::Embedding) && self.vectors.is_none() {
            return Err(Error::Config("embedding baseline requires [vectors]".into()));
        }
        if !(0.0..=1.0).contains(&self.align.candidate_floor) {
            return Err(Error::Config("align.candidate_floor outside [0, 1]".into()));
        }
        let mut tables: Vec<&str> = self.ingest.iter().map(|i| i.table.as_str()).collect();
        tables.sort_unstable();
        if let Some(w) = tables.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Config(format!("table {} ingested twice", w[0])));
        }
        for i in &self.ingest {
            if i.table.split('/').count() != 2 || i.table.split('/').any(str::is_empty) {
                return Err(Error::Config(format!("ingest table {} must be <schema>/<table>", i.table)));
            }
        }
        Ok(())
    }

    /// Input files the run will read; all must exist before any work starts.
    pub fn input_paths(&self) -> Vec<&Path> {
        let mut out: Vec<&Path> = self.ingest.iter().map(|i| i.path.as_path()).collect();
        out.extend(self.ontologies.iter().map(|o| o.path.as_path()));
        out
    }

    pub fn check_inputs(&self) -> Result<()> {
        match self.input_paths().into_iter().find(|p| !p.exists()) {
            Some(p) => Err(Error::Config(format!("input {} does not exist", p.display()))),
            None => Ok(()),
        }
    }

    pub fn method_registry(&self) -> MethodRegistry {
        MethodRegistry {
            routes: self
                .ontologies
                .iter()
                .map(|o| OntologyRoute {
                    ontology: o.name.clone(),
                    method: o.method,
                    threshold: o.threshold,
                    top_k: o.top_k,
                })
                .collect(),
        }
    }

    /// Registered source for a coverage flag.
    pub fn source_for(&self, c: Coverage) -> Option<&SourceSpec> {
        self.sources.iter().find(|s| s.coverage().ok() == Some(c))
    }

    pub fn eval_seed(&self) -> u64 {
        self.eval.seed.unwrap_or(self.seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
lake_root = "lake"
seed = 7

[[ingest]]
table = "openalex/works"
format = "jsonl"
path = "raw/works.jsonl"

[[sources]]
name = "openalex"
table_path = "openalex/works"
doi_column = "doi"

[[ontologies]]
name = "go"
format = "obo"
path = "raw/go.obo"
method = "jaro_winkler"
threshold = 0.9

[validate]
patent_min_match = 0.5

[[validate.spot_checks]]
doi = "10.1000/1"
has_openalex = true
"#;

    #[test]
    fn parses_and_resolves_paths() {
        let cfg = PipelineConfig::from_toml(MINIMAL, Path::new("/base")).unwrap();
        assert_eq!(cfg.lake_root, PathBuf::from("/base/lake"));
        assert_eq!(cfg.ingest[0].path, PathBuf::from("/base/raw/works.jsonl"));
        assert_eq!(cfg.ingest[0].source_name(), "openalex");
        assert_eq!(cfg.method_registry().get("go").unwrap().threshold(), 0.9);
        assert_eq!(cfg.validate.patent_min_match, 0.5);
        assert_eq!(cfg.validate.min_pearson, 0.5);
        assert!(cfg.validate.spot_checks[0].flags["has_openalex"]);
        assert_eq!(cfg.eval.quotas, default_quotas());
        assert_eq!(cfg.eval_seed(), 7);
        assert_eq!(cfg.cutoffs, Cutoffs::default());
    }

    #[test]
    fn unknown_keys_are_config_errors() {
        let text = MINIMAL.replace("seed = 7", "seed = 7\nsede = 8");
        assert!(matches!(PipelineConfig::from_toml(&text, Path::new(".")), Err(Error::Config(_))));
    }

    #[test]
    fn embedding_route_needs_vectors() {
        let text = MINIMAL.replace("jaro_winkler", "embedding");
        let err = PipelineConfig::from_toml(&text, Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("[vectors]"), "{err}");
        let text = format!("{text}\n[vectors]\ntopics = \"t.parquet\"\nterms = \"v.parquet\"\n");
        assert!(PipelineConfig::from_toml(&text, Path::new(".")).is_ok());
    }

    #[test]
    fn missing_inputs_are_reported() {
        let cfg = PipelineConfig::from_toml(MINIMAL, Path::new("/nonexistent")).unwrap();
        assert!(cfg.check_inputs().unwrap_err().to_string().contains("works.jsonl"));
    }
}
