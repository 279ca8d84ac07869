//! `scilake`: run lake pipeline stages from a TOML config.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use scilake::config::PipelineConfig;
use scilake::pipeline::{self, Stage, StageReport};
use scilake::schema_report;
use scilake::Error;
use tracing_subscriber::EnvFilter;

/// Lake root used when neither `--lake` nor a config names one.
const LAKE_ENV: &str = "SCILAKE_LAKE";

#[derive(Parser)]
#[command(name = "scilake", version, about = "Build, align and check a multi-source scholarly data lake")]
struct Cli {
    /// Pipeline config (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Lake root; overrides the config's `lake_root`.
    #[arg(long, global = true)]
    lake: Option<PathBuf>,
    /// Seed for every sampled step; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Convert raw source files and ontologies to Parquet.
    Ingest,
    /// Build the DOI map, unified papers, temporal flags and intersections.
    Link,
    /// Align topics to ontology terms.
    Align,
    /// Write the gold template and score against gold labels when configured.
    Eval,
    /// Run the ten lake checks; exits 1 if any fails.
    Validate,
    /// Compute the analysis vignettes.
    Stats,
    /// Describe every table in the lake.
    SchemaReport,
    /// Run every stage in dependency order.
    All,
}

impl Command {
    fn stages(&self) -> Option<Vec<Stage>> {
        Some(match self {
            Command::Ingest => vec![Stage::Ingest],
            Command::Link => vec![Stage::Link],
            Command::Align => vec![Stage::Align],
            Command::Eval => vec![Stage::Eval],
            Command::Validate => vec![Stage::Validate],
            Command::Stats => vec![Stage::Stats],
            Command::All => Stage::ORDER.to_vec(),
            Command::SchemaReport => return None,
        })
    }
}

enum Failure {
    Config(String),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) => Failure::Config(e.to_string()),
            other => Failure::Run(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .with_target(false)
        .init();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Run(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}

fn load_config(cli: &Cli) -> Result<PipelineConfig, Failure> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| Failure::Config("--config is required for this command".into()))?;
    let mut cfg = PipelineConfig::load(path)?;
    if let Some(lake) = &cli.lake {
        cfg.lake_root = lake.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
        cfg.eval.seed = Some(seed);
        cfg.validate.seed = seed;
    }
    Ok(cfg)
}

fn lake_root(cli: &Cli) -> Result<PathBuf, Failure> {
    if let Some(l) = &cli.lake {
        return Ok(l.clone());
    }
    if cli.config.is_some() {
        return Ok(load_config(cli)?.lake_root);
    }
    std::env::var_os(LAKE_ENV)
        .map(PathBuf::from)
        .ok_or_else(|| Failure::Config(format!("no lake root: pass --lake, --config or set {LAKE_ENV}")))
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Config(format!("--threads: {e}")))?;
    }
    let Some(stages) = cli.command.stages() else {
        let root = lake_root(cli)?;
        let report = schema_report::schema_report(&root)?;
        match cli.format {
            Format::Text => print!("{}", schema_report::render_text(&report)),
            Format::Json => println!("{}", to_json(&report)?),
        }
        return Ok(true);
    };
    let cfg = load_config(cli)?;
    let reports = pipeline::run_stages(&cfg, &stages)?;
    match cli.format {
        Format::Text => print_text(&cfg.lake_root, &reports),
        Format::Json => println!("{}", to_json(&reports)?),
    }
    let ok = reports.len() == stages.len() && reports.iter().all(|r| r.ok);
    Ok(ok)
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(v).map_err(|e| Failure::Run(e.to_string()))
}

fn print_text(lake_root: &Path, reports: &[StageReport]) {
    for r in reports {
        let status = if r.ok { "ok" } else { "FAILED" };
        println!("{:<9} {status:<6} rows={} {}ms", r.stage.name(), r.rows, r.elapsed_ms);
        if r.stage == Stage::Validate {
            if let Ok(t) = std::fs::read_to_string(lake_root.join(pipeline::VALIDATION_TXT)) {
                print!("{t}");
            }
        }
    }
}
