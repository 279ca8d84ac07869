//! Deterministic synthetic lake: raw source dumps, three small ontologies,
//! planted embedding vectors, a labelled gold file and a ready config.
//!
//! Used by the test suites and for trying the pipeline without real dumps.
//! [`inject`] plants the defects the validation checks are meant to catch.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use arrow_array::{ArrayRef, RecordBatch};
use arrow_select::concat::concat_batches;
use rand::seq::SliceRandom;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde_json::json;

use crate::align::{term_label_id, write_vectors, EmbeddingSet};
use crate::error::{Error, Result};
use crate::eval::{write_gold, GoldPair, Label, Stratum};
use crate::{lake, link};

#[derive(Debug, Clone)]
pub struct SynthOptions {
    pub papers: usize,
    pub topics: usize,
    pub dimension: usize,
    pub seed: u64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self {
            papers: 1000,
            topics: 60,
            dimension: 128,
            seed: 7,
        }
    }
}

/// Where things were written, plus facts the tests lean on.
#[derive(Debug, Clone)]
pub struct SynthLake {
    pub dir: PathBuf,
    pub config_path: PathBuf,
    pub lake_root: PathBuf,
    /// Canonical DOIs named in the spot checks.
    pub spot_dois: Vec<String>,
    pub gold_pairs: usize,
}

const ADJECTIVES: [&str; 10] = [
    "soil", "marine", "neural", "quantum", "urban", "protein", "climate", "cell", "graph", "signal",
];
const NOUNS: [&str; 8] = [
    "chemistry", "ecology", "networks", "dynamics", "genomics", "imaging", "modeling", "theory",
];
const GO_SUFFIXES: [&str; 6] = ["process", "activity", "pathway", "complex", "regulation", "response"];
const FILLER: [&str; 12] = [
    "lorem", "ipsum", "dolor", "amet", "tempor", "magna", "aliqua", "minim", "veniam", "nostrud",
    "ullamco", "laboris",
];

/// Similarity targets per planted term, one list per stratum, kept clear of
/// band edges so f32 storage cannot move a pair across strata.
const PLANTED: [(Stratum, f64, f64, usize); 4] = [
    (Stratum::Exact, 0.955, 0.995, 1),
    (Stratum::High, 0.86, 0.94, 2),
    (Stratum::Mid, 0.76, 0.84, 2),
    (Stratum::Borderline, 0.66, 0.74, 1),
];

fn doi(i: usize) -> String {
    format!("10.5555/sl.{i:05}")
}

fn topic_name(k: usize) -> String {
    let a = ADJECTIVES[k % ADJECTIVES.len()];
    let n = NOUNS[(k / ADJECTIVES.len() + k) % NOUNS.len()];
    format!("{a} {n}")
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, body).map_err(|e| Error::io(path, e))
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

struct Paper {
    year: Option<i64>,
    base: f64,
    in_openalex: bool,
    in_s2ag: bool,
    in_sciscinet: bool,
    in_pwc: bool,
    in_retraction: bool,
    in_patent: bool,
    topic: usize,
}

fn noisy(rng: &mut ChaCha8Rng, base: f64) -> i64 {
    let n = Normal::new(0.0, 0.15).expect("valid sd");
    (base * f64::exp(n.sample(rng))).round() as i64
}

fn unit(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    let n = Normal::new(0.0, 1.0).expect("valid sd");
    let v: Vec<f64> = (0..d).map(|_| n.sample(rng)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / norm).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Remove the components along each of `basis` (assumed orthonormal) and renormalize.
fn orthogonalize(mut v: Vec<f64>, basis: &[&[f64]]) -> Vec<f64> {
    for b in basis {
        let p = dot(&v, b);
        v.iter_mut().zip(b.iter()).for_each(|(x, y)| *x -= p * y);
    }
    let norm = dot(&v, &v).sqrt();
    v.into_iter().map(|x| x / norm).collect()
}

/// Vector at cosine `s` from the unit vector `u`, scaled by `scale`.
fn at_similarity(rng: &mut ChaCha8Rng, u: &[f64], s: f64, scale: f64) -> Vec<f32> {
    let w = orthogonalize(unit(rng, u.len()), &[u]);
    let c = (1.0 - s * s).sqrt();
    u.iter().zip(&w).map(|(a, b)| ((s * a + c * b) * scale) as f32).collect()
}

/// Generate the fixture under `dir` (created if needed). Same options give
/// byte-identical files.
pub fn generate(dir: &Path, opts: &SynthOptions) -> Result<SynthLake> {
    if opts.topics > opts.dimension {
        return Err(Error::invalid("synthetic topics need dimension >= topics"));
    }
    if opts.topics > ADJECTIVES.len() * NOUNS.len() {
        return Err(Error::invalid("too many synthetic topics"));
    }
    let raw = dir.join("raw");
    std::fs::create_dir_all(&raw).map_err(|e| Error::io(&raw, e))?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let log_base = Normal::new(2.5, 1.2).expect("valid sd");
    let papers: Vec<Paper> = (0..opts.papers)
        .map(|_| Paper {
            year: Some(rng.random_range(1990..=2023)),
            base: f64::exp(log_base.sample(&mut rng)),
            in_openalex: rng.random_bool(0.95),
            in_s2ag: rng.random_bool(0.80),
            in_sciscinet: rng.random_bool(0.70),
            in_pwc: rng.random_bool(0.12),
            in_retraction: rng.random_bool(0.04),
            in_patent: rng.random_bool(0.10),
            topic: rng.random_range(0..opts.topics),
        })
        .collect();

    // Spot-check DOIs: the first papers with a given membership pattern.
    let spot: Vec<usize> = (0..papers.len())
        .filter(|&i| papers[i].in_openalex && papers[i].in_s2ag && papers[i].in_sciscinet)
        .take(3)
        .chain((0..papers.len()).filter(|&i| !papers[i].in_openalex).take(1))
        .chain((0..papers.len()).filter(|&i| papers[i].in_pwc && papers[i].in_openalex).take(1))
        .collect();

    let cd5 = Normal::new(0.0, 0.1).expect("valid sd");
    let fwci_noise = Normal::new(0.0, 0.2).expect("valid sd");

    // openalex: JSON Lines with resolver-prefixed DOIs, 2% null years, one DOI-less record
    let mut body = String::new();
    for (i, p) in papers.iter().enumerate() {
        if !p.in_openalex {
            continue;
        }
        let year = if rng.random_bool(0.02) && !spot.contains(&i) { None } else { p.year };
        let fwci = (p.base + 1.0) / 15.0 * f64::exp(fwci_noise.sample(&mut rng));
        let rec = json!({
            "id": format!("W{}", 2_000_000 + i),
            "doi": format!("https://doi.org/{}", doi(i)),
            "publication_year": year,
            "cited_by_count": noisy(&mut rng, p.base),
            "fwci": (fwci * 1000.0).round() / 1000.0,
            "authorships": [{"author": {"display_name": format!("Author {}", i % 97)}}],
        });
        let _ = writeln!(body, "{rec}");
    }
    let _ = writeln!(body, "{}", json!({"id": "W1", "doi": null, "publication_year": 2001, "cited_by_count": 3, "fwci": 0.2, "authorships": []}));
    write_file(&raw.join("openalex_works.jsonl"), &body)?;

    // s2ag: uppercase DOIs, integer corpus ids, one unusable DOI
    let mut body = String::new();
    for (i, p) in papers.iter().enumerate() {
        if p.in_s2ag {
            let rec = json!({
                "corpusid": 500_000 + i,
                "doi": doi(i).to_uppercase(),
                "year": p.year,
                "citationcount": noisy(&mut rng, p.base),
            });
            let _ = writeln!(body, "{rec}");
        }
    }
    let _ = writeln!(body, "{}", json!({"corpusid": 1, "doi": "n/a", "year": 1999, "citationcount": 0}));
    write_file(&raw.join("s2ag_papers.jsonl"), &body)?;

    // sciscinet: CSV with cd5, one repeated DOI, one out-of-range cd5
    let mut rows = Vec::new();
    for (i, p) in papers.iter().enumerate() {
        if p.in_sciscinet {
            let shift: f64 = if p.in_pwc { 0.02 } else { 0.0 };
            let d = (cd5.sample(&mut rng) + shift).clamp(-1.0, 1.0);
            rows.push(vec![
                format!("S{i}"),
                doi(i),
                p.year.map(|y| y.to_string()).unwrap_or_default(),
                noisy(&mut rng, p.base).to_string(),
                format!("{d:.4}"),
            ]);
        }
    }
    if let Some(first) = rows.first().cloned() {
        rows.push(vec![format!("{}dup", first[0]), first[1].clone(), first[2].clone(), "0".into(), "0.0".into()]);
    }
    if let Some(row) = rows.iter_mut().find(|r| !spot.iter().any(|&i| doi(i) == r[1])) {
        row[4] = "1.5".into();
    }
    write_csv(&raw.join("sciscinet_papers.csv"), &["paperid", "doi", "year", "citation_count", "cd5"], &rows)?;

    // pwc: JSON Lines with doi: prefixes
    let mut body = String::new();
    for (i, p) in papers.iter().enumerate() {
        if p.in_pwc {
            let rec = json!({
                "paper_url": format!("https://paperswithcode.example/paper/{i}"),
                "doi": format!("doi:{}", doi(i)),
                "repo_url": format!("https://git.example/lab{}/repo{i}", i % 13),
            });
            let _ = writeln!(body, "{rec}");
        }
    }
    write_file(&raw.join("pwc_links.jsonl"), &body)?;

    let rows: Vec<Vec<String>> = papers
        .iter()
        .enumerate()
        .filter(|(_, p)| p.in_retraction)
        .map(|(i, _)| vec![format!("R{i}"), format!("https://dx.doi.org/{}", doi(i)), "Retraction".into()])
        .collect();
    write_csv(&raw.join("retractions.csv"), &["record_id", "OriginalPaperDOI", "RetractionNature"], &rows)?;

    let rows: Vec<Vec<String>> = papers
        .iter()
        .enumerate()
        .filter(|(_, p)| p.in_patent)
        .map(|(i, _)| vec![format!("US{}", 9_000_000 + i), doi(i), format!("{}", 1 + i % 10)])
        .collect();
    write_csv(&raw.join("ros_pairs.csv"), &["patent_id", "doi", "confidence"], &rows)?;

    // topics and assignments for 75% of openalex papers
    let names: Vec<String> = (0..opts.topics).map(topic_name).collect();
    let topic_id = |k: usize| format!("T{}", 10_000 + k);
    let rows: Vec<Vec<String>> = (0..opts.topics)
        .map(|k| {
            vec![
                topic_id(k),
                names[k].clone(),
                format!("{} studies", NOUNS[k % NOUNS.len()]),
                "Synthetic Sciences".into(),
                "Physical Sciences".into(),
            ]
        })
        .collect();
    write_csv(&raw.join("topics.csv"), &["topic_id", "display_name", "subfield", "field", "domain"], &rows)?;
    let rows: Vec<Vec<String>> = papers
        .iter()
        .enumerate()
        .filter(|(i, p)| p.in_openalex && i % 4 != 3)
        .map(|(i, p)| vec![doi(i), topic_id(p.topic)])
        .collect();
    write_csv(&raw.join("work_topics.csv"), &["doi", "topic_id"], &rows)?;

    // mesh (term CSV, exact route): a third of the topics verbatim in title case
    let title = |s: &str| {
        s.split(' ')
            .map(|w| {
                let mut c = w.chars();
                c.next().map(|f| f.to_uppercase().chain(c).collect::<String>()).unwrap_or_default()
            })
            .collect::<Vec<_>>()
            .join(" ")
    };
    let mut rows = Vec::new();
    for k in (0..opts.topics).step_by(3) {
        rows.push(vec![format!("D{:06}", 100 + k), title(&names[k]), format!("{} studies", names[k]), "D000001".into(), String::new()]);
    }
    for j in 0..40 {
        let label = format!("{} {}", FILLER[j % FILLER.len()], FILLER[(j * 5 + 1) % FILLER.len()]);
        rows.push(vec![format!("D{:06}", 900 + j), label, String::new(), "D000001|D999999".into(), String::new()]);
    }
    rows.push(vec!["D000001".into(), "Synthetic Concepts".into(), String::new(), String::new(), String::new()]);
    rows.push(vec!["D000002".into(), "withdrawn heading".into(), String::new(), String::new(), "true".into()]);
    write_csv(&raw.join("mesh.csv"), &["id", "label", "synonyms", "parents", "obsolete"], &rows)?;

    // stw (SKOS N-Triples, Jaro-Winkler route): a quarter of the topics with one letter dropped
    let mut nt = String::new();
    let stw = |n: usize| format!("<http://stw.example/descriptor/{n}>");
    let pref = "<http://www.w3.org/2004/02/skos/core#prefLabel>";
    let alt = "<http://www.w3.org/2004/02/skos/core#altLabel>";
    let broader = "<http://www.w3.org/2004/02/skos/core#broader>";
    let _ = writeln!(nt, "{} {pref} \"Synthetic thesaurus\"@en .", stw(1));
    for k in (1..opts.topics).step_by(4) {
        let name = &names[k];
        let cut = name.len() - 3;
        let typo = format!("{}{}", &name[..cut], &name[cut + 1..]);
        let _ = writeln!(nt, "{} {pref} \"{typo}\"@en .", stw(100 + k));
        let _ = writeln!(nt, "{} {pref} \"{typo} (de)\"@de .", stw(100 + k));
        let _ = writeln!(nt, "{} {alt} \"{name} research\"@en .", stw(100 + k));
        let _ = writeln!(nt, "{} {broader} {} .", stw(100 + k), stw(1));
    }
    for j in 0..30 {
        let label = format!("{} {}", FILLER[(j * 7) % FILLER.len()], FILLER[(j + 3) % FILLER.len()]);
        let _ = writeln!(nt, "{} {pref} \"{label}\"@en .", stw(900 + j));
    }
    write_file(&raw.join("stw.nt"), &nt)?;

    // go (OBO, embedding route): planted terms per topic at known similarity
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(opts.topics);
    for _ in 0..opts.topics {
        let refs: Vec<&[f64]> = basis.iter().map(Vec::as_slice).collect();
        let v = orthogonalize(unit(&mut rng, opts.dimension), &refs);
        basis.push(v);
    }
    let mut obo = String::from("format-version: 1.2\nontology: go\n\n");
    let mut term_ids = Vec::new();
    let mut term_rows: Vec<Vec<f32>> = Vec::new();
    let mut planted: Vec<(usize, String, f64)> = Vec::new();
    let mut serial = 1;
    for (k, u) in basis.iter().enumerate() {
        let mut j = 0;
        for &(stratum, lo, hi, count) in &PLANTED {
            for _ in 0..count {
                let s = rng.random_range(lo..hi);
                let id = format!("GO:{serial:07}");
                serial += 1;
                let scale = rng.random_range(0.5..2.0);
                let suffix = GO_SUFFIXES[j % GO_SUFFIXES.len()];
                // text drifts from the topic name as the planted similarity drops
                let label = match stratum {
                    Stratum::Exact | Stratum::High => format!("{} {suffix}", names[k]),
                    Stratum::Mid => format!("{} {suffix} {}", names[k].split(' ').next().unwrap_or(""), FILLER[j]),
                    Stratum::Borderline => format!("{} {} {suffix}", FILLER[k % FILLER.len()], names[k].split(' ').next_back().unwrap_or("")),
                };
                let _ = writeln!(obo, "[Term]\nid: {id}\nname: {label}");
                term_ids.push(term_label_id("go", &id, 0));
                term_rows.push(at_similarity(&mut rng, u, s, scale));
                if j % 2 == 0 {
                    let _ = writeln!(obo, "synonym: \"{} {}\" EXACT []", names[k], FILLER[j]);
                    term_ids.push(term_label_id("go", &id, 1));
                    term_rows.push(at_similarity(&mut rng, u, s - 0.03, scale));
                }
                let _ = writeln!(obo, "is_a: GO:0000000 ! root\nxref: SYN:{serial}\n");
                planted.push((k, id, s));
                j += 1;
            }
        }
    }
    for j in 0..100 {
        let id = format!("GO:{:07}", 9_000_000 + j);
        let label = format!("{} {}", FILLER[j % FILLER.len()], GO_SUFFIXES[j % GO_SUFFIXES.len()]);
        let _ = writeln!(obo, "[Term]\nid: {id}\nname: {label}\nis_a: GO:0000000\n");
        term_ids.push(term_label_id("go", &id, 0));
        term_rows.push(unit(&mut rng, opts.dimension).into_iter().map(|x| x as f32).collect());
    }
    let _ = writeln!(obo, "[Term]\nid: GO:0000000\nname: synthetic root\n");
    term_ids.push(term_label_id("go", "GO:0000000", 0));
    term_rows.push(unit(&mut rng, opts.dimension).into_iter().map(|x| x as f32).collect());
    let _ = writeln!(obo, "[Term]\nid: GO:9999999\nname: retired term\nis_obsolete: true\n");
    let _ = writeln!(obo, "[Typedef]\nid: part_of\nname: part of\n");
    write_file(&raw.join("go.obo"), &obo)?;

    let topic_rows: Vec<Vec<f32>> = basis.iter().map(|u| u.iter().map(|&x| (x * 3.0) as f32).collect()).collect();
    write_vectors(
        &raw.join("vectors_topics.parquet"),
        &EmbeddingSet::from_rows((0..opts.topics).map(topic_id).collect(), &topic_rows)?,
    )?;
    write_vectors(&raw.join("vectors_terms.parquet"), &EmbeddingSet::from_rows(term_ids, &term_rows)?)?;

    // gold: a labelled stratified draw of the planted pairs
    let mut gold = Vec::new();
    for (stratum, _, _, per_topic) in PLANTED {
        let mut pool: Vec<&(usize, String, f64)> =
            planted.iter().filter(|p| Stratum::of(p.2) == Some(stratum)).collect();
        pool.shuffle(&mut rng);
        let quota = match stratum {
            Stratum::Exact | Stratum::Borderline => 50,
            _ => 100,
        }
        .min(opts.topics * per_topic);
        for (k, id, s) in pool.into_iter().take(quota) {
            let r: f64 = rng.random();
            let label = match stratum {
                Stratum::Exact => Label::Correct,
                Stratum::High if r < 0.85 => Label::Correct,
                Stratum::High => Label::Partial,
                Stratum::Mid if r < 0.5 => Label::Correct,
                Stratum::Mid if r < 0.75 => Label::Partial,
                Stratum::Borderline if r < 0.25 => Label::Correct,
                Stratum::Borderline if r < 0.5 => Label::Partial,
                _ => Label::Incorrect,
            };
            gold.push(GoldPair {
                topic_id: topic_id(*k),
                term_id: id.clone(),
                ontology: "go".into(),
                similarity: (*s * 1e4).round() / 1e4,
                stratum,
                label: Some(label),
            });
        }
    }
    write_gold(&raw.join("gold.csv"), &gold)?;

    let spot_dois: Vec<String> = spot.iter().map(|&i| doi(i)).collect();
    let mut spot_toml = String::new();
    for &i in &spot {
        let p = &papers[i];
        let _ = write!(
            spot_toml,
            "\n[[validate.spot_checks]]\ndoi = \"{}\"\nhas_openalex = {}\nhas_s2ag = {}\nhas_sciscinet = {}\nhas_pwc = {}\nhas_retraction = {}\nhas_patent = {}\n",
            doi(i).to_uppercase(),
            p.in_openalex,
            p.in_s2ag,
            p.in_sciscinet,
            p.in_pwc,
            p.in_retraction,
            p.in_patent
        );
    }
    let config = format!(
        r#"# Synthetic mini-lake. Paths are relative to this file.
lake_root = "lake"
seed = {seed}

[[ingest]]
table = "openalex/works"
format = "jsonl"
path = "raw/openalex_works.jsonl"

[[ingest]]
table = "openalex/topics"
format = "csv"
path = "raw/topics.csv"

[[ingest]]
table = "openalex/work_topics"
format = "csv"
path = "raw/work_topics.csv"

[[ingest]]
table = "s2ag/papers"
format = "jsonl"
path = "raw/s2ag_papers.jsonl"

[[ingest]]
table = "sciscinet/papers"
format = "csv"
path = "raw/sciscinet_papers.csv"

[[ingest]]
table = "pwc/links"
format = "jsonl"
path = "raw/pwc_links.jsonl"

[[ingest]]
table = "retwatch/retractions"
format = "csv"
path = "raw/retractions.csv"

[[ingest]]
table = "ros/pairs"
format = "csv"
path = "raw/ros_pairs.csv"

[[sources]]
name = "openalex"
table_path = "openalex/works"
doi_column = "doi"
id_column = "id"
id_pattern = '^W\d+$'
year_column = "publication_year"
citation_column = "cited_by_count"
fwci_column = "fwci"

[[sources]]
name = "s2ag"
table_path = "s2ag/papers"
doi_column = "doi"
id_column = "corpusid"
year_column = "year"
citation_column = "citationcount"

[[sources]]
name = "sciscinet"
table_path = "sciscinet/papers"
doi_column = "doi"
id_column = "paperid"
year_column = "year"
citation_column = "citation_count"
cd5_column = "cd5"

[[sources]]
name = "pwc"
table_path = "pwc/links"
doi_column = "doi"
extra_columns = ["repo_url"]

[[sources]]
name = "retwatch"
coverage = "retraction"
table_path = "retwatch/retractions"
doi_column = "OriginalPaperDOI"
id_column = "record_id"

[[sources]]
name = "ros"
coverage = "patent"
table_path = "ros/pairs"
doi_column = "doi"
id_column = "patent_id"

[[ontologies]]
name = "mesh"
format = "csv"
path = "raw/mesh.csv"
method = "exact"

[[ontologies]]
name = "stw"
format = "skos"
path = "raw/stw.nt"
method = "jaro_winkler"
threshold = 0.90

[[ontologies]]
name = "go"
format = "obo"
path = "raw/go.obo"
method = "embedding"
threshold = 0.65
top_k = 20

[topics]
table = "openalex/topics"
assignments_table = "openalex/work_topics"

[vectors]
topics = "raw/vectors_topics.parquet"
terms = "raw/vectors_terms.parquet"

[link]
year_precedence = ["openalex", "s2ag", "sciscinet"]

[align]
candidate_floor = 0.60
baselines = ["tfidf", "bm25"]

[eval]
gold = "raw/gold.csv"

[stats]
min_support = 5

[validate]
patent_min_match = 0.70
min_pearson = 0.5
{spot_toml}"#,
        seed = opts.seed
    );
    let config_path = dir.join("scilake.toml");
    write_file(&config_path, &config)?;

    Ok(SynthLake {
        dir: dir.to_path_buf(),
        lake_root: dir.join("lake"),
        config_path,
        spot_dois,
        gold_pairs: gold.len(),
    })
}

/// Defects planted into a built lake; each should trip exactly one check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    UppercaseDoi,
    FlagMismatch,
    DuplicateDoi,
    BadNativeId,
    OrphanTopic,
}

impl Violation {
    pub const ALL: [Violation; 5] = [
        Violation::UppercaseDoi,
        Violation::FlagMismatch,
        Violation::DuplicateDoi,
        Violation::BadNativeId,
        Violation::OrphanTopic,
    ];

    /// The check expected to fail.
    pub fn check_id(self) -> u8 {
        match self {
            Violation::UppercaseDoi => 1,
            Violation::FlagMismatch => 2,
            Violation::DuplicateDoi => 3,
            Violation::BadNativeId => 4,
            Violation::OrphanTopic => 5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Violation::UppercaseDoi => "uppercase DOI",
            Violation::FlagMismatch => "flag mismatch",
            Violation::DuplicateDoi => "duplicate DOI",
            Violation::BadNativeId => "bad native id",
            Violation::OrphanTopic => "orphan topic_id",
        }
    }
}

fn replace_column(batch: &RecordBatch, name: &str, array: ArrayRef) -> Result<RecordBatch> {
    let idx = batch.schema().index_of(name)?;
    let mut cols = batch.columns().to_vec();
    cols[idx] = array;
    Ok(RecordBatch::try_new(batch.schema(), cols)?)
}

/// First row whose DOI is not in `avoid`, matching `pred`.
fn pick_row(dois: &[Option<String>], avoid: &[String], pred: impl Fn(usize) -> bool) -> Result<usize> {
    (0..dois.len())
        .find(|&i| dois[i].as_ref().is_some_and(|d| !avoid.contains(d)) && pred(i))
        .ok_or_else(|| Error::invalid("no row suitable for injection"))
}

/// Plant one violation into a lake built from the synthetic config.
/// Rows whose DOI is in `avoid` (the spot checks) are left alone.
pub fn inject(lake_root: &Path, violation: Violation, avoid: &[String]) -> Result<()> {
    let path_of = |t: &str| lake::table_file(lake_root, t);
    match violation {
        Violation::UppercaseDoi | Violation::FlagMismatch | Violation::DuplicateDoi => {
            let path = path_of(link::UNIFIED_PAPERS);
            let batch = lake::read_table(&path)?;
            let mut dois = lake::string_column(&batch, "unified_papers", "doi")?;
            let out = match violation {
                Violation::UppercaseDoi => {
                    let i = pick_row(&dois, avoid, |_| true)?;
                    dois[i] = dois[i].as_ref().map(|d| d.to_uppercase());
                    replace_column(&batch, "doi", lake::utf8(dois))?
                }
                Violation::FlagMismatch => {
                    let mut flags = lake::bool_column(&batch, "unified_papers", "has_sciscinet")?;
                    let i = pick_row(&dois, avoid, |i| flags[i] == Some(false))?;
                    flags[i] = Some(true);
                    replace_column(&batch, "has_sciscinet", lake::boolean(flags))?
                }
                _ => {
                    let i = pick_row(&dois, avoid, |_| true)?;
                    concat_batches(&batch.schema(), [&batch, &batch.slice(i, 1)])?
                }
            };
            lake::write_batch(&path, &out, "xref")
        }
        Violation::BadNativeId => {
            let path = path_of(link::DOI_MAP);
            let batch = lake::read_table(&path)?;
            let sources = lake::string_column(&batch, "doi_map", "source")?;
            let mut ids = lake::string_column(&batch, "doi_map", "native_id")?;
            let dois = lake::string_column(&batch, "doi_map", "doi")?;
            let i = pick_row(&dois, avoid, |i| sources[i].as_deref() == Some("openalex"))?;
            ids[i] = Some("openalex:bad".into());
            lake::write_batch(&path, &replace_column(&batch, "native_id", lake::utf8(ids))?, "xref")
        }
        Violation::OrphanTopic => {
            let path = path_of(crate::align::TOPIC_ONTOLOGY_MAP);
            let batch = lake::read_table(&path)?;
            let mut topics = lake::string_column(&batch, "topic_ontology_map", "topic_id")?;
            topics[0] = Some("T99999".into());
            lake::write_batch(&path, &replace_column(&batch, "topic_id", lake::utf8(topics))?, "align")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn topic_names_are_unique() {
        let names: std::collections::HashSet<String> = (0..80).map(topic_name).collect();
        assert_eq!(names.len(), 80);
    }

    #[test]
    fn planted_similarity_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = unit(&mut rng, 32);
        let v = at_similarity(&mut rng, &u, 0.8, 2.5);
        let v: Vec<f64> = v.into_iter().map(f64::from).collect();
        let cos = dot(&u, &v) / dot(&v, &v).sqrt();
        assert!((cos - 0.8).abs() < 1e-6);
    }

    #[test]
    fn generation_is_deterministic() {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let opts = SynthOptions {
            papers: 50,
            topics: 8,
            dimension: 16,
            seed: 3,
        };
        generate(a.path(), &opts).unwrap();
        generate(b.path(), &opts).unwrap();
        for f in ["raw/openalex_works.jsonl", "raw/go.obo", "raw/gold.csv", "raw/vectors_terms.parquet", "scilake.toml"] {
            assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
        }
    }
}
