use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Similarity band of a gold pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stratum {
    Exact,
    High,
    Mid,
    Borderline,
}

impl Stratum {
    pub const ALL: [Stratum; 4] = [Stratum::Exact, Stratum::High, Stratum::Mid, Stratum::Borderline];

    pub fn name(self) -> &'static str {
        match self {
            Stratum::Exact => "exact",
            Stratum::High => "high",
            Stratum::Mid => "mid",
            Stratum::Borderline => "borderline",
        }
    }

    /// Half-open band `[lo, hi)`; the exact band is unbounded above.
    pub fn band(self) -> (f64, f64) {
        match self {
            Stratum::Exact => (0.95, f64::INFINITY),
            Stratum::High => (0.85, 0.95),
            Stratum::Mid => (0.75, 0.85),
            Stratum::Borderline => (0.65, 0.75),
        }
    }

    pub fn of(similarity: f64) -> Option<Stratum> {
        Stratum::ALL.into_iter().find(|s| {
            let (lo, hi) = s.band();
            similarity >= lo && similarity < hi
        })
    }
}

impl fmt::Display for Stratum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stratum {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stratum::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown stratum {s}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Correct,
    Partial,
    Incorrect,
}

impl Label {
    pub fn name(self) -> &'static str {
        match self {
            Label::Correct => "correct",
            Label::Partial => "partial",
            Label::Incorrect => "incorrect",
        }
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "correct" => Ok(Label::Correct),
            "partial" => Ok(Label::Partial),
            "incorrect" => Ok(Label::Incorrect),
            other => Err(Error::invalid(format!("unknown label {other}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldPair {
    pub topic_id: String,
    pub term_id: String,
    pub ontology: String,
    pub similarity: f64,
    pub stratum: Stratum,
    /// `None` in an unlabelled template.
    pub label: Option<Label>,
}

impl GoldPair {
    pub fn key(&self) -> (&str, &str, &str) {
        (&self.topic_id, &self.term_id, &self.ontology)
    }
}

#[derive(Serialize, Deserialize)]
struct Row {
    topic_id: String,
    term_id: String,
    ontology: String,
    similarity: f64,
    stratum: String,
    label: String,
}

pub fn write_gold(path: &Path, pairs: &[GoldPair]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut w = csv::Writer::from_path(path)?;
    for p in pairs {
        w.serialize(Row {
            topic_id: p.topic_id.clone(),
            term_id: p.term_id.clone(),
            ontology: p.ontology.clone(),
            similarity: p.similarity,
            stratum: p.stratum.name().into(),
            label: p.label.map(Label::name).unwrap_or_default().into(),
        })?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Read a gold file; with `require_labels` every row must carry a label.
pub fn read_gold(path: &Path, require_labels: bool) -> Result<Vec<GoldPair>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out: Vec<GoldPair> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (i, row) in r.deserialize::<Row>().enumerate() {
        let row = row?;
        let label = if row.label.trim().is_empty() {
            if require_labels {
                return Err(Error::invalid(format!("{}: row {} is unlabelled", path.display(), i + 1)));
            }
            None
        } else {
            Some(row.label.parse()?)
        };
        if !seen.insert((row.topic_id.clone(), row.term_id.clone(), row.ontology.clone())) {
            return Err(Error::invalid(format!(
                "{}: duplicate gold pair ({}, {}, {})",
                path.display(),
                row.topic_id,
                row.term_id,
                row.ontology
            )));
        }
        out.push(GoldPair {
            topic_id: row.topic_id,
            term_id: row.term_id,
            ontology: row.ontology,
            similarity: row.similarity,
            stratum: row.stratum.parse()?,
            label,
        });
    }
    Ok(out)
}
