use std::fmt;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

static DOI_PATTERN: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^10\.\d{4,9}/\S+$").expect("valid DOI pattern"));

/// Prefixes stripped (once, case-insensitively) before lowercasing.
const PREFIXES: [&str; 5] = [
    "https://doi.org/",
    "http://doi.org/",
    "https://dx.doi.org/",
    "http://dx.doi.org/",
    "doi:",
];

/// Canonical DOI: lowercase, no resolver prefix, `10.<registrant>/<suffix>`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Doi(String);

impl Doi {
    /// Normalize any raw DOI string; `None` when the result is not a DOI.
    pub fn normalize(raw: &str) -> Option<Doi> {
        let trimmed = raw.trim();
        let rest = PREFIXES
            .iter()
            .find_map(|p| {
                trimmed
                    .get(..p.len())
                    .filter(|head| head.eq_ignore_ascii_case(p))
                    .map(|_| &trimmed[p.len()..])
            })
            .unwrap_or(trimmed);
        let lowered = rest.to_lowercase();
        DOI_PATTERN.is_match(&lowered).then_some(Doi(lowered))
    }

    /// True when `s` is already exactly in canonical form.
    pub fn is_canonical(s: &str) -> bool {
        Doi::normalize(s).is_some_and(|d| d.0 == s)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl fmt::Display for Doi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Doi {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// [`Doi::normalize`] as a free function.
pub fn normalize_doi(raw: &str) -> Option<Doi> {
    Doi::normalize(raw)
}
