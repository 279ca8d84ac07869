use std::path::Path;
use std::sync::Arc;

use arrow_array::RecordBatch;
use arrow_schema::{DataType, Field, Schema};
use serde::{Deserialize, Serialize};

use super::unified::UnifiedPaper;
use crate::error::Result;
use crate::lake;

/// Last year each source's metrics are considered complete.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Cutoffs {
    pub sciscinet_year: i64,
    pub ros_year: i64,
}

impl Default for Cutoffs {
    fn default() -> Self {
        Self {
            sciscinet_year: 2022,
            ros_year: 2023,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TemporalFlags {
    pub doi: String,
    pub sciscinet_metrics_stale: bool,
    pub ros_coverage_incomplete: bool,
    pub year_missing: bool,
}

pub fn temporal_flags(paper: &UnifiedPaper, cutoffs: Cutoffs) -> TemporalFlags {
    TemporalFlags {
        doi: paper.doi.clone(),
        sciscinet_metrics_stale: paper.has_sciscinet
            && paper.year.is_some_and(|y| y > cutoffs.sciscinet_year),
        ros_coverage_incomplete: paper.has_patent && paper.year.is_some_and(|y| y > cutoffs.ros_year),
        year_missing: paper.year.is_none(),
    }
}

pub fn compute_temporal_flags(papers: &[UnifiedPaper], cutoffs: Cutoffs) -> Vec<TemporalFlags> {
    papers.iter().map(|p| temporal_flags(p, cutoffs)).collect()
}

pub fn temporal_batch(flags: &[TemporalFlags]) -> Result<RecordBatch> {
    let schema = Schema::new(vec![
        Field::new("doi", DataType::Utf8, false),
        Field::new("sciscinet_metrics_stale", DataType::Boolean, false),
        Field::new("ros_coverage_incomplete", DataType::Boolean, false),
        Field::new("year_missing", DataType::Boolean, false),
    ]);
    Ok(RecordBatch::try_new(
        Arc::new(schema),
        vec![
            lake::utf8(flags.iter().map(|f| Some(&f.doi))),
            lake::boolean(flags.iter().map(|f| Some(f.sciscinet_metrics_stale))),
            lake::boolean(flags.iter().map(|f| Some(f.ros_coverage_incomplete))),
            lake::boolean(flags.iter().map(|f| Some(f.year_missing))),
        ],
    )?)
}

pub fn write_temporal_flags(path: &Path, flags: &[TemporalFlags]) -> Result<()> {
    lake::write_batch(path, &temporal_batch(flags)?, "xref")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paper(year: Option<i64>, sciscinet: bool, patent: bool) -> UnifiedPaper {
        let mut p = UnifiedPaper::new("10.1000/x");
        p.year = year;
        p.has_sciscinet = sciscinet;
        p.has_patent = patent;
        p
    }

    #[test]
    fn stale_after_cutoff() {
        let f = temporal_flags(&paper(Some(2023), true, false), Cutoffs::default());
        assert!(f.sciscinet_metrics_stale);
        assert!(!f.ros_coverage_incomplete);
        let f = temporal_flags(&paper(Some(2022), true, true), Cutoffs::default());
        assert!(!f.sciscinet_metrics_stale);
    }

    #[test]
    fn ros_after_cutoff() {
        let f = temporal_flags(&paper(Some(2024), false, true), Cutoffs::default());
        assert!(f.ros_coverage_incomplete);
        assert!(!f.sciscinet_metrics_stale);
    }

    #[test]
    fn null_year_short_circuits() {
        let f = temporal_flags(&paper(None, true, true), Cutoffs::default());
        assert!(f.year_missing);
        assert!(!f.sciscinet_metrics_stale && !f.ros_coverage_incomplete);
    }

    #[test]
    fn flags_need_membership() {
        let f = temporal_flags(&paper(Some(2030), false, false), Cutoffs::default());
        assert!(!f.sciscinet_metrics_stale && !f.ros_coverage_incomplete);
    }
}
