//! DOI normalization and cross-source linkage.

mod ddl;
mod doi;
mod doi_map;
mod intersections;
mod registry;
mod temporal;
mod unified;

use std::path::Path;

use serde::Serialize;

pub use ddl::views_ddl;
pub use doi::{normalize_doi, Doi};
pub use doi_map::{build_doi_map, read_doi_map, DoiMap, DoiMapEntry, DoiMapRow, SourceLinkReport};
pub use intersections::{
    coverage_matrix, default_label_order, intersection_counts, write_coverage_matrix,
    write_intersection_counts, Combination, PairCoverage,
};
pub use registry::{load_sources, validate_registry, Coverage, SourceSpec, SourceTable};
pub use temporal::{
    compute_temporal_flags, temporal_batch, temporal_flags, write_temporal_flags, Cutoffs,
    TemporalFlags,
};
pub use unified::{
    all_canonical, materialize_unified, papers_batch, read_unified, Unified, UnifiedPaper,
    UnifiedReport, DEFAULT_YEAR_PRECEDENCE,
};

use crate::error::Result;
use crate::lake;

pub const DOI_MAP: &str = "xref/doi_map";
pub const UNIFIED_PAPERS: &str = "xref/unified_papers";
pub const TEMPORAL_FLAGS: &str = "xref/paper_temporal_flags";
pub const INTERSECTION_COUNTS: &str = "xref/intersection_counts";
pub const SOURCE_COVERAGE: &str = "xref/source_coverage";

#[derive(Debug, Clone, Serialize)]
pub struct LinkSummary {
    pub sources: Vec<SourceLinkReport>,
    pub doi_map_rows: u64,
    pub unified: UnifiedReport,
    pub combinations: usize,
}

/// Label order for intersections: registry order, source names.
pub fn registry_label_order(sources: &[SourceTable]) -> Vec<(Coverage, String)> {
    sources.iter().map(|s| (s.coverage, s.spec.name.clone())).collect()
}

/// Build every `xref/` table and the `views.sql` script.
pub fn link_lake(
    lake_root: &Path,
    registry: &[SourceSpec],
    year_precedence: &[String],
    cutoffs: Cutoffs,
) -> Result<LinkSummary> {
    let sources = load_sources(lake_root, registry)?;
    let map = build_doi_map(&sources)?;
    map.write(&lake::table_file(lake_root, DOI_MAP))?;

    let unified = materialize_unified(&map, &sources, year_precedence)?;
    unified.write(&lake::table_file(lake_root, UNIFIED_PAPERS))?;

    let flags = compute_temporal_flags(&unified.papers, cutoffs);
    write_temporal_flags(&lake::table_file(lake_root, TEMPORAL_FLAGS), &flags)?;

    let order = registry_label_order(&sources);
    let combos = intersection_counts(&unified.papers, &order);
    write_intersection_counts(&lake::table_file(lake_root, INTERSECTION_COUNTS), &combos)?;
    let matrix = coverage_matrix(&unified.papers, &order);
    write_coverage_matrix(&lake::table_file(lake_root, SOURCE_COVERAGE), &matrix)?;

    write_views(lake_root)?;
    Ok(LinkSummary {
        sources: map.report.clone(),
        doi_map_rows: map.len() as u64,
        unified: unified.report,
        combinations: combos.len(),
    })
}

/// Regenerate `views.sql` at the lake root.
pub fn write_views(lake_root: &Path) -> Result<()> {
    let path = lake_root.join("views.sql");
    std::fs::write(&path, views_ddl(lake_root)?).map_err(|e| crate::Error::io(&path, e))
}
