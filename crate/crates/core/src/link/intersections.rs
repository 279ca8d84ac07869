use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use arrow_array::RecordBatch;
use arrow_schema::{DataType, Field, Schema};
use serde::Serialize;

use super::registry::Coverage;
use super::unified::UnifiedPaper;
use crate::error::Result;
use crate::lake;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Combination {
    pub combination: String,
    pub count: u64,
}

/// Flag order and display names, registry order.
pub fn default_label_order() -> Vec<(Coverage, String)> {
    Coverage::ALL.iter().map(|c| (*c, c.name().to_string())).collect()
}

/// Tally papers per observed set of coverage flags.
///
/// Labels join the names of the set flags with `+` in `order`. Rows are sorted
/// by descending count, ties by label. Papers with no flag set (which a
/// materialized lake never holds) are not emitted.
pub fn intersection_counts(papers: &[UnifiedPaper], order: &[(Coverage, String)]) -> Vec<Combination> {
    let mut tally: HashMap<u8, u64> = HashMap::new();
    for p in papers {
        let mut mask = 0u8;
        for (i, (c, _)) in order.iter().enumerate() {
            if p.has(*c) {
                mask |= 1 << i;
            }
        }
        if mask != 0 {
            *tally.entry(mask).or_default() += 1;
        }
    }
    let mut out: Vec<Combination> = tally
        .into_iter()
        .map(|(mask, count)| Combination {
            combination: order
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, (_, name))| name.as_str())
                .collect::<Vec<_>>()
                .join("+"),
            count,
        })
        .collect();
    out.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.combination.cmp(&b.combination)));
    out
}

pub fn write_intersection_counts(path: &Path, rows: &[Combination]) -> Result<()> {
    let schema = Schema::new(vec![
        Field::new("combination", DataType::Utf8, false),
        Field::new("count", DataType::Int64, false),
    ]);
    let batch = RecordBatch::try_new(
        Arc::new(schema),
        vec![
            lake::utf8(rows.iter().map(|r| Some(&r.combination))),
            lake::int64(rows.iter().map(|r| Some(r.count as i64))),
        ],
    )?;
    lake::write_batch(path, &batch, "xref")
}

/// Pairwise overlap between two sources, with both ratio conventions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairCoverage {
    pub row_source: String,
    pub column_source: String,
    pub n_row: u64,
    pub n_both: u64,
    pub total: u64,
    /// Share of the row source's papers also present in the column source.
    pub pct_of_row: Option<f64>,
    /// Share of all unified papers present in both.
    pub pct_of_total: Option<f64>,
}

pub fn coverage_matrix(papers: &[UnifiedPaper], order: &[(Coverage, String)]) -> Vec<PairCoverage> {
    let k = order.len();
    let mut n = vec![0u64; k];
    let mut both = vec![vec![0u64; k]; k];
    for p in papers {
        let flags: Vec<bool> = order.iter().map(|(c, _)| p.has(*c)).collect();
        for i in 0..k {
            if !flags[i] {
                continue;
            }
            n[i] += 1;
            for j in 0..k {
                if flags[j] {
                    both[i][j] += 1;
                }
            }
        }
    }
    let total = papers.len() as u64;
    let ratio = |a: u64, b: u64| (b > 0).then(|| 100.0 * a as f64 / b as f64);
    let mut out = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in 0..k {
            out.push(PairCoverage {
                row_source: order[i].1.clone(),
                column_source: order[j].1.clone(),
                n_row: n[i],
                n_both: both[i][j],
                total,
                pct_of_row: ratio(both[i][j], n[i]),
                pct_of_total: ratio(both[i][j], total),
            });
        }
    }
    out
}

pub fn write_coverage_matrix(path: &Path, rows: &[PairCoverage]) -> Result<()> {
    let schema = Schema::new(vec![
        Field::new("row_source", DataType::Utf8, false),
        Field::new("column_source", DataType::Utf8, false),
        Field::new("n_row", DataType::Int64, false),
        Field::new("n_both", DataType::Int64, false),
        Field::new("total", DataType::Int64, false),
        Field::new("pct_of_row", DataType::Float64, true),
        Field::new("pct_of_total", DataType::Float64, true),
    ]);
    let batch = RecordBatch::try_new(
        Arc::new(schema),
        vec![
            lake::utf8(rows.iter().map(|r| Some(&r.row_source))),
            lake::utf8(rows.iter().map(|r| Some(&r.column_source))),
            lake::int64(rows.iter().map(|r| Some(r.n_row as i64))),
            lake::int64(rows.iter().map(|r| Some(r.n_both as i64))),
            lake::int64(rows.iter().map(|r| Some(r.total as i64))),
            lake::float64(rows.iter().map(|r| r.pct_of_row)),
            lake::float64(rows.iter().map(|r| r.pct_of_total)),
        ],
    )?;
    lake::write_batch(path, &batch, "xref")
}
