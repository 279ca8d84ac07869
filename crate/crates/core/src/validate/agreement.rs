//! Pearson correlation, Bland-Altman limits and cross-source citation agreement.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::link::{Coverage, UnifiedPaper};
use crate::scalar::Real;

fn mean<T: Real>(v: &[T]) -> T {
    v.iter().copied().sum::<T>() / T::count(v.len())
}

/// Product-moment correlation, two-pass.
pub fn pearson<T: Real>(x: &[T], y: &[T]) -> Result<T> {
    if x.len() != y.len() {
        return Err(Error::invalid("pearson: series differ in length"));
    }
    if x.len() < 2 {
        return Err(Error::invalid("pearson: need at least two pairs"));
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (*a - mx, *b - my);
        sxy = sxy + dx * dy;
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
    }
    if sxx == T::zero() {
        return Err(Error::invalid("pearson: zero variance in x"));
    }
    if syy == T::zero() {
        return Err(Error::invalid("pearson: zero variance in y"));
    }
    let r = sxy / (sxx.sqrt() * syy.sqrt());
    Ok(r.max(-T::one()).min(T::one()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlandAltman<T> {
    pub mean_diff: T,
    /// Sample standard deviation of the differences.
    pub sd: T,
    pub loa_low: T,
    pub loa_high: T,
    /// Indices of pairs whose difference falls outside the limits.
    pub outliers: Vec<usize>,
}

pub const LOA_Z: f64 = 1.96;

pub fn bland_altman<T: Real>(x: &[T], y: &[T]) -> Result<BlandAltman<T>> {
    if x.len() != y.len() {
        return Err(Error::invalid("bland_altman: series differ in length"));
    }
    if x.len() < 2 {
        return Err(Error::invalid("bland_altman: need at least two pairs"));
    }
    let d: Vec<T> = x.iter().zip(y).map(|(a, b)| *a - *b).collect();
    let m = mean(&d);
    let ss: T = d.iter().map(|v| (*v - m) * (*v - m)).sum();
    let sd = (ss / T::count(d.len() - 1)).sqrt();
    let half = T::lit(LOA_Z) * sd;
    let (lo, hi) = (m - half, m + half);
    Ok(BlandAltman {
        mean_diff: m,
        sd,
        loa_low: lo,
        loa_high: hi,
        outliers: d
            .iter()
            .enumerate()
            .filter(|(_, v)| **v < lo || **v > hi)
            .map(|(i, _)| i)
            .collect(),
    })
}

pub fn mean_abs_diff<T: Real>(x: &[T], y: &[T]) -> T {
    if x.is_empty() {
        return T::zero();
    }
    x.iter().zip(y).map(|(a, b)| (*a - *b).abs()).sum::<T>() / T::count(x.len())
}

/// `|x - y| / max(1, (x + y) / 2)`.
pub fn relative_difference<T: Real>(x: T, y: T) -> T {
    let m = (x + y) / T::lit(2.0);
    (x - y).abs() / m.max(T::one())
}

/// Citation-magnitude bins over the pair mean.
pub const BINS: [&str; 3] = ["<10", "10-100", ">100"];

pub fn bin_of(pair_mean: f64) -> usize {
    if pair_mean < 10.0 {
        0
    } else if pair_mean <= 100.0 {
        1
    } else {
        2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outlier {
    pub doi: String,
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgreementStats {
    pub source_a: String,
    pub source_b: String,
    pub n: u64,
    pub pearson_r: Option<f64>,
    /// Why `pearson_r` is missing.
    pub pearson_note: Option<String>,
    pub mean_abs_diff: f64,
    pub mean_diff: f64,
    pub sd_diff: f64,
    pub loa_low: f64,
    pub loa_high: f64,
    pub n_outliers: u64,
    /// Largest outliers by absolute difference, at most [`MAX_LISTED_OUTLIERS`].
    pub outliers: Vec<Outlier>,
}

pub const MAX_LISTED_OUTLIERS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinSummary {
    pub source_a: String,
    pub source_b: String,
    pub bin: String,
    pub n: u64,
    pub mean_relative_difference: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AgreementReport {
    /// Papers with all three citation counts.
    pub n_complete: u64,
    pub pairs: Vec<AgreementStats>,
    pub bins: Vec<BinSummary>,
    pub warning: Option<String>,
}

const CITATION_SOURCES: [Coverage; 3] = [Coverage::S2ag, Coverage::Openalex, Coverage::Sciscinet];

/// Pairwise agreement of the three citation counts over papers that have all three.
pub fn citation_agreement(papers: &[UnifiedPaper]) -> AgreementReport {
    let complete: Vec<(&str, [f64; 3])> = papers
        .iter()
        .filter_map(|p| {
            let c = CITATION_SOURCES.map(|s| p.citations(s));
            match c {
                [Some(a), Some(b), Some(d)] => Some((p.doi.as_str(), [a as f64, b as f64, d as f64])),
                _ => None,
            }
        })
        .collect();
    let mut report = AgreementReport {
        n_complete: complete.len() as u64,
        ..Default::default()
    };
    if complete.len() < 2 {
        report.warning = Some(format!(
            "only {} papers carry all three citation counts; agreement needs at least 2",
            complete.len()
        ));
        return report;
    }
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let x: Vec<f64> = complete.iter().map(|(_, c)| c[i]).collect();
        let y: Vec<f64> = complete.iter().map(|(_, c)| c[j]).collect();
        let (a, b) = (CITATION_SOURCES[i].name(), CITATION_SOURCES[j].name());
        let (pearson_r, pearson_note) = match pearson(&x, &y) {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let ba = bland_altman(&x, &y).expect("at least two rows");
        let mut outliers: Vec<Outlier> = ba
            .outliers
            .iter()
            .map(|&k| Outlier {
                doi: complete[k].0.to_string(),
                a: x[k],
                b: y[k],
            })
            .collect();
        outliers.sort_by(|p, q| (q.a - q.b).abs().total_cmp(&(p.a - p.b).abs()).then_with(|| p.doi.cmp(&q.doi)));
        let n_outliers = outliers.len() as u64;
        outliers.truncate(MAX_LISTED_OUTLIERS);
        report.pairs.push(AgreementStats {
            source_a: a.into(),
            source_b: b.into(),
            n: x.len() as u64,
            pearson_r,
            pearson_note,
            mean_abs_diff: mean_abs_diff(&x, &y),
            mean_diff: ba.mean_diff,
            sd_diff: ba.sd,
            loa_low: ba.loa_low,
            loa_high: ba.loa_high,
            n_outliers,
            outliers,
        });

        let mut acc = [(0u64, 0.0f64); 3];
        for (u, v) in x.iter().zip(&y) {
            let k = bin_of((u + v) / 2.0);
            acc[k].0 += 1;
            acc[k].1 += relative_difference(*u, *v);
        }
        for (k, (n, sum)) in acc.iter().enumerate() {
            report.bins.push(BinSummary {
                source_a: a.into(),
                source_b: b.into(),
                bin: BINS[k].into(),
                n: *n,
                mean_relative_difference: (*n > 0).then(|| sum / *n as f64),
            });
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_hand_case() {
        let r: f64 = pearson(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 1.0, 4.0, 3.0, 6.0]).unwrap();
        // sxy = 10, sxx = 10, syy = 14.8
        assert!((r - 10.0 / (10.0f64 * 14.8).sqrt()).abs() < 1e-12);
        assert!((r - 0.8219949365267863).abs() < 1e-9);
    }

    #[test]
    fn pearson_identity_and_sign() {
        let x = [1.0, 4.0, 2.0, 8.0];
        assert!((pearson(&x, &x).unwrap() - 1.0f64).abs() < 1e-12);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &neg).unwrap() + 1.0).abs() < 1e-12);
        assert!(pearson(&x, &[3.0; 4]).unwrap_err().to_string().contains("zero variance"));
    }

    #[test]
    fn bland_altman_hand_case() {
        let ba = bland_altman(&[1.0f64, 0.0], &[0.0, 1.0]).unwrap();
        assert_eq!(ba.mean_diff, 0.0);
        assert!((ba.sd - 2f64.sqrt()).abs() < 1e-12);
        assert!((ba.loa_high - 1.96 * 2f64.sqrt()).abs() < 1e-12);
        assert!((ba.loa_low + 2.7718585822512662).abs() < 1e-9);
        assert!(ba.outliers.is_empty());
        assert!(bland_altman(&[1.0f64], &[1.0]).is_err());
    }

    #[test]
    fn identical_series() {
        let x = [3.0f64, 5.0, 7.0];
        let ba = bland_altman(&x, &x).unwrap();
        assert_eq!((ba.mean_diff, ba.loa_low, ba.loa_high), (0.0, 0.0, 0.0));
        assert!(ba.outliers.is_empty());
    }

    #[test]
    fn extreme_pair_is_an_outlier() {
        let x = [10.0f64, 11.0, 12.0, 13.0, 14.0, 15.0, 16.0, 17.0, 18.0, 500.0];
        let y = [10.0f64, 10.0, 12.0, 14.0, 14.0, 15.0, 15.0, 17.0, 18.0, 0.0];
        assert_eq!(bland_altman(&x, &y).unwrap().outliers, vec![9]);
    }

    #[test]
    fn relative_difference_cases() {
        assert_eq!(relative_difference(10.0f64, 30.0), 1.0);
        assert_eq!(relative_difference(0.0f64, 1.0), 1.0);
        assert_eq!(bin_of(5.0), 0);
        assert_eq!(bin_of(50.0), 1);
        assert_eq!(bin_of(100.5), 2);
    }

    fn paper(i: usize, c: [i64; 3]) -> UnifiedPaper {
        let mut p = UnifiedPaper::new(format!("10.1000/{i}"));
        p.citations_s2ag = Some(c[0]);
        p.citations_openalex = Some(c[1]);
        p.citations_sciscinet = Some(c[2]);
        p
    }

    #[test]
    fn constant_offsets() {
        let papers: Vec<_> = (0..10).map(|i| paper(i, [i as i64 * 3, i as i64 * 3 + 1, i as i64 * 3 + 2])).collect();
        let r = citation_agreement(&papers);
        let mads: Vec<f64> = r.pairs.iter().map(|p| p.mean_abs_diff).collect();
        assert_eq!(mads, vec![1.0, 2.0, 1.0]);
        assert!(r.pairs.iter().all(|p| (p.pearson_r.unwrap() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn too_few_rows_warns() {
        let mut p = paper(0, [1, 2, 3]);
        let r = citation_agreement(std::slice::from_ref(&p));
        assert!(r.pairs.is_empty() && r.warning.is_some());
        p.citations_sciscinet = None;
        assert_eq!(citation_agreement(&[p]).n_complete, 0);
    }
}
