use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use scilake::link::UnifiedPaper;
use scilake::validate::{bland_altman, citation_agreement, mean_abs_diff, pearson};

/// Textbook formula with sums of products, independent of the two-pass kernel.
fn pearson_sums(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (sx, sy): (f64, f64) = (x.iter().sum(), y.iter().sum());
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}

#[test]
fn five_point_fixtures() {
    let x = [1.0, 2.0, 3.0, 4.0, 5.0];
    let y = [2.0, 1.0, 4.0, 3.0, 6.0];
    let r: f64 = pearson(&x, &y).unwrap();
    assert!((r - 10.0 / 148f64.sqrt()).abs() < 1e-9);
    assert!((r - pearson_sums(&x, &y)).abs() < 1e-9);

    // d = (-1, 1, -1, 1, -1): mean -0.2, sample sd sqrt(1.2)
    let ba = bland_altman(&x, &y).unwrap();
    let sd = 1.2f64.sqrt();
    assert!((ba.mean_diff + 0.2).abs() < 1e-9);
    assert!((ba.sd - sd).abs() < 1e-9);
    assert!((ba.loa_low - (-0.2 - 1.96 * sd)).abs() < 1e-9);
    assert!((ba.loa_high - (-0.2 + 1.96 * sd)).abs() < 1e-9);
    assert!(ba.outliers.is_empty());
}

#[test]
fn identical_series() {
    let x = [3.0, 1.0, 4.0, 1.0, 5.0];
    assert_eq!(pearson(&x, &x).unwrap(), 1.0);
    let ba = bland_altman(&x, &x).unwrap();
    assert_eq!((ba.mean_diff, ba.sd), (0.0, 0.0));
}

#[test]
fn limits_cover_about_95_percent_of_gaussian_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let n = Normal::new(0.0, 1.0).unwrap();
    let x: Vec<f64> = (0..10_000).map(|_| 50.0 + 10.0 * n.sample(&mut rng)).collect();
    let y: Vec<f64> = x.iter().map(|v| v + 0.5 + 2.0 * n.sample(&mut rng)).collect();
    let ba = bland_altman(&x, &y).unwrap();
    let coverage = 1.0 - ba.outliers.len() as f64 / x.len() as f64;
    assert!((0.94..=0.96).contains(&coverage), "{coverage}");
}

#[test]
fn single_precision_tracks_double() {
    let x: Vec<f64> = (0..200).map(|i| (i as f64 * 0.37).sin() * 100.0).collect();
    let y: Vec<f64> = x.iter().enumerate().map(|(i, v)| v + (i % 7) as f64).collect();
    let (x32, y32): (Vec<f32>, Vec<f32>) = (x.iter().map(|v| *v as f32).collect(), y.iter().map(|v| *v as f32).collect());
    let r64: f64 = pearson(&x, &y).unwrap();
    let r32: f32 = pearson(&x32, &y32).unwrap();
    assert!((r64 - r32 as f64).abs() < 1e-5);
}

#[test]
fn agreement_report_over_papers() {
    let papers: Vec<UnifiedPaper> = (0..50)
        .map(|i| {
            let mut p = UnifiedPaper::new(format!("10.1/{i}"));
            p.citations_s2ag = Some(i);
            p.citations_openalex = Some(i + 1);
            p.citations_sciscinet = Some(2 * i);
            p
        })
        .collect();
    let r = citation_agreement(&papers);
    assert_eq!(r.n_complete, 50);
    assert_eq!(r.pairs[0].mean_abs_diff, 1.0);
    assert_eq!(r.pairs[0].mean_diff, -1.0);
    assert!((r.pairs[0].pearson_r.unwrap() - 1.0).abs() < 1e-12);
    assert!(citation_agreement(&papers[..1]).warning.is_some());
}

fn series() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (3usize..40).prop_flat_map(|n| {
        (
            prop::collection::vec(-1e3f64..1e3, n),
            prop::collection::vec(-1e3f64..1e3, n),
        )
    })
}

proptest! {
    #[test]
    fn pearson_symmetric_and_affine_invariant((x, y) in series(), a in 0.1f64..10.0, c in -100.0f64..100.0) {
        let Ok(r) = pearson(&x, &y) else { return Ok(()) };
        prop_assert!((-1.0..=1.0).contains(&r));
        prop_assert!((r - pearson(&y, &x).unwrap()).abs() < 1e-9);
        let xs: Vec<f64> = x.iter().map(|v| a * v + c).collect();
        prop_assert!((r - pearson(&xs, &y).unwrap()).abs() < 1e-9);
        prop_assert!((r - pearson_sums(&x, &y)).abs() < 1e-6);
    }

    #[test]
    fn pearson_self_is_one((x, _y) in series()) {
        if let Ok(r) = pearson(&x, &x) {
            prop_assert!((r - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mad_is_mean_absolute_difference((x, y) in series()) {
        let m: f64 = mean_abs_diff(&x, &y);
        let mut total = 0.0;
        for i in 0..x.len() {
            total += (x[i] - y[i]).abs();
        }
        prop_assert!(m >= 0.0);
        prop_assert!((m - total / x.len() as f64).abs() < 1e-9);
    }
}
