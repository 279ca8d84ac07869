use proptest::prelude::*;
use scilake::align::{Mapping, Method};
use scilake::eval::*;

fn mapping(topic: &str, term: &str, onto: &str, sim: f64) -> Mapping {
    Mapping {
        topic_id: topic.into(),
        term_id: term.into(),
        ontology: onto.into(),
        similarity: sim,
        method: Method::Embedding,
        tier: None,
        matched_text: String::new(),
    }
}

/// Ten pairs: (similarity, label).
const TABLE: [(f64, Label); 10] = [
    (0.98, Label::Correct),
    (0.95, Label::Correct),
    (0.91, Label::Partial),
    (0.88, Label::Correct),
    (0.84, Label::Incorrect),
    (0.80, Label::Correct),
    (0.76, Label::Partial),
    (0.72, Label::Correct),
    (0.68, Label::Incorrect),
    (0.62, Label::Correct),
];

fn ten_pairs() -> (Vec<Mapping>, Vec<GoldPair>) {
    let scored = TABLE
        .iter()
        .enumerate()
        .map(|(i, (s, _))| mapping(&format!("t{i}"), "T", "o", *s))
        .collect();
    let gold = TABLE
        .iter()
        .enumerate()
        .map(|(i, (s, l))| GoldPair {
            topic_id: format!("t{i}"),
            term_id: "T".into(),
            ontology: "o".into(),
            similarity: *s,
            stratum: Stratum::of(*s).unwrap_or(Stratum::Borderline),
            label: Some(*l),
        })
        .collect();
    (scored, gold)
}

#[test]
fn sweep_matches_hand_table() {
    let (scored, gold) = ten_pairs();
    let rows = pr_sweep(&scored, &gold, &[0.60, 0.70, 0.80, 0.90, 1.00]).unwrap();
    // (threshold, tp, fp, n) counted by hand; 6 correct pairs in total
    let hand = [(0.60, 6, 4, 10), (0.70, 5, 3, 8), (0.80, 4, 2, 6), (0.90, 2, 1, 3), (1.00, 0, 0, 0)];
    for (row, (t, tp, fp, n)) in rows.iter().zip(hand) {
        assert_eq!(row.threshold, t);
        assert_eq!(row.n_predictions, n);
        let p = (tp + fp > 0).then(|| tp as f64 / (tp + fp) as f64);
        let r = tp as f64 / 6.0;
        assert_eq!(row.precision, p, "t={t}");
        assert_eq!(row.recall, Some(r), "t={t}");
        let f = match p {
            Some(p) if p + r > 0.0 => 2.0 * p * r / (p + r),
            _ => 0.0,
        };
        assert_eq!(row.f1, Some(f), "t={t}");
    }
}

#[test]
fn sweep_below_min_equals_unthresholded() {
    let (scored, gold) = ten_pairs();
    let rows = pr_sweep(&scored, &gold, &[0.0, 0.5, 0.61]).unwrap();
    let all = score_strict(&scored, &gold).unwrap();
    for r in rows {
        assert_eq!(r.recall, all.recall);
    }
}

fn pool(n_per_band: usize, ontologies: &[(&str, usize)]) -> Vec<Mapping> {
    let mut out = Vec::new();
    for (b, sim) in [0.97, 0.9, 0.8, 0.7].iter().enumerate() {
        for (o, weight) in ontologies {
            for i in 0..n_per_band * weight {
                out.push(mapping(&format!("t{b}_{i}"), &format!("{o}{i}"), o, *sim));
            }
        }
    }
    out
}

#[test]
fn default_quotas_give_three_hundred() {
    let ms = pool(60, &[("go", 2), ("mesh", 1)]);
    let s = stratified_sample(&ms, &default_quotas(), 7).unwrap();
    assert_eq!(s.len(), 300);
    for q in default_quotas() {
        assert_eq!(s.iter().filter(|g| g.stratum == q.stratum).count(), q.size);
    }
    assert!(s.iter().all(|g| g.label.is_none()));
}

#[test]
fn sample_is_seed_deterministic() {
    let ms = pool(60, &[("go", 3), ("mesh", 1)]);
    let a = stratified_sample(&ms, &default_quotas(), 1).unwrap();
    let b = stratified_sample(&ms, &default_quotas(), 1).unwrap();
    let c = stratified_sample(&ms, &default_quotas(), 2).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    let per_onto = |s: &[GoldPair]| {
        let mut v: Vec<(Stratum, String)> = s.iter().map(|g| (g.stratum, g.ontology.clone())).collect();
        v.sort();
        v
    };
    assert_eq!(per_onto(&a), per_onto(&c));

    let dir = tempfile::tempdir().unwrap();
    let (pa, pb) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    write_gold(&pa, &a).unwrap();
    write_gold(&pb, &b).unwrap();
    assert_eq!(std::fs::read(pa).unwrap(), std::fs::read(pb).unwrap());
}

#[test]
fn seventy_five_twenty_five_stratum() {
    let mut ms = Vec::new();
    for i in 0..75 {
        ms.push(mapping(&format!("a{i}"), "x", "go", 0.9));
    }
    for i in 0..25 {
        ms.push(mapping(&format!("b{i}"), "y", "mesh", 0.9));
    }
    let quotas = [StratumQuota {
        stratum: Stratum::High,
        size: 20,
    }];
    let s = stratified_sample(&ms, &quotas, 0).unwrap();
    assert_eq!(s.iter().filter(|g| g.ontology == "go").count(), 15);
    assert_eq!(s.iter().filter(|g| g.ontology == "mesh").count(), 5);
}

#[test]
fn shortfall_is_reported() {
    let ms = pool(10, &[("go", 1)]);
    let err = stratified_sample(&ms, &default_quotas(), 0).unwrap_err().to_string();
    assert!(err.contains("short by 40"), "{err}");
}

#[test]
fn all_correct_exact_stratum_is_precise() {
    let gold: Vec<GoldPair> = (0..50)
        .map(|i| GoldPair {
            topic_id: format!("t{i}"),
            term_id: "T".into(),
            ontology: "o".into(),
            similarity: 0.97,
            stratum: Stratum::Exact,
            label: Some(Label::Correct),
        })
        .collect();
    let preds: Vec<_> = (0..50).map(|i| mapping(&format!("t{i}"), "T", "o", 0.97)).collect();
    let r = score_strict(&preds, &gold).unwrap();
    assert_eq!(r.per_stratum_precision[&Stratum::Exact], Some(1.0));
    assert_eq!((r.precision, r.recall, r.f1), (Some(1.0), Some(1.0), Some(1.0)));
}

fn arb_case() -> impl Strategy<Value = (Vec<Mapping>, Vec<GoldPair>)> {
    prop::collection::vec((0.5f64..=1.0, 0u8..3, any::<bool>()), 1..60).prop_map(|rows| {
        let mut scored = Vec::new();
        let mut gold = Vec::new();
        for (i, (s, l, emitted)) in rows.into_iter().enumerate() {
            let label = [Label::Correct, Label::Partial, Label::Incorrect][l as usize];
            gold.push(GoldPair {
                topic_id: format!("t{i}"),
                term_id: "T".into(),
                ontology: "o".into(),
                similarity: s,
                stratum: Stratum::of(s).unwrap_or(Stratum::Borderline),
                label: Some(label),
            });
            if emitted {
                scored.push(mapping(&format!("t{i}"), "T", "o", s));
            }
        }
        (scored, gold)
    })
}

proptest! {
    #[test]
    fn recall_is_non_increasing((scored, gold) in arb_case()) {
        let rows = pr_sweep(&scored, &gold, &default_thresholds()).unwrap();
        for w in rows.windows(2) {
            if let (Some(a), Some(b)) = (w[0].recall, w[1].recall) {
                prop_assert!(b <= a);
            }
        }
        for r in &rows {
            for v in [r.precision, r.recall, r.f1].into_iter().flatten() {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            if let (Some(p), Some(rc), Some(f)) = (r.precision, r.recall, r.f1) {
                prop_assert!(f <= 2.0 * p.min(rc) + 1e-12);
            }
        }
    }

    #[test]
    fn scoring_ignores_order_and_duplicates((scored, gold) in arb_case(), seed in any::<u64>()) {
        let mut shuffled = scored.clone();
        shuffled.extend(scored.iter().cloned());
        let n = shuffled.len();
        if n > 0 {
            shuffled.rotate_left((seed as usize) % n);
        }
        prop_assert_eq!(score_strict(&scored, &gold).unwrap(), score_strict(&shuffled, &gold).unwrap());
    }
}
