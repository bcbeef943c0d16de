mod common;

use avtp_ids::ingest::Label::{self, Benign, Injected};
use avtp_ids::metrics::{auroc, confusion, prf1, roc_curve, trapezoid_area, Confusion, MetricsReport};
use common::{brute_confusion, pairwise_auroc, random_scored};
use proptest::prelude::*;

#[test]
fn confusion_examples() {
    let c = confusion(&[Injected, Benign], &[0.9, 0.1], 0.5).unwrap();
    assert_eq!(c, Confusion { tp: 1, fp: 0, tn: 1, fn_: 0 });
    let c = confusion(&[Benign; 7], &[1.0; 7], 0.5).unwrap();
    assert_eq!(c, Confusion { tp: 0, fp: 7, tn: 0, fn_: 0 });
}

#[test]
fn confusion_matches_tally() {
    for seed in 0..50 {
        let (l, s) = random_scored(150, seed);
        for th in [0.0, 0.25, 0.5, 0.55, 1.0] {
            assert_eq!(confusion(&l, &s, th).unwrap(), brute_confusion(&l, &s, th));
        }
    }
}

#[test]
fn prf1_examples() {
    let perfect = prf1(&Confusion { tp: 5, fp: 0, tn: 5, fn_: 0 });
    assert_eq!((perfect.accuracy, perfect.precision, perfect.recall, perfect.f1), (1.0, 1.0, 1.0, 1.0));

    let none = prf1(&Confusion { tp: 0, fp: 0, tn: 4, fn_: 2 });
    assert_eq!((none.precision, none.f1), (0.0, 0.0));
    assert!(none.zero_division.contains(&"precision"));

    let m = prf1(&Confusion { tp: 9, fp: 1, tn: 87, fn_: 3 });
    assert!((m.precision - 0.9).abs() < 1e-12);
    assert!((m.recall - 0.75).abs() < 1e-12);
    assert!((m.f1 - 9.0 / 11.0).abs() < 1e-12);
    assert!((m.accuracy - 0.96).abs() < 1e-12);
}

#[test]
fn auroc_matches_pairwise_oracle() {
    for seed in 0..100 {
        let (l, s) = random_scored(200, seed);
        let a = auroc(&l, &s).unwrap();
        assert!((a - pairwise_auroc(&l, &s)).abs() <= 1e-9, "seed {seed}");
        let area = trapezoid_area(&roc_curve(&l, &s).unwrap());
        assert!((a - area).abs() <= 1e-12, "seed {seed}");
    }
}

#[test]
fn auroc_separation_and_inversion() {
    let l = [Benign, Benign, Injected, Injected, Benign, Injected];
    let s = [0.1, 0.2, 0.8, 0.9, 0.3, 0.7];
    assert_eq!(auroc(&l, &s).unwrap(), 1.0);
    let (l, s) = random_scored(120, 3);
    let inv: Vec<Label> = l.iter().map(|x| if *x == Injected { Benign } else { Injected }).collect();
    assert!((auroc(&inv, &s).unwrap() - (1.0 - auroc(&l, &s).unwrap())).abs() < 1e-12);
}

#[test]
fn roc_examples() {
    assert_eq!(
        roc_curve(&[Injected, Benign], &[1.0, 0.0]).unwrap(),
        vec![(0.0, 0.0), (0.0, 1.0), (1.0, 1.0)]
    );
    let flat = roc_curve(&[Injected, Benign, Benign, Injected], &[0.4; 4]).unwrap();
    assert_eq!(flat, vec![(0.0, 0.0), (1.0, 1.0)]);
    assert_eq!(trapezoid_area(&flat), 0.5);
}

#[test]
fn report_json_keys_and_single_class() {
    let (l, s) = random_scored(40, 1);
    let r = MetricsReport::evaluate(&l, &s, 0.5).unwrap();
    let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    for k in ["accuracy", "precision", "recall", "f1", "auroc", "roc_points"] {
        assert!(v.get(k).is_some(), "{k}");
    }
    let one = MetricsReport::evaluate(&[Benign; 3], &[0.1, 0.2, 0.3], 0.5).unwrap();
    assert_eq!(one.auroc, None);
    assert_eq!(one.accuracy, 1.0);
    assert_eq!(MetricsReport::evaluate(&l, &s, 0.5).unwrap(), r);
}

fn scored() -> impl Strategy<Value = (Vec<Label>, Vec<f64>)> {
    prop::collection::vec((any::<bool>(), 0u8..20), 2..120).prop_filter_map("two classes", |v| {
        let l: Vec<Label> = v.iter().map(|(b, _)| if *b { Injected } else { Benign }).collect();
        let s: Vec<f64> = v.iter().map(|(_, q)| *q as f64 / 19.0).collect();
        (l.contains(&Injected) && l.contains(&Benign)).then_some((l, s))
    })
}

proptest! {
    #[test]
    fn auroc_invariant_under_increasing_transform((l, s) in scored()) {
        let t: Vec<f64> = s.iter().map(|x| (3.0 * x).exp() - 7.0).collect();
        prop_assert!((auroc(&l, &s).unwrap() - auroc(&l, &t).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn confusion_permutation_invariant((l, s) in scored(), rot in 0usize..200) {
        let k = rot % l.len();
        let (mut l2, mut s2) = (l.clone(), s.clone());
        l2.rotate_left(k);
        s2.rotate_left(k);
        l2.reverse();
        s2.reverse();
        prop_assert_eq!(confusion(&l, &s, 0.5).unwrap(), confusion(&l2, &s2, 0.5).unwrap());
    }

    #[test]
    fn point_metrics_bounded_and_ordered((l, s) in scored(), th in 0.0f64..=1.0) {
        let m = prf1(&confusion(&l, &s, th).unwrap());
        for v in [m.accuracy, m.precision, m.recall, m.f1] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        if m.precision > 0.0 && m.recall > 0.0 {
            let geo = (m.precision * m.recall).sqrt();
            let arith = (m.precision + m.recall) / 2.0;
            prop_assert!(m.f1 <= geo + 1e-12 && geo <= arith + 1e-12);
        }
    }

    #[test]
    fn roc_area_equals_auroc((l, s) in scored()) {
        let area = trapezoid_area(&roc_curve(&l, &s).unwrap());
        prop_assert!((area - auroc(&l, &s).unwrap()).abs() < 1e-12);
    }
}
