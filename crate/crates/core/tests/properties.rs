mod common;

use prodskew::baseline::build_baseline;
use prodskew::corpus::{filter_fields, Corpus, DocType, ObservationConfig, Publication, Researcher};
use prodskew::cssdist::{characteristic_scores, partition, subpopulation_b, Category};
use prodskew::report::analyze_field;
use prodskew::scoring::{byline_shares, compute_fss, compute_po, PoCounting, WeightScheme};
use prodskew::skewstats::{boxplot_summary, gm_index, histogram, quantile};
use proptest::prelude::*;

use common::*;

fn scores(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![2 => Just(0.0), 8 => 0.001f64..100.0], 1..max_len)
}

fn reals(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-100.0f64..100.0, 1..max_len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn gm_is_bounded(x in reals(60)) {
        let g = gm_index(&x).unwrap().gm;
        prop_assert!((-1.0..=1.0).contains(&g));
    }

    #[test]
    fn gm_translation_and_scale(x in scores(60), b in -10.0f64..10.0, a in 0.01f64..100.0) {
        let base = gm_index(&x).unwrap();
        prop_assume!(!base.degenerate);
        let shifted: Vec<f64> = x.iter().map(|v| v + b).collect();
        let scaled: Vec<f64> = x.iter().map(|v| v * a).collect();
        prop_assert!((gm_index(&shifted).unwrap().gm - base.gm).abs() < 1e-10);
        prop_assert!((gm_index(&scaled).unwrap().gm - base.gm).abs() < 1e-10);
    }

    #[test]
    fn gm_flips_sign_under_reflection(x in reals(60)) {
        let g = gm_index(&x).unwrap().gm;
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        prop_assert!((gm_index(&neg).unwrap().gm + g).abs() < 1e-10);
    }

    #[test]
    fn css_thresholds_are_ordered_and_partition_is_complete(x in scores(200)) {
        let cs = characteristic_scores(&x).unwrap();
        prop_assert!(cs.mu1 <= cs.mu2 && cs.mu2 <= cs.mu3);
        let p = partition(&x, &cs);
        prop_assert_eq!(p.counts.iter().sum::<usize>(), x.len());
        prop_assert!((p.shares().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let b = subpopulation_b(&x, &cs);
        prop_assert_eq!(b.len(), p.count(Category::Fp) + p.count(Category::Hp) + p.count(Category::Vhp));
        prop_assert_eq!(p.count(Category::Up), x.iter().filter(|v| **v == 0.0).count());
        if let Some(t) = b.triple() {
            prop_assert!((t.shares.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn css_matches_brute_force(x in scores(50)) {
        let cs = characteristic_scores(&x).unwrap();
        let (mu, counts, label) = brute_force_css(&x);
        prop_assert_eq!(partition(&x, &cs).counts, counts);
        prop_assert_eq!(cs.degenerate.as_str(), label);
        for (a, b) in [cs.mu1, cs.mu2, cs.mu3].iter().zip(mu) {
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn analysis_is_scale_invariant(x in scores(120), k in 0.01f64..1000.0) {
        let base = analyze_field("F", "D", &x).unwrap();
        let y: Vec<f64> = x.iter().map(|v| v * k).collect();
        let s = analyze_field("F", "D", &y).unwrap();
        prop_assert_eq!(s.partition.counts, base.partition.counts);
        prop_assert!((s.gm_a.gm - base.gm_a.gm).abs() < 1e-9);
        prop_assert_eq!(s.fractal.is_assessable(), base.fractal.is_assessable());
    }

    #[test]
    fn analysis_ignores_score_order(mut x in scores(80), seed in any::<u64>()) {
        let base = analyze_field("F", "D", &x).unwrap();
        let mut r = rng(seed);
        use rand::seq::SliceRandom;
        x.shuffle(&mut r);
        prop_assert_eq!(analyze_field("F", "D", &x).unwrap(), base);
    }

    #[test]
    fn histogram_counts_everything(x in reals(100), w in 0.01f64..5.0) {
        let h = histogram(&x, w).unwrap();
        prop_assert_eq!(h.total(), x.len());
    }

    #[test]
    fn quantiles_are_monotone(x in reals(60), p in 0.0f64..1.0, q in 0.0f64..1.0) {
        let (lo, hi) = if p <= q { (p, q) } else { (q, p) };
        prop_assert!(quantile(&x, lo).unwrap() <= quantile(&x, hi).unwrap());
    }

    #[test]
    fn boxplot_whiskers_stay_inside_fences(x in reals(60)) {
        let b = boxplot_summary(&x).unwrap();
        prop_assert!(b.lower_fence <= b.whisker_low && b.whisker_high <= b.upper_fence);
        prop_assert!(b.q1 <= b.q2 && b.q2 <= b.q3);
        for o in &b.outliers {
            prop_assert!(b.is_outlier(*o));
        }
    }

    #[test]
    fn byline_shares_sum_to_one(seed in any::<u64>(), n in 1u32..40) {
        let mut r = rng(seed);
        let p = Publication {
            pub_id: "P".into(),
            year: 2010,
            doc_type: DocType::Article,
            categories: vec!["C1".into()],
            citations: 3,
            authors: random_byline(&mut r, n, None),
        };
        for scheme in [WeightScheme::uniform(), WeightScheme::byline_weighted(WeightScheme::default_table())] {
            let s = byline_shares(&p, &scheme).unwrap();
            prop_assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn baseline_ignores_reference_order(seed in any::<u64>(), n in 1usize..80) {
        let mut r = rng(seed);
        let mut reference = random_reference(&mut r, n);
        let a = build_baseline(&reference).unwrap();
        use rand::seq::SliceRandom;
        reference.shuffle(&mut r);
        prop_assert_eq!(build_baseline(&reference).unwrap(), a);
    }

    #[test]
    fn fss_is_homogeneous_in_citations(seed in any::<u64>(), k in 2u64..50) {
        let mut r = rng(seed);
        let reference = random_reference(&mut r, 40);
        let own = random_own_publications(&mut r, "R1", 6);
        let who = researcher("R1", "F", "D", 4.0);
        let scale = |pubs: &[Publication]| -> Vec<Publication> {
            pubs.iter().cloned().map(|mut p| { p.citations *= k; p }).collect()
        };
        let scheme = WeightScheme::uniform();
        let own_refs: Vec<&Publication> = own.iter().collect();
        let base = compute_fss(&who, &own_refs, &build_baseline(&reference).unwrap(), &scheme).unwrap().value;
        let own_k = scale(&own);
        let own_k_refs: Vec<&Publication> = own_k.iter().collect();
        let scaled = compute_fss(&who, &own_k_refs, &build_baseline(&scale(&reference)).unwrap(), &scheme)
            .unwrap()
            .value;
        prop_assert!((scaled - base).abs() <= 1e-12 * base.abs().max(1.0));
    }

    #[test]
    fn po_ignores_citations(seed in any::<u64>()) {
        let mut r = rng(seed);
        let own = random_own_publications(&mut r, "R1", 8);
        let recited: Vec<Publication> = own.iter().cloned().map(|mut p| { p.citations = p.citations * 7 + 1; p }).collect();
        let who = researcher("R1", "F", "D", 3.0);
        let a: Vec<&Publication> = own.iter().collect();
        let b: Vec<&Publication> = recited.iter().collect();
        let scheme = WeightScheme::byline_weighted(WeightScheme::default_table());
        for counting in [PoCounting::Full, PoCounting::Fractional(&scheme)] {
            prop_assert_eq!(compute_po(&who, &a, counting).unwrap().value, compute_po(&who, &b, counting).unwrap().value);
        }
    }

    #[test]
    fn field_filter_is_idempotent(sizes in prop::collection::vec(1usize..12, 1..8), min in 1usize..10) {
        let mut researchers: Vec<Researcher> = Vec::new();
        for (f, &n) in sizes.iter().enumerate() {
            for i in 0..n {
                researchers.push(researcher(&format!("F{f}-{i}"), &format!("F{f}"), "D", 5.0));
            }
        }
        let corpus = Corpus::from_records(researchers, Vec::new(), &ObservationConfig::default()).unwrap();
        match filter_fields(&corpus, min) {
            Err(_) => prop_assert!(sizes.iter().all(|&n| n < min)),
            Ok(once) => {
                let twice = filter_fields(&once.corpus, min).unwrap();
                prop_assert!(twice.excluded_fields.is_empty());
                prop_assert_eq!(twice.corpus.researchers(), once.corpus.researchers());
                prop_assert_eq!(once.excluded_fields.len(), sizes.iter().filter(|&&n| n < min).count());
            }
        }
    }
}
