//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the libtest
//! harness so the lines always reach the terminal.

mod common;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use prodskew::baseline::build_baseline;
use prodskew::corpus::{ObservationConfig, Publication};
use prodskew::cssdist::{characteristic_scores, partition};
use prodskew::fractal::decay_ratios;
use prodskew::report::{analyze_field, build_tables, run_analysis, Format, InputFiles};
use prodskew::scoring::{
    byline_shares, compute_fss, fractional_contribution, ClassWeights, Indicator, PositionClass, WeightScheme,
};
use prodskew::cssdist::PartitionTriple;
use prodskew::skewstats::{gm_index, median, shapiro_wilk};
use prodskew::synth::{generate_corpus, FieldOverride, SynthSpec};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use common::*;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

struct Suite {
    passed: usize,
    failed: Vec<u8>,
}

impl Suite {
    fn run(&mut self, id: u8, name: &str, budget: Option<Duration>, f: impl FnOnce() -> Check) {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let outcome = match (outcome, budget) {
            (Ok(_), Some(b)) if elapsed > b => Err(format!("took {elapsed:.2?}, budget {b:?}")),
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => {
                self.passed += 1;
                println!("ACCEPTANCE {id} PASS  {name} [{elapsed:.2?}] {detail}");
            }
            Err(why) => {
                self.failed.push(id);
                println!("ACCEPTANCE {id} FAIL  {name} [{elapsed:.2?}] {why}");
            }
        }
    }
}

// 1 -----------------------------------------------------------------------

fn decay_ratio_table() -> Check {
    let a = PartitionTriple::from_shares([0.714, 0.214, 0.071]);
    let b = PartitionTriple::from_shares([0.750, 0.083, 0.167]);
    let r = decay_ratios(&a, Some(&b));
    let expected = [
        ("DR1A", r.dr1_a, 0.3),
        ("DR2A", r.dr2_a, 0.3),
        ("DR1B", r.dr1_b, 0.1),
        ("DR2B", r.dr2_b, 2.0),
        ("DDR1", r.ddr1, 0.2),
        ("DDR2", r.ddr2, 1.7),
    ];
    let mut shown = Vec::new();
    for (name, got, want) in expected {
        let got = got.ok_or_else(|| format!("{name} undefined"))?;
        ensure((got - want).abs() <= 0.05, || format!("{name} = {got:.4}, expected {want} +/- 0.05"))?;
        shown.push(format!("{name}={got:.3}"));
    }
    Ok(shown.join(" "))
}

// 2 -----------------------------------------------------------------------

fn gm_forced_values() -> Check {
    let mut r = rng(2);

    // (a) median zero, positive mean
    let mut n_a = 0;
    for _ in 0..1000 {
        let n = r.random_range(3..=60);
        let zeros = n / 2 + 1;
        let mut x: Vec<f64> = vec![0.0; zeros];
        x.extend((zeros..n).map(|_| r.random_range(0.01..50.0)));
        let g = gm_index(&x).map_err(|e| e.to_string())?;
        ensure(g.median == 0.0 && g.mean > 0.0, || format!("fixture not forced: {x:?}"))?;
        ensure(g.gm == 1.0, || format!("(a) GM = {} for {x:?}", g.gm))?;
        n_a += 1;
    }
    ensure(gm_index(&[0.0, 0.0, 0.0, 1.0, 5.0]).unwrap().gm == 1.0, || "(a) fixed case".into())?;

    // (b) symmetric samples
    let mut worst_b: f64 = 0.0;
    for _ in 0..1000 {
        let c = r.random_range(-5.0..5.0);
        let m = r.random_range(1..=25);
        let mut x = Vec::with_capacity(2 * m + 1);
        for _ in 0..m {
            let d = r.random_range(0.01..3.0);
            x.push(c - d);
            x.push(c + d);
        }
        if r.random_bool(0.5) {
            x.push(c);
        }
        let g = gm_index(&x).map_err(|e| e.to_string())?.gm;
        worst_b = worst_b.max(g.abs());
    }
    ensure(worst_b <= 1e-12, || format!("(b) max |GM| on symmetric samples {worst_b:e}"))?;

    // (c) bounds on 10,000 random samples; the unclamped ratio must itself be within bounds
    let mut worst_c: f64 = 0.0;
    for i in 0..10_000 {
        let n = r.random_range(1..=80);
        let x: Vec<f64> = match i % 4 {
            0 => (0..n).map(|_| r.random_range(-10.0..10.0)).collect(),
            1 => random_scores(&mut r, n, 0.4),
            2 => (0..n).map(|_| r.random_range(0..4) as f64).collect(),
            _ => (0..n).map(|_| (r.random_range(-3.0..6.0f64)).exp()).collect(),
        };
        let g = gm_index(&x).map_err(|e| e.to_string())?;
        ensure(g.gm.abs() <= 1.0, || format!("(c) |GM| > 1 for {x:?}"))?;
        let med = median(&x).unwrap();
        let mean = x.iter().sum::<f64>() / n as f64;
        let mad = x.iter().map(|v| (v - med).abs()).sum::<f64>() / n as f64;
        if mad > 0.0 {
            let raw = (mean - med) / mad;
            ensure(raw.abs() <= 1.0 + 1e-12, || format!("(c) raw ratio {raw} for {x:?}"))?;
            worst_c = worst_c.max((raw.clamp(-1.0, 1.0) - g.gm).abs());
        }
    }
    ensure(worst_c <= 1e-12, || format!("(c) GM differs from direct ratio by {worst_c:e}"))?;

    // (d) translation and scale invariance
    let mut worst_d: f64 = 0.0;
    for _ in 0..1000 {
        let n = r.random_range(2..=60);
        let x = random_scores(&mut r, n, 0.3);
        let base = gm_index(&x).map_err(|e| e.to_string())?;
        if base.degenerate {
            continue;
        }
        let b = r.random_range(-10.0..10.0);
        let a = 10f64.powf(r.random_range(-3.0..3.0));
        let shifted: Vec<f64> = x.iter().map(|v| v + b).collect();
        let scaled: Vec<f64> = x.iter().map(|v| v * a).collect();
        for y in [shifted, scaled] {
            let g = gm_index(&y).map_err(|e| e.to_string())?.gm;
            worst_d = worst_d.max((g - base.gm).abs());
        }
    }
    ensure(worst_d <= 1e-12, || format!("(d) invariance deviation {worst_d:e}"))?;
    Ok(format!(
        "(a) {n_a} forced samples GM=1; (b) max|GM| {worst_b:.1e}; (c) 10000 in [-1,1]; (d) max dev {worst_d:.1e}"
    ))
}

// 3 -----------------------------------------------------------------------

fn css_vs_brute_force() -> Check {
    let mut r = rng(3);
    let check_exact = |x: &[f64]| -> Result<(), String> {
        let cs = characteristic_scores(x).map_err(|e| e.to_string())?;
        let p = partition(x, &cs);
        let (mu, counts, label) = brute_force_css(x);
        ensure(
            [cs.mu1, cs.mu2, cs.mu3] == mu && p.counts == counts && cs.degenerate.as_str() == label,
            || {
                format!(
                    "mismatch on {x:?}: got {:?} {:?} {}, oracle {mu:?} {counts:?} {label}",
                    [cs.mu1, cs.mu2, cs.mu3],
                    p.counts,
                    cs.degenerate.as_str()
                )
            },
        )
    };

    // Dyadic values (multiples of 2^-16 below 64): every partial sum is exact,
    // so any summation order gives identical thresholds.
    let mut labels: BTreeMap<&str, usize> = BTreeMap::new();
    for i in 0..1000 {
        let n = r.random_range(1..=50);
        let x: Vec<f64> = match i % 5 {
            0 => vec![r.random_range(0..64 * 65536) as f64 / 65536.0; n],
            1 => (0..n).map(|_| r.random_range(0..5) as f64).collect(),
            2 => (0..n)
                .map(|_| if r.random_bool(0.5) { 0.0 } else { r.random_range(1..64 * 65536) as f64 / 65536.0 })
                .collect(),
            _ => (0..n).map(|_| r.random_range(0..64 * 65536) as f64 / 65536.0).collect(),
        };
        check_exact(&x)?;
        *labels.entry(brute_force_css(&x).2).or_default() += 1;
    }
    for x in [
        vec![5.0; 7],
        vec![0.0; 4],
        vec![2.5],
        vec![0.0, 0.0, 0.0, 0.0, 3.0, 9.0],
        vec![0.0, 0.0, 1.0, 2.0, 3.0, 6.0],
        vec![0.0, 5.0, 5.0],
    ] {
        check_exact(&x)?;
    }

    // Arbitrary doubles: memberships exact, thresholds to rounding.
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = r.random_range(1..=50);
        let x = random_scores(&mut r, n, 0.2);
        let cs = characteristic_scores(&x).map_err(|e| e.to_string())?;
        let (mu, counts, label) = brute_force_css(&x);
        ensure(partition(&x, &cs).counts == counts && cs.degenerate.as_str() == label, || {
            format!("membership mismatch on {x:?}")
        })?;
        for (a, b) in [cs.mu1, cs.mu2, cs.mu3].iter().zip(mu) {
            worst = worst.max((a - b).abs() / b.abs().max(f64::MIN_POSITIVE));
        }
    }
    ensure(worst <= 1e-12, || format!("continuous thresholds differ by {worst:e}"))?;
    Ok(format!(
        "1000 exact + 6 edge cases, levels {labels:?}; 1000 continuous, max rel mu dev {worst:.1e}"
    ))
}

// 4 -----------------------------------------------------------------------

fn scale_invariance() -> Check {
    let mut r = rng(4);
    let mut worst: f64 = 0.0;
    let close = |a: f64, b: f64, worst: &mut f64| {
        *worst = worst.max((a - b).abs());
    };
    for i in 0..300 {
        let n = r.random_range(5..=300);
        let x = random_scores(&mut r, n, (i % 6) as f64 * 0.1);
        let base = analyze_field("F", "D", &x).map_err(|e| e.to_string())?;
        for k in [0.1, 3.0, 1000.0] {
            let y: Vec<f64> = x.iter().map(|v| v * k).collect();
            let s = analyze_field("F", "D", &y).map_err(|e| e.to_string())?;
            ensure(s.partition.counts == base.partition.counts, || {
                format!("k={k}: memberships {:?} vs {:?}", s.partition.counts, base.partition.counts)
            })?;
            ensure(s.n_b == base.n_b, || format!("k={k}: |B| differs"))?;
            for (a, b) in s.partition.shares().iter().zip(base.partition.shares()) {
                close(*a, b, &mut worst);
            }
            close(s.gm_a.gm, base.gm_a.gm, &mut worst);
            match (s.gm_b, base.gm_b) {
                (Some(a), Some(b)) => close(a.gm, b.gm, &mut worst),
                (None, None) => {}
                _ => return Err(format!("k={k}: GM(B) definedness differs")),
            }
            for (a, b) in [(s.fractal.ddr1, base.fractal.ddr1), (s.fractal.ddr2, base.fractal.ddr2)] {
                match (a, b) {
                    (Some(a), Some(b)) => close(a, b, &mut worst),
                    (None, None) => {}
                    _ => return Err(format!("k={k}: DDR definedness differs")),
                }
            }
        }
    }
    ensure(worst <= 1e-9, || format!("max deviation {worst:e}"))?;
    Ok(format!("300 samples x k in {{0.1, 3, 1000}}, max deviation {worst:.1e}"))
}

// 5 -----------------------------------------------------------------------

fn random_table(r: &mut rand_chacha::ChaCha8Rng) -> BTreeMap<PositionClass, ClassWeights> {
    let mut t = BTreeMap::new();
    for c in [
        PositionClass::First,
        PositionClass::Last,
        PositionClass::Second,
        PositionClass::SecondToLast,
        PositionClass::Other,
    ] {
        if c == PositionClass::Other || r.random_bool(0.8) {
            t.insert(
                c,
                ClassWeights {
                    intramural: r.random_range(0.1..5.0),
                    extramural: r.random_range(0.1..5.0),
                },
            );
        }
    }
    t
}

fn fractional_sums() -> Check {
    let mut r = rng(5);
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let n = r.random_range(1..=40);
        let p = Publication {
            pub_id: format!("P{i}"),
            year: 2010,
            doc_type: prodskew::corpus::DocType::Article,
            categories: vec!["C1".into()],
            citations: 1,
            authors: random_byline(&mut r, n, None),
        };
        let weighted = if i % 2 == 0 {
            WeightScheme::byline_weighted(WeightScheme::default_table())
        } else {
            WeightScheme::byline_weighted(random_table(&mut r))
        };
        for scheme in [WeightScheme::uniform(), weighted] {
            let sum: f64 = byline_shares(&p, &scheme).map_err(|e| e.to_string())?.iter().sum();
            let by_pos: f64 = (1..=n)
                .map(|pos| fractional_contribution(&p, pos, &scheme).unwrap())
                .sum();
            worst = worst.max((sum - 1.0).abs()).max((by_pos - 1.0).abs());
        }
    }
    ensure(worst <= 1e-12, || format!("max |sum - 1| = {worst:e}"))?;
    Ok(format!("1000 bylines x 2 schemes, max |sum - 1| {worst:.1e}"))
}

// 6 -----------------------------------------------------------------------

fn fss_direct() -> Check {
    let mut r = rng(6);
    let mut worst: f64 = 0.0;
    let mut fallbacks = 0;
    for i in 0..500 {
        let n_ref = r.random_range(5..120);
        let reference = random_reference(&mut r, n_ref);
        let baseline = build_baseline(&reference).map_err(|e| e.to_string())?;
        let n_own = r.random_range(1..=12);
        let own = random_own_publications(&mut r, "R1", n_own);
        let years = if r.random_bool(0.5) {
            r.random_range(1..=5) as f64
        } else {
            r.random_range(0.25..5.0)
        };
        let who = researcher("R1", "F", "D", years);
        let own_refs: Vec<&Publication> = own.iter().collect();
        let (scheme, oracle_weights) = if i % 2 == 0 {
            (WeightScheme::uniform(), None)
        } else {
            let t = random_table(&mut r);
            let names: BTreeMap<&'static str, (f64, f64)> = t
                .iter()
                .map(|(c, w)| {
                    let name = match c {
                        PositionClass::First => "first",
                        PositionClass::Last => "last",
                        PositionClass::Second => "second",
                        PositionClass::SecondToLast => "second_to_last",
                        PositionClass::Other => "other",
                    };
                    (name, (w.intramural, w.extramural))
                })
                .collect();
            (WeightScheme::byline_weighted(t), Some(names))
        };
        let got = compute_fss(&who, &own_refs, &baseline, &scheme).map_err(|e| e.to_string())?;
        fallbacks += got.baseline_fallbacks;
        let want = oracle_fss("R1", years, &own, &reference, oracle_weights.as_ref());
        worst = worst.max((got.value - want).abs());
    }
    ensure(worst <= 1e-12, || format!("max |FSS - direct| = {worst:e}"))?;
    Ok(format!(
        "500 fixtures, max |diff| {worst:.1e}, {fallbacks} category fallbacks exercised"
    ))
}

// 7 -----------------------------------------------------------------------

fn shapiro_calibration() -> Check {
    let mut r = rng(7);
    let mut rejections = 0;
    for _ in 0..2000 {
        let x: Vec<f64> = (0..50).map(|_| StandardNormal.sample(&mut r)).collect();
        let t = shapiro_wilk(&x).map_err(|e| e.to_string())?;
        ensure(t.w_statistic > 0.0 && t.w_statistic <= 1.0, || format!("W = {}", t.w_statistic))?;
        if t.p_value < 0.05 {
            rejections += 1;
        }
    }
    let rate = rejections as f64 / 2000.0;
    ensure((0.035..=0.065).contains(&rate), || format!("rejection rate {rate}"))?;
    Ok(format!("rejection rate at 0.05: {rate:.4}, W in (0, 1]"))
}

// 8 -----------------------------------------------------------------------

const TABLES: [&str; 13] = [
    "field_summary",
    "partitions",
    "discipline_summary",
    "discipline_means",
    "discipline_extremes",
    "discipline_share_extremes",
    "discipline_gm",
    "decay_table",
    "fractal",
    "fractal_summary",
    "share_variation",
    "gm_summary",
    "gm_correlation",
];

const PLOTS: [&str; 13] = [
    "gm_histogram.csv",
    "gm_boxplot.csv",
    "gm_distribution.svg",
    "ddr_scatter.csv",
    "ddr_medians.csv",
    "ddr_scatter.svg",
    "partition_a.csv",
    "partition_b.csv",
    "partition_guides.csv",
    "partition_a.svg",
    "partition_b.svg",
    "discipline_partitions.csv",
    "discipline_partitions.svg",
];

fn write_synthetic(dir: &Path, spec: &SynthSpec) -> Result<(usize, usize), String> {
    let corpus = generate_corpus(spec).map_err(|e| e.to_string())?;
    corpus.write_to(dir).map_err(|e| e.to_string())?;
    Ok((corpus.researchers.len(), corpus.publications.len()))
}

fn inputs(dir: &Path) -> InputFiles {
    InputFiles {
        roster: dir.join("researchers.csv"),
        publications: dir.join("publications.jsonl"),
        ..InputFiles::default()
    }
}

fn check_outputs(out: &Path, ext: &str) -> Result<(), String> {
    for t in TABLES {
        let p = out.join("tables").join(format!("{t}.{ext}"));
        let len = std::fs::metadata(&p).map_err(|e| format!("{}: {e}", p.display()))?.len();
        ensure(len > 0, || format!("{} is empty", p.display()))?;
    }
    for f in PLOTS {
        let p = out.join("plots").join(f);
        let len = std::fs::metadata(&p).map_err(|e| format!("{}: {e}", p.display()))?.len();
        ensure(len > 0, || format!("{} is empty", p.display()))?;
    }
    for f in ["run_manifest.json", "scores.csv"] {
        ensure(out.join(f).exists(), || format!("missing {f}"))?;
    }
    Ok(())
}

fn end_to_end() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let data = tmp.path().join("data");
    let out = tmp.path().join("out");
    let spec = SynthSpec {
        field_overrides: vec![FieldOverride {
            field: 0,
            zero_share: Some(0.6),
            pubs_per_researcher: None,
            positive_part: None,
        }],
        pubs_per_researcher: [1, 16],
        seed: 8,
        ..SynthSpec::default()
    };
    let (n_res, n_pubs) = write_synthetic(&data, &spec)?;
    ensure((1800..=2200).contains(&n_res), || format!("{n_res} researchers"))?;
    ensure((13_000..=17_000).contains(&n_pubs), || format!("{n_pubs} publications"))?;

    let summary = run_analysis(&inputs(&data), &ObservationConfig::default(), Format::Csv, &out)
        .map_err(|e| e.to_string())?;
    let b = &summary.bundle;
    ensure(b.analyses.len() == 10, || format!("{} fields analysed", b.analyses.len()))?;
    check_outputs(&out, "csv")?;

    let f01 = b.analyses.iter().find(|a| a.field_code == "F01").ok_or("F01 missing")?;
    ensure(f01.gm_a.gm == 1.0, || format!("GM(A) of the p0 = 0.6 field is {}", f01.gm_a.gm))?;
    let gm_a = b.gm.a.as_ref().ok_or("no GM(A) distribution")?;
    ensure(gm_a.outlier_fields.iter().any(|(f, g)| f == "F01" && *g == 1.0), || {
        format!("F01 not flagged; outliers {:?}", gm_a.outlier_fields)
    })?;
    let gm_csv = std::fs::read_to_string(out.join("tables/gm_summary.csv")).map_err(|e| e.to_string())?;
    ensure(gm_csv.contains("F01=1.00"), || "gm_summary.csv does not list F01".into())?;
    Ok(format!(
        "{n_res} researchers, 10 fields, {n_pubs} publications; F01 GM(A) = 1 flagged (fence {:.3})",
        gm_a.boxplot.upper_fence
    ))
}

// 9 -----------------------------------------------------------------------

fn structures_on_synthetic_data() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let data = tmp.path().join("data");
    let spec = SynthSpec {
        n_fields: 8,
        researchers_per_field: [40, 90],
        seed: 9,
        ..SynthSpec::default()
    };
    write_synthetic(&data, &spec)?;
    let mut produced = 0;
    for (indicator, format) in [
        (Indicator::Fss, Format::Csv),
        (Indicator::Fss, Format::Markdown),
        (Indicator::Po, Format::Json),
    ] {
        let out = tmp.path().join(format!("{indicator}-{}", format.extension()));
        let config = ObservationConfig {
            indicator,
            recompute_css_at_uda: true,
            ..ObservationConfig::default()
        };
        let s = run_analysis(&inputs(&data), &config, format, &out).map_err(|e| e.to_string())?;
        check_outputs(&out, format.extension())?;
        ensure(out.join(format!("tables/discipline_recomputed.{}", format.extension())).exists(), || {
            "recomputed discipline table missing".into()
        })?;
        produced += build_tables(&s.bundle).len();
    }
    Ok(format!(
        "{produced} tables over 3 runs (FSS csv, FSS markdown, PO json) plus all plots on synthetic data. \
         Source-population figures (per-discipline tables, the top-class share, normality p-values, \
         size/GM correlation) are NOT reproducible: the original researcher corpus is not available"
    ))
}

fn main() {
    let mut suite = Suite {
        passed: 0,
        failed: Vec::new(),
    };
    let secs = Duration::from_secs;
    suite.run(1, "decay ratios of the published triples", Some(secs(1)), decay_ratio_table);
    suite.run(2, "GM forced values, bounds and invariances", Some(secs(10)), gm_forced_values);
    suite.run(3, "CSS equals brute-force oracle", Some(secs(10)), css_vs_brute_force);
    suite.run(4, "scale invariance of memberships, shares, GM, DDR", None, scale_invariance);
    suite.run(5, "fractional contributions sum to one", None, fractional_sums);
    suite.run(6, "compute_fss equals direct evaluation", None, fss_direct);
    suite.run(7, "Shapiro-Wilk calibration under normality", None, shapiro_calibration);
    suite.run(8, "end-to-end synthetic run", Some(secs(60)), end_to_end);
    suite.run(9, "table and figure structures on synthetic data", None, structures_on_synthetic_data);
    println!("ACCEPTANCE SUMMARY {}/9 passed", suite.passed);
    if !suite.failed.is_empty() {
        println!("ACCEPTANCE FAILED criteria: {:?}", suite.failed);
        std::process::exit(1);
    }
}
