use std::path::{Path, PathBuf};

use super::table::{Cell, Format, Table};
use super::{AnalysisBundle, MinMax, ReportError, Spread};
use crate::cssdist::{Category, PartitionTriple};
use crate::fractal::{Classification, Fractality};

const SCORE_DP: usize = 2;
const GM_DP: usize = 2;
const DR_DP: usize = 1;
const FINE_DP: usize = 6;

fn joined(fields: &[String]) -> Cell {
    Cell::text(fields.join(";"))
}

fn pct_triple(t: Option<&PartitionTriple>) -> [Cell; 3] {
    [0, 1, 2].map(|k| Cell::opt(t.map(|t| t.shares[k] * 100.0), 1))
}

fn pct_array(t: Option<&[f64; 3]>) -> [Cell; 3] {
    [0, 1, 2].map(|k| Cell::opt(t.map(|t| t[k] * 100.0), 1))
}

fn partitions(b: &AnalysisBundle) -> Table {
    let mut t = Table::new(
        "partitions",
        "CSS thresholds and class memberships per field",
        &[
            "field_code", "n", "mu1", "mu2", "mu3", "up", "lp", "fp", "hp", "vhp", "up_share", "lp_share",
            "fp_share", "hp_share", "vhp_share", "degenerate_level",
        ],
    );
    for a in &b.analyses {
        let mut row = vec![
            Cell::text(&a.field_code),
            Cell::Int(a.n),
            Cell::num(a.scores.mu1, FINE_DP),
            Cell::num(a.scores.mu2, FINE_DP),
            Cell::num(a.scores.mu3, FINE_DP),
        ];
        row.extend(a.partition.counts.map(Cell::Int));
        row.extend(a.partition.shares().map(|s| Cell::num(s, FINE_DP)));
        row.push(Cell::text(a.scores.degenerate.as_str()));
        t.push(row);
    }
    t
}

fn field_summary(b: &AnalysisBundle) -> Table {
    let mut t = Table::new(
        "field_summary",
        "Per-field partitions of populations A and B (%) and GM index",
        &[
            "field_code", "discipline_code", "n", "mu1", "mu2", "mu3", "a_up_lp_pct", "a_fp_pct", "a_hp_vhp_pct",
            "n_b", "b_fp_pct", "b_hp_pct", "b_vhp_pct", "gm_a", "gm_b",
        ],
    );
    for a in &b.analyses {
        let mut row = vec![
            Cell::text(&a.field_code),
            Cell::text(&a.discipline_code),
            Cell::Int(a.n),
            Cell::num(a.scores.mu1, SCORE_DP),
            Cell::num(a.scores.mu2, SCORE_DP),
            Cell::num(a.scores.mu3, SCORE_DP),
        ];
        row.extend(pct_triple(Some(&a.triple_a)));
        row.push(Cell::Int(a.n_b));
        row.extend(pct_triple(a.triple_b.as_ref()));
        row.push(Cell::num(a.gm_a.gm, GM_DP));
        row.push(Cell::opt(a.gm_b.map(|g| g.gm), GM_DP));
        t.push(row);
    }
    t
}

fn discipline_summary(b: &AnalysisBundle) -> Table {
    let mut t = Table::new(
        "discipline_summary",
        "Pooled class memberships per discipline (%)",
        &[
            "discipline_code", "n_fields", "n", "up_pct", "lp_pct", "fp_pct", "hp_pct", "vhp_pct", "a_up_lp_pct",
            "a_fp_pct", "a_hp_vhp_pct", "n_b", "b_fp_pct", "b_hp_pct", "b_vhp_pct", "b_field_mean_fp_pct",
            "b_field_mean_hp_pct", "b_field_mean_vhp_pct",
        ],
    );
    for d in b.summary.disciplines.iter().chain([&b.summary.total]) {
        let mut row = vec![Cell::text(&d.discipline_code), Cell::Int(d.fields.len()), Cell::Int(d.n)];
        row.extend(d.counts.map(|c| Cell::pct(c as f64 / d.n as f64)));
        row.extend(pct_triple(Some(&d.triple_a)));
        row.push(Cell::Int(d.n_b));
        row.extend(pct_triple(d.triple_b.as_ref()));
        row.extend(pct_array(d.field_mean_triple_b.as_ref()));
        t.push(row);
    }
    t
}

fn discipline_means(b: &AnalysisBundle) -> Table {
    let mut t = Table::new(
        "discipline_means",
        "Unweighted means of discipline shares (%)",
        &["population", "basis", "class_1_pct", "class_2_pct", "class_3_pct"],
    );
    let s = &b.summary;
    let rows: [(&str, &str, Option<&[f64; 3]>); 3] = [
        ("A", "pooled", Some(&s.mean_discipline_triple_a)),
        ("B", "pooled", s.mean_discipline_triple_b.as_ref()),
        ("B", "field_mean", s.mean_discipline_field_mean_triple_b.as_ref()),
    ];
    for (pop, basis, triple) in rows {
        let mut row = vec![Cell::text(pop), Cell::text(basis)];
        row.extend(pct_array(triple));
        t.push(row);
    }
    t
}

fn extreme_cells(m: Option<&MinMax>, scale: f64, dp: usize) -> [Cell; 4] {
    match m {
        Some(m) => [
            Cell::num(m.min.value * scale, dp),
            joined(&m.min.fields),
            Cell::num(m.max.value * scale, dp),
            joined(&m.max.fields),
        ],
        None => [Cell::opt(None, dp), Cell::text(""), Cell::opt(None, dp), Cell::text("")],
    }
}

fn discipline_extremes(b: &AnalysisBundle) -> Table {
    let mut t = Table::new(
        "discipline_extremes",
        "Range and variation of CSS thresholds across fields",
        &["discipline_code", "statistic", "min", "min_fields", "max", "max_fields", "cv"],
    );
    for d in &b.summary.disciplines {
        for (k, name) in ["mu1", "mu2", "mu3"].iter().enumerate() {
            let mut row = vec![Cell::text(&d.discipline_code), Cell::text(*name)];
            row.extend(extreme_cells(Some(&d.mu_extremes[k]), 1.0, SCORE_DP));
            row.push(Cell::opt(d.mu_cv[k], SCORE_DP));
            t.push(row);
        }
    }
    t
}

fn discipline_share_extremes(b: &AnalysisBundle) -> Table {
    let mut t = Table::new(
        "discipline_share_extremes",
        "Range and variation of class shares across fields (%)",
        &["discipline_code", "class", "min_pct", "min_fields", "max_pct", "max_fields", "cv"],
    );
    for d in &b.summary.disciplines {
        for c in Category::ALL {
            let mut row = vec![Cell::text(&d.discipline_code), Cell::text(c.label())];
            row.extend(extreme_cells(Some(&d.share_extremes[c.index()]), 100.0, 1));
            row.push(Cell::opt(d.share_cv[c.index()], SCORE_DP));
            t.push(row);
        }
    }
    t
}

fn discipline_gm(b: &AnalysisBundle) -> Table {
    let mut t = Table::new(
        "discipline_gm",
        "Range and variation of the GM index across fields",
        &["discipline_code", "population", "min", "min_fields", "max", "max_fields", "cv"],
    );
    for d in &b.summary.disciplines {
        let mut a = vec![Cell::text(&d.discipline_code), Cell::text("A")];
        a.extend(extreme_cells(Some(&d.gm_a_extremes), 1.0, GM_DP));
        a.push(Cell::opt(d.gm_a_cv, GM_DP));
        t.push(a);
        let mut bb = vec![Cell::text(&d.discipline_code), Cell::text("B")];
        bb.extend(extreme_cells(d.gm_b_extremes.as_ref(), 1.0, GM_DP));
        bb.push(Cell::opt(d.gm_b_cv, GM_DP));
        t.push(bb);
    }
    t
}

fn flag_of(c: Option<&Classification>, field: &str) -> &'static str {
    c.and_then(|c| c.flags.get(field))
        .copied()
        .unwrap_or(Fractality::NotAssessable)
        .as_str()
}

fn decay_rows(b: &AnalysisBundle, name: &str, title: &str, last: &str, dp: usize) -> Table {
    let mut t = Table::new(
        name,
        title,
        &["field_code", "dr1_a", "dr2_a", "dr1_b", "dr2_b", "ddr1", "ddr2", last],
    );
    for a in &b.analyses {
        let f = &a.fractal;
        let mut row = vec![Cell::text(&a.field_code)];
        row.extend([f.dr1_a, f.dr2_a, f.dr1_b, f.dr2_b, f.ddr1, f.ddr2].map(|v| Cell::opt(v, dp)));
        row.push(Cell::text(flag_of(b.classification.as_ref(), &a.field_code)));
        t.push(row);
    }
    t
}

fn fractal_summary(b: &AnalysisBundle) -> Table {
    let mut t = Table::new(
        "fractal_summary",
        "Median split of the DDR plane",
        &[
            "scope", "size_threshold", "n_fields", "n_assessable", "median_ddr1", "median_ddr2", "n_candidates",
            "candidate_pct",
        ],
    );
    let scopes = [
        ("all_fields", b.classification.as_ref()),
        ("size_restricted", b.size_restricted.as_ref()),
    ];
    for (scope, c) in scopes {
        let row = match c {
            Some(c) => vec![
                Cell::text(scope),
                Cell::opt(c.size_threshold, 1),
                Cell::Int(c.flags.len()),
                Cell::Int(c.n_assessable),
                Cell::num(c.median_ddr1, 3),
                Cell::num(c.median_ddr2, 3),
                Cell::Int(c.n_candidates),
                Cell::pct(c.candidate_share()),
            ],
            None => vec![
                Cell::text(scope),
                Cell::opt(None, 1),
                Cell::Int(0),
                Cell::Int(0),
                Cell::opt(None, 3),
                Cell::opt(None, 3),
                Cell::Int(0),
                Cell::opt(None, 1),
            ],
        };
        t.push(row);
    }
    t
}

fn share_variation(b: &AnalysisBundle) -> Table {
    let mut t = Table::new(
        "share_variation",
        "Between-field variation of partition shares",
        &["population", "class", "mean_pct", "sd_pct", "cv"],
    );
    let a_labels = ["UP+LP", "FP", "HP+VHP"];
    let b_labels = ["FP", "HP", "VHP"];
    let mut add = |pop: &str, labels: [&str; 3], spreads: Option<&[Spread; 3]>| {
        for k in 0..3 {
            let s = spreads.map(|s| s[k]);
            t.push(vec![
                Cell::text(pop),
                Cell::text(labels[k]),
                Cell::opt(s.map(|s| s.mean * 100.0), 1),
                Cell::opt(s.and_then(|s| s.std_dev).map(|v| v * 100.0), 1),
                Cell::opt(s.and_then(|s| s.cv), SCORE_DP),
            ]);
        }
    };
    add("A", a_labels, Some(&b.summary.field_spread_a));
    add("B", b_labels, b.summary.field_spread_b.as_ref());
    t
}

fn gm_summary(b: &AnalysisBundle) -> Table {
    let mut t = Table::new(
        "gm_summary",
        "Distribution of the GM index across fields",
        &[
            "population", "n_fields", "mean", "median", "q1", "q3", "iqr", "lower_fence", "upper_fence",
            "whisker_low", "whisker_high", "shapiro_w", "shapiro_p", "outlier_fields",
        ],
    );
    for d in [b.gm.a.as_ref(), b.gm.b.as_ref()].into_iter().flatten() {
        let bp = &d.boxplot;
        let outliers: Vec<String> = d
            .outlier_fields
            .iter()
            .map(|(f, g)| format!("{f}={}", Cell::num(*g, GM_DP).render()))
            .collect();
        t.push(vec![
            Cell::text(d.population),
            Cell::Int(d.n_fields),
            Cell::num(d.mean, 3),
            Cell::num(d.median, 3),
            Cell::num(bp.q1, 3),
            Cell::num(bp.q3, 3),
            Cell::num(bp.iqr, 3),
            Cell::num(bp.lower_fence, 3),
            Cell::num(bp.upper_fence, 3),
            Cell::num(bp.whisker_low, 3),
            Cell::num(bp.whisker_high, 3),
            Cell::opt(d.shapiro_wilk.map(|s| s.w_statistic), 3),
            Cell::opt(d.shapiro_wilk.map(|s| s.p_value), 3),
            Cell::text(outliers.join(";")),
        ]);
    }
    t
}

fn gm_correlation(b: &AnalysisBundle) -> Table {
    let mut t = Table::new(
        "gm_correlation",
        "Pearson correlation between B subpopulation size and GM(B)",
        &["x", "y", "n_fields", "pearson_r"],
    );
    t.push(vec![
        Cell::text("n_b"),
        Cell::text("gm_b"),
        Cell::Int(b.analyses.iter().filter(|a| a.gm_b.is_some()).count()),
        Cell::opt(b.gm.size_gm_b_pearson, 3),
    ]);
    t
}

fn discipline_recomputed(b: &AnalysisBundle) -> Option<Table> {
    let rec = b.recomputed_disciplines.as_ref()?;
    let mut t = Table::new(
        "discipline_recomputed",
        "CSS recomputed on pooled discipline scores",
        &[
            "discipline_code", "n", "mu1", "mu2", "mu3", "a_up_lp_pct", "a_fp_pct", "a_hp_vhp_pct", "n_b", "b_fp_pct",
            "b_hp_pct", "b_vhp_pct", "gm_a", "gm_b",
        ],
    );
    for a in rec {
        let mut row = vec![
            Cell::text(&a.discipline_code),
            Cell::Int(a.n),
            Cell::num(a.scores.mu1, SCORE_DP),
            Cell::num(a.scores.mu2, SCORE_DP),
            Cell::num(a.scores.mu3, SCORE_DP),
        ];
        row.extend(pct_triple(Some(&a.triple_a)));
        row.push(Cell::Int(a.n_b));
        row.extend(pct_triple(a.triple_b.as_ref()));
        row.push(Cell::num(a.gm_a.gm, GM_DP));
        row.push(Cell::opt(a.gm_b.map(|g| g.gm), GM_DP));
        t.push(row);
    }
    Some(t)
}

/// Every report table, in output order.
pub fn build_tables(bundle: &AnalysisBundle) -> Vec<Table> {
    let mut tables = vec![
        field_summary(bundle),
        partitions(bundle),
        discipline_summary(bundle),
        discipline_means(bundle),
        discipline_extremes(bundle),
        discipline_share_extremes(bundle),
        discipline_gm(bundle),
        decay_rows(bundle, "decay_table", "Decay ratios per field", "fractal", DR_DP),
        decay_rows(
            bundle,
            "fractal",
            "Decay ratios and fractal classification per field",
            "fractal_candidate",
            FINE_DP,
        ),
        fractal_summary(bundle),
        share_variation(bundle),
        gm_summary(bundle),
        gm_correlation(bundle),
    ];
    tables.extend(discipline_recomputed(bundle));
    tables
}

/// Writes each table to `dir/<name>.<ext>` and returns the paths written.
pub fn render_tables(bundle: &AnalysisBundle, format: Format, dir: &Path) -> Result<Vec<PathBuf>, ReportError> {
    std::fs::create_dir_all(dir).map_err(|source| ReportError::Write {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();
    for t in build_tables(bundle) {
        let path = dir.join(format!("{}.{}", t.name, format.extension()));
        std::fs::write(&path, t.render(format)).map_err(|source| ReportError::Write {
            path: path.clone(),
            source,
        })?;
        written.push(path);
    }
    Ok(written)
}
