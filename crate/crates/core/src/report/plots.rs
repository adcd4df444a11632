//! Figure data (CSV) and SVG renderings.

use std::path::{Path, PathBuf};

use super::svg::{Scale, Svg};
use super::{AnalysisBundle, FieldAnalysis, GmDistribution, ReportError};
use crate::cssdist::PartitionTriple;
use crate::fractal::Fractality;
use crate::skewstats::HistogramSummary;

const COLORS: [&str; 3] = ["#c6dbef", "#6baed6", "#08519c"];

/// Numbers behind the figures.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotData {
    pub gm_histograms: Vec<(&'static str, HistogramSummary)>,
    pub ddr_points: Vec<(String, f64, f64, Fractality)>,
    pub ddr_medians: Option<(f64, f64)>,
    /// Mean share across fields of the first and last class, per population.
    pub partition_a_guides: [f64; 2],
    pub partition_b_guides: Option<[f64; 2]>,
}

struct Writer {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Writer {
    fn put(&mut self, name: &str, content: String) -> Result<(), ReportError> {
        let path = self.dir.join(name);
        std::fs::write(&path, content).map_err(|source| ReportError::Write {
            path: path.clone(),
            source,
        })?;
        self.written.push(path);
        Ok(())
    }
}

fn csv_string(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

fn f(v: f64) -> String {
    format!("{v:.6}")
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), f)
}

fn gm_panel(svg: &mut Svg, d: &GmDistribution, top: f64) {
    let (left, width, hist_h) = (50.0, 500.0, 150.0);
    let x = Scale::new(-1.0, 1.0, left, left + width);
    let h = &d.histogram;
    let max_count = h.counts.iter().copied().max().unwrap_or(1).max(1) as f64;
    let y = Scale::new(0.0, max_count, top + hist_h, top);
    svg.text(left, top - 8.0, &format!("GM index, population {} ({} fields)", d.population, d.n_fields), "start", 12.0);
    for (i, &c) in h.counts.iter().enumerate() {
        let (lo, hi) = h.edges(i);
        svg.rect(x.at(lo), y.at(c as f64), x.at(hi) - x.at(lo), y.at(0.0) - y.at(c as f64), COLORS[1]);
    }
    svg.line(left, top + hist_h, left + width, top + hist_h, "#333", false);
    for t in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        svg.text(x.at(t), top + hist_h + 12.0, &format!("{t}"), "middle", 9.0);
    }
    svg.text(left - 6.0, top + 4.0, &format!("{max_count}"), "end", 9.0);

    let b = &d.boxplot;
    let (by, bh) = (top + hist_h + 22.0, 16.0);
    svg.line(x.at(b.whisker_low), by + bh / 2.0, x.at(b.q1), by + bh / 2.0, "#333", false);
    svg.line(x.at(b.q3), by + bh / 2.0, x.at(b.whisker_high), by + bh / 2.0, "#333", false);
    svg.rect(x.at(b.q1), by, x.at(b.q3) - x.at(b.q1), bh, COLORS[0]);
    svg.line(x.at(b.q2), by, x.at(b.q2), by + bh, "#000", false);
    for &o in &b.outliers {
        svg.circle(x.at(o), by + bh / 2.0, 3.0, "#d62728");
    }
    for (field, g) in &d.outlier_fields {
        svg.text(x.at(*g), by - 3.0, field, "middle", 8.0);
    }
}

fn ddr_svg(points: &[(String, f64, f64, Fractality)], medians: Option<(f64, f64)>) -> String {
    let (left, top, size) = (60.0, 30.0, 400.0);
    let mut svg = Svg::new(left + size + 30.0, top + size + 50.0);
    let max1 = points.iter().map(|p| p.1).fold(0.0, f64::max);
    let max2 = points.iter().map(|p| p.2).fold(0.0, f64::max);
    let x = Scale::new(0.0, max1 * 1.05, left, left + size);
    let y = Scale::new(0.0, max2 * 1.05, top + size, top);
    svg.text(left, top - 10.0, "DDR1 vs DDR2 per field", "start", 12.0);
    svg.line(left, top + size, left + size, top + size, "#333", false);
    svg.line(left, top, left, top + size, "#333", false);
    svg.text(left + size / 2.0, top + size + 30.0, "DDR1", "middle", 11.0);
    svg.text(left - 40.0, top + size / 2.0, "DDR2", "middle", 11.0);
    if let Some((m1, m2)) = medians {
        svg.line(x.at(m1), top, x.at(m1), top + size, "#888", true);
        svg.line(left, y.at(m2), left + size, y.at(m2), "#888", true);
    }
    for (field, d1, d2, flag) in points {
        let fill = if *flag == Fractality::Candidate { "#2ca02c" } else { "#1f77b4" };
        svg.circle(x.at(*d1), y.at(*d2), 3.5, fill);
        svg.text(x.at(*d1) + 5.0, y.at(*d2) - 4.0, field, "start", 8.0);
    }
    svg.finish()
}

fn bars_svg(title: &str, labels: &[String], triples: &[[f64; 3]], legend: [&str; 3], guides: Option<[f64; 2]>) -> String {
    let (left, top, width, bar_h) = (90.0, 40.0, 500.0, 14.0);
    let height = top + labels.len() as f64 * (bar_h + 4.0) + 40.0;
    let mut svg = Svg::new(left + width + 30.0, height);
    let x = Scale::new(0.0, 1.0, left, left + width);
    svg.text(left, 16.0, title, "start", 12.0);
    for (k, name) in legend.iter().enumerate() {
        svg.rect(left + k as f64 * 120.0, 22.0, 10.0, 10.0, COLORS[k]);
        svg.text(left + k as f64 * 120.0 + 14.0, 31.0, name, "start", 9.0);
    }
    for (i, (label, t)) in labels.iter().zip(triples).enumerate() {
        let yy = top + i as f64 * (bar_h + 4.0);
        svg.text(left - 6.0, yy + bar_h - 3.0, label, "end", 9.0);
        let mut acc = 0.0;
        for k in 0..3 {
            svg.rect(x.at(acc), yy, x.at(acc + t[k]) - x.at(acc), bar_h, COLORS[k]);
            acc += t[k];
        }
    }
    let bottom = top + labels.len() as f64 * (bar_h + 4.0);
    if let Some([first, last]) = guides {
        svg.line(x.at(first), top - 4.0, x.at(first), bottom, "#d62728", true);
        svg.line(x.at(1.0 - last), top - 4.0, x.at(1.0 - last), bottom, "#d62728", true);
    }
    for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
        svg.text(x.at(t), bottom + 14.0, &format!("{}%", t * 100.0), "middle", 9.0);
    }
    svg.finish()
}

fn triple_rows(items: Vec<(String, Option<&PartitionTriple>)>) -> (Vec<String>, Vec<[f64; 3]>) {
    items
        .into_iter()
        .filter_map(|(l, t)| t.map(|t| (l, t.shares)))
        .unzip()
}

fn guides(triples: &[[f64; 3]]) -> Option<[f64; 2]> {
    if triples.is_empty() {
        return None;
    }
    let n = triples.len() as f64;
    Some([
        triples.iter().map(|t| t[0]).sum::<f64>() / n,
        triples.iter().map(|t| t[2]).sum::<f64>() / n,
    ])
}

fn field_triples(analyses: &[FieldAnalysis], b: bool) -> (Vec<String>, Vec<[f64; 3]>) {
    triple_rows(
        analyses
            .iter()
            .map(|a| (a.field_code.clone(), if b { a.triple_b.as_ref() } else { Some(&a.triple_a) }))
            .collect(),
    )
}

fn triples_csv(labels: &[String], triples: &[[f64; 3]], key: &str, names: [&str; 3]) -> String {
    csv_string(
        &[key, names[0], names[1], names[2]],
        labels
            .iter()
            .zip(triples)
            .map(|(l, t)| vec![l.clone(), f(t[0]), f(t[1]), f(t[2])])
            .collect(),
    )
}

/// Writes figure data and SVGs into `dir`.
pub fn render_plots(bundle: &AnalysisBundle, dir: &Path) -> Result<(PlotData, Vec<PathBuf>), ReportError> {
    std::fs::create_dir_all(dir).map_err(|source| ReportError::Write {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut w = Writer {
        dir: dir.to_path_buf(),
        written: Vec::new(),
    };

    // GM distributions
    let dists: Vec<&GmDistribution> = [bundle.gm.a.as_ref(), bundle.gm.b.as_ref()].into_iter().flatten().collect();
    let mut hist_rows = Vec::new();
    let mut box_rows = Vec::new();
    for d in &dists {
        for (i, c) in d.histogram.counts.iter().enumerate() {
            let (lo, hi) = d.histogram.edges(i);
            hist_rows.push(vec![d.population.to_string(), f(lo), f(hi), c.to_string()]);
        }
        let b = &d.boxplot;
        let outliers: Vec<String> = d.outlier_fields.iter().map(|(f, _)| f.clone()).collect();
        box_rows.push(vec![
            d.population.to_string(),
            f(b.q1),
            f(b.q2),
            f(b.q3),
            f(b.iqr),
            f(b.lower_fence),
            f(b.upper_fence),
            f(b.whisker_low),
            f(b.whisker_high),
            outliers.join(";"),
        ]);
    }
    w.put("gm_histogram.csv", csv_string(&["population", "bin_start", "bin_end", "count"], hist_rows))?;
    w.put(
        "gm_boxplot.csv",
        csv_string(
            &[
                "population", "q1", "median", "q3", "iqr", "lower_fence", "upper_fence", "whisker_low", "whisker_high",
                "outlier_fields",
            ],
            box_rows,
        ),
    )?;
    let mut svg = Svg::new(600.0, 30.0 + 230.0 * dists.len().max(1) as f64);
    for (i, d) in dists.iter().enumerate() {
        gm_panel(&mut svg, d, 30.0 + 230.0 * i as f64);
    }
    w.put("gm_distribution.svg", svg.finish())?;

    // DDR scatter
    let flags = bundle.classification.as_ref().map(|c| &c.flags);
    let ddr_points: Vec<(String, f64, f64, Fractality)> = bundle
        .analyses
        .iter()
        .filter_map(|a| {
            let (d1, d2) = a.fractal.ddr_pair()?;
            let flag = flags
                .and_then(|f| f.get(&a.field_code))
                .copied()
                .unwrap_or(Fractality::NotAssessable);
            Some((a.field_code.clone(), d1, d2, flag))
        })
        .collect();
    let ddr_medians = bundle.classification.as_ref().map(|c| (c.median_ddr1, c.median_ddr2));
    w.put(
        "ddr_scatter.csv",
        csv_string(
            &["field_code", "ddr1", "ddr2", "fractal_candidate"],
            ddr_points
                .iter()
                .map(|(fc, a, b, fl)| vec![fc.clone(), f(*a), f(*b), fl.as_str().to_string()])
                .collect(),
        ),
    )?;
    w.put(
        "ddr_medians.csv",
        csv_string(
            &["median_ddr1", "median_ddr2"],
            vec![vec![opt(ddr_medians.map(|m| m.0)), opt(ddr_medians.map(|m| m.1))]],
        ),
    )?;
    w.put("ddr_scatter.svg", ddr_svg(&ddr_points, ddr_medians))?;

    // Partition bars per field
    let (la, ta) = field_triples(&bundle.analyses, false);
    let (lb, tb) = field_triples(&bundle.analyses, true);
    let partition_a_guides = guides(&ta).ok_or(ReportError::NoFields)?;
    let partition_b_guides = guides(&tb);
    w.put("partition_a.csv", triples_csv(&la, &ta, "field_code", ["up_lp", "fp", "hp_vhp"]))?;
    w.put("partition_b.csv", triples_csv(&lb, &tb, "field_code", ["fp", "hp", "vhp"]))?;
    w.put(
        "partition_guides.csv",
        csv_string(
            &["population", "mean_first_share", "mean_last_share"],
            [("A", Some(partition_a_guides)), ("B", partition_b_guides)]
                .into_iter()
                .map(|(p, g)| vec![p.to_string(), opt(g.map(|g| g[0])), opt(g.map(|g| g[1]))])
                .collect(),
        ),
    )?;
    w.put(
        "partition_a.svg",
        bars_svg("Population A partition per field", &la, &ta, ["UP+LP", "FP", "HP+VHP"], Some(partition_a_guides)),
    )?;
    w.put(
        "partition_b.svg",
        bars_svg("Population B partition per field", &lb, &tb, ["FP", "HP", "VHP"], partition_b_guides),
    )?;

    // Discipline bars, A and B pooled
    let mut items = Vec::new();
    for d in bundle.summary.disciplines.iter().chain([&bundle.summary.total]) {
        items.push((format!("{} A", d.discipline_code), Some(&d.triple_a)));
        items.push((format!("{} B", d.discipline_code), d.triple_b.as_ref()));
    }
    let (ld, td) = triple_rows(items);
    w.put(
        "discipline_partitions.csv",
        triples_csv(&ld, &td, "discipline_population", ["class_1", "class_2", "class_3"]),
    )?;
    w.put(
        "discipline_partitions.svg",
        bars_svg("Pooled partitions per discipline", &ld, &td, ["low", "middle", "top"], None),
    )?;

    let data = PlotData {
        gm_histograms: dists.iter().map(|d| (d.population, d.histogram.clone())).collect(),
        ddr_points,
        ddr_medians,
        partition_a_guides,
        partition_b_guides,
    };
    Ok((data, w.written))
}
