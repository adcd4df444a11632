//! Field analyses, discipline pooling, rendering and the end-to-end pipeline.

mod pipeline;
mod plots;
mod svg;
mod table;
mod tables;

pub use pipeline::{
    analyze_scores, load_inputs, read_scores, run_analysis, run_baseline, run_report, score_corpus, write_outputs,
    write_scores, AnalysisBundle, InputDigest, InputFiles, LoadedCorpus, RunCounts, RunManifest, RunSummary,
};
pub use plots::{render_plots, PlotData};
pub use table::{Cell, Format, Table};
pub use tables::{build_tables, render_tables};

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::cssdist::{
    characteristic_scores, partition, subpopulation_b, Category, CharacteristicScores, CssPartition,
    PartitionTriple,
};
use crate::fractal::{decay_ratios, FractalAssessment};
use crate::skewstats::{
    boxplot_summary, coefficient_of_variation, gm_index, histogram, mean, pearson, quantile, shapiro_wilk, std_dev,
    BoxplotSummary, HistogramSummary, ShapiroWilk, SkewnessResult, StatsError,
};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot write `{path}`: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("cannot read `{path}`: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("malformed scores file: {0}")]
    Scores(String),
    #[error("no field to analyze")]
    NoFields,
    #[error("field `{0}` appears under more than one discipline")]
    InconsistentDiscipline(String),
}

/// Everything computed for one field's score distribution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldAnalysis {
    pub field_code: String,
    pub discipline_code: String,
    pub n: usize,
    pub scores: CharacteristicScores,
    pub partition: CssPartition,
    pub triple_a: PartitionTriple,
    pub triple_b: Option<PartitionTriple>,
    pub n_b: usize,
    pub gm_a: SkewnessResult,
    pub gm_b: Option<SkewnessResult>,
    pub fractal: FractalAssessment,
    /// SHA-256 over the sorted score bit patterns the analysis was built from.
    pub score_digest: String,
}

fn digest_scores(scores: &[f64]) -> String {
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut h = Sha256::new();
    for s in sorted {
        h.update(s.to_bits().to_le_bytes());
    }
    hex::encode(h.finalize())
}

/// Scores are sorted first, so the result does not depend on their order.
pub fn analyze_field(field_code: &str, discipline_code: &str, scores: &[f64]) -> Result<FieldAnalysis, crate::Error> {
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    let scores = sorted.as_slice();
    let cs = characteristic_scores(scores)?;
    let part = partition(scores, &cs);
    let b = subpopulation_b(scores, &cs);
    let triple_a = part.triple_a();
    let triple_b = b.triple().copied();
    let gm_a = gm_index(scores)?;
    let gm_b = if b.is_empty() { None } else { Some(gm_index(b.scores())?) };
    Ok(FieldAnalysis {
        field_code: field_code.to_string(),
        discipline_code: discipline_code.to_string(),
        n: scores.len(),
        scores: cs,
        partition: part,
        triple_a,
        triple_b,
        n_b: b.len(),
        gm_a,
        gm_b,
        fractal: decay_ratios(&triple_a, triple_b.as_ref()),
        score_digest: digest_scores(scores),
    })
}

impl FieldAnalysis {
    /// Recomputes the analysis from `scores` and checks it matches.
    pub fn verify(&self, scores: &[f64]) -> bool {
        analyze_field(&self.field_code, &self.discipline_code, scores).is_ok_and(|again| again == *self)
    }
}

/// Min or max of a per-field statistic, with every field attaining it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extreme {
    pub value: f64,
    pub fields: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinMax {
    pub min: Extreme,
    pub max: Extreme,
}

fn min_max<'a>(items: impl IntoIterator<Item = (&'a str, f64)>) -> Option<MinMax> {
    let items: Vec<(&str, f64)> = items.into_iter().collect();
    let lo = items.iter().map(|i| i.1).reduce(f64::min)?;
    let hi = items.iter().map(|i| i.1).reduce(f64::max)?;
    let pick = |v: f64| Extreme {
        value: v,
        fields: items.iter().filter(|i| i.1 == v).map(|i| i.0.to_string()).collect(),
    };
    Some(MinMax { min: pick(lo), max: pick(hi) })
}

fn cv(values: &[f64]) -> Option<f64> {
    coefficient_of_variation(values).ok()
}

/// Pooled category memberships and between-field spread for one discipline.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisciplineSummary {
    pub discipline_code: String,
    pub fields: Vec<String>,
    pub n: usize,
    /// Summed member-field counts per category.
    pub counts: [usize; 5],
    pub n_b: usize,
    pub triple_a: PartitionTriple,
    pub triple_b: Option<PartitionTriple>,
    /// Unweighted mean over member fields of their B shares.
    pub field_mean_triple_b: Option<[f64; 3]>,
    pub mu_extremes: [MinMax; 3],
    pub share_extremes: [MinMax; 5],
    pub gm_a_extremes: MinMax,
    pub gm_b_extremes: Option<MinMax>,
    pub mu_cv: [Option<f64>; 3],
    pub share_cv: [Option<f64>; 5],
    pub gm_a_cv: Option<f64>,
    pub gm_b_cv: Option<f64>,
}

/// Pools member-field category counts; CSS is not recomputed on pooled scores.
pub fn aggregate_discipline(discipline_code: &str, fields: &[&FieldAnalysis]) -> Result<DisciplineSummary, ReportError> {
    if fields.is_empty() {
        return Err(ReportError::NoFields);
    }
    let mut counts = [0usize; 5];
    for f in fields {
        for (c, v) in counts.iter_mut().zip(f.partition.counts) {
            *c += v;
        }
    }
    let n: usize = counts.iter().sum();
    let n_b = counts[Category::Fp.index()] + counts[Category::Hp.index()] + counts[Category::Vhp.index()];
    let triple_a = PartitionTriple::from_counts([counts[0] + counts[1], counts[2], counts[3] + counts[4]], n);
    let triple_b = (n_b > 0).then(|| PartitionTriple::from_counts([counts[2], counts[3], counts[4]], n_b));
    let with_b: Vec<&PartitionTriple> = fields.iter().filter_map(|f| f.triple_b.as_ref()).collect();
    let field_mean_triple_b = (!with_b.is_empty())
        .then(|| [0, 1, 2].map(|k| with_b.iter().map(|t| t.shares[k]).sum::<f64>() / with_b.len() as f64));

    let named = |g: &dyn Fn(&FieldAnalysis) -> f64| -> Vec<(&str, f64)> {
        fields.iter().map(|f| (f.field_code.as_str(), g(f))).collect()
    };
    let mus: [Vec<(&str, f64)>; 3] = [
        named(&|f| f.scores.mu1),
        named(&|f| f.scores.mu2),
        named(&|f| f.scores.mu3),
    ];
    let shares: [Vec<(&str, f64)>; 5] = Category::ALL.map(|c| named(&|f| f.partition.share(c)));
    let gm_a = named(&|f| f.gm_a.gm);
    let gm_b: Vec<(&str, f64)> = fields
        .iter()
        .filter_map(|f| f.gm_b.map(|g| (f.field_code.as_str(), g.gm)))
        .collect();
    let values = |v: &[(&str, f64)]| v.iter().map(|x| x.1).collect::<Vec<_>>();

    Ok(DisciplineSummary {
        discipline_code: discipline_code.to_string(),
        fields: fields.iter().map(|f| f.field_code.clone()).collect(),
        n,
        counts,
        n_b,
        triple_a,
        triple_b,
        field_mean_triple_b,
        mu_extremes: mus.clone().map(|m| min_max(m).expect("non-empty")),
        share_extremes: shares.clone().map(|s| min_max(s).expect("non-empty")),
        gm_a_extremes: min_max(gm_a.clone()).expect("non-empty"),
        gm_b_extremes: min_max(gm_b.clone()),
        mu_cv: mus.map(|m| cv(&values(&m))),
        share_cv: shares.map(|s| cv(&values(&s))),
        gm_a_cv: cv(&values(&gm_a)),
        gm_b_cv: cv(&values(&gm_b)),
    })
}

/// Mean, standard deviation and CV of one share across fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Spread {
    pub mean: f64,
    pub std_dev: Option<f64>,
    pub cv: Option<f64>,
}

fn spread(values: &[f64]) -> Spread {
    Spread {
        mean: mean(values),
        std_dev: std_dev(values).ok(),
        cv: cv(values),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrandSummary {
    pub disciplines: Vec<DisciplineSummary>,
    /// All fields pooled together.
    pub total: DisciplineSummary,
    /// Unweighted means of discipline-level pooled shares.
    pub mean_discipline_triple_a: [f64; 3],
    pub mean_discipline_triple_b: Option<[f64; 3]>,
    /// Unweighted means of discipline-level per-field-averaged B shares.
    pub mean_discipline_field_mean_triple_b: Option<[f64; 3]>,
    /// Between-field spread of each A and B triple share.
    pub field_spread_a: [Spread; 3],
    pub field_spread_b: Option<[Spread; 3]>,
}

fn mean_triples<'a>(triples: impl Iterator<Item = &'a [f64; 3]>) -> Option<[f64; 3]> {
    let all: Vec<&[f64; 3]> = triples.collect();
    (!all.is_empty()).then(|| [0, 1, 2].map(|k| all.iter().map(|t| t[k]).sum::<f64>() / all.len() as f64))
}

pub fn grand_summary(analyses: &[FieldAnalysis]) -> Result<GrandSummary, ReportError> {
    if analyses.is_empty() {
        return Err(ReportError::NoFields);
    }
    let mut by_disc: BTreeMap<&str, Vec<&FieldAnalysis>> = BTreeMap::new();
    for a in analyses {
        by_disc.entry(a.discipline_code.as_str()).or_default().push(a);
    }
    let disciplines = by_disc
        .iter()
        .map(|(d, fs)| aggregate_discipline(d, fs))
        .collect::<Result<Vec<_>, _>>()?;
    let all: Vec<&FieldAnalysis> = analyses.iter().collect();
    let total = aggregate_discipline("Total", &all)?;

    let mean_discipline_triple_a = mean_triples(disciplines.iter().map(|d| &d.triple_a.shares)).expect("non-empty");
    let mean_discipline_triple_b = mean_triples(disciplines.iter().filter_map(|d| d.triple_b.as_ref().map(|t| &t.shares)));
    let mean_discipline_field_mean_triple_b =
        mean_triples(disciplines.iter().filter_map(|d| d.field_mean_triple_b.as_ref()));

    let field_spread_a = [0, 1, 2].map(|k| spread(&analyses.iter().map(|a| a.triple_a.shares[k]).collect::<Vec<_>>()));
    let with_b: Vec<&PartitionTriple> = analyses.iter().filter_map(|a| a.triple_b.as_ref()).collect();
    let field_spread_b =
        (!with_b.is_empty()).then(|| [0, 1, 2].map(|k| spread(&with_b.iter().map(|t| t.shares[k]).collect::<Vec<_>>())));

    Ok(GrandSummary {
        disciplines,
        total,
        mean_discipline_triple_a,
        mean_discipline_triple_b,
        mean_discipline_field_mean_triple_b,
        field_spread_a,
        field_spread_b,
    })
}

/// Distribution of the per-field GM index for one population.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GmDistribution {
    pub population: &'static str,
    pub n_fields: usize,
    pub mean: f64,
    pub median: f64,
    pub boxplot: BoxplotSummary,
    pub histogram: HistogramSummary,
    pub shapiro_wilk: Option<ShapiroWilk>,
    /// Fields whose GM lies beyond a boxplot fence, with their values.
    pub outlier_fields: Vec<(String, f64)>,
}

fn gm_distribution(
    population: &'static str,
    values: &[(String, f64)],
    bin_width: f64,
) -> Result<Option<GmDistribution>, StatsError> {
    if values.is_empty() {
        return Ok(None);
    }
    let v: Vec<f64> = values.iter().map(|x| x.1).collect();
    let boxplot = boxplot_summary(&v)?;
    let outlier_fields = values
        .iter()
        .filter(|(_, g)| boxplot.is_outlier(*g))
        .cloned()
        .collect();
    Ok(Some(GmDistribution {
        population,
        n_fields: v.len(),
        mean: mean(&v),
        median: quantile(&v, 0.5)?,
        histogram: histogram(&v, bin_width)?,
        shapiro_wilk: shapiro_wilk(&v).ok(),
        boxplot,
        outlier_fields,
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GmSummary {
    pub a: Option<GmDistribution>,
    pub b: Option<GmDistribution>,
    /// Correlation between B subpopulation size and GM(B) across fields.
    pub size_gm_b_pearson: Option<f64>,
}

pub fn gm_summary(analyses: &[FieldAnalysis], bin_width: f64) -> Result<GmSummary, StatsError> {
    let a: Vec<(String, f64)> = analyses.iter().map(|f| (f.field_code.clone(), f.gm_a.gm)).collect();
    let b: Vec<(String, f64)> = analyses
        .iter()
        .filter_map(|f| f.gm_b.map(|g| (f.field_code.clone(), g.gm)))
        .collect();
    let sizes: Vec<f64> = analyses.iter().filter(|f| f.gm_b.is_some()).map(|f| f.n_b as f64).collect();
    let gms: Vec<f64> = b.iter().map(|x| x.1).collect();
    Ok(GmSummary {
        a: gm_distribution("A", &a, bin_width)?,
        b: gm_distribution("B", &b, bin_width)?,
        size_gm_b_pearson: pearson(&sizes, &gms).ok(),
    })
}
