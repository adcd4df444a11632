//! Decay ratios between adjacent CSS classes and the median-split test for
//! self-similar ("fractal") field distributions.
//!
//! For population A the triple is `{UP+LP, FP, HP+VHP}`; for population B it
//! is `{FP, HP, VHP}`. Each population gives two decay ratios (later class
//! share over earlier class share); DDR1 and DDR2 are the absolute
//! differences between the A and B ratios. Small DDRs on both axes mean the
//! upper tail repeats the shape of the whole.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::cssdist::PartitionTriple;
use crate::skewstats::quantile_sorted;

#[derive(Debug, Error, PartialEq)]
pub enum FractalError {
    #[error("median split needs at least 2 assessable fields, found {0}")]
    TooFewAssessable(usize),
    #[error("size quantile must lie in (0, 1), got {0}")]
    BadQuantile(f64),
    #[error("no size given for field `{0}`")]
    MissingSize(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Fractality {
    Candidate,
    Rejected,
    NotAssessable,
}

impl Fractality {
    pub fn as_str(self) -> &'static str {
        match self {
            Fractality::Candidate => "true",
            Fractality::Rejected => "false",
            Fractality::NotAssessable => "not_assessable",
        }
    }
}

/// Decay ratios of one field; `None` marks a ratio with a zero denominator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FractalAssessment {
    pub dr1_a: Option<f64>,
    pub dr2_a: Option<f64>,
    pub dr1_b: Option<f64>,
    pub dr2_b: Option<f64>,
    pub ddr1: Option<f64>,
    pub ddr2: Option<f64>,
}

impl FractalAssessment {
    pub fn ddr_pair(&self) -> Option<(f64, f64)> {
        Some((self.ddr1?, self.ddr2?))
    }

    pub fn is_assessable(&self) -> bool {
        self.ddr_pair().is_some()
    }
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den > 0.0).then(|| num / den)
}

fn decay_pair(t: &PartitionTriple) -> (Option<f64>, Option<f64>) {
    let [s0, s1, s2] = t.shares;
    (ratio(s1, s0), ratio(s2, s1))
}

/// Decay ratios and their A/B differences. `triple_b` is `None` when the
/// field has no population above `mu1`.
pub fn decay_ratios(triple_a: &PartitionTriple, triple_b: Option<&PartitionTriple>) -> FractalAssessment {
    let (dr1_a, dr2_a) = decay_pair(triple_a);
    let (dr1_b, dr2_b) = triple_b.map_or((None, None), decay_pair);
    let diff = |a: Option<f64>, b: Option<f64>| Some((a? - b?).abs());
    FractalAssessment {
        dr1_a,
        dr2_a,
        dr1_b,
        dr2_b,
        ddr1: diff(dr1_a, dr1_b),
        ddr2: diff(dr2_a, dr2_b),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub median_ddr1: f64,
    pub median_ddr2: f64,
    pub flags: BTreeMap<String, Fractality>,
    pub n_assessable: usize,
    pub n_candidates: usize,
    /// Size threshold applied, when the classification is size-restricted.
    pub size_threshold: Option<f64>,
}

impl Classification {
    /// Candidates over assessable fields.
    pub fn candidate_share(&self) -> f64 {
        self.n_candidates as f64 / self.n_assessable as f64
    }
}

/// Splits the DDR1/DDR2 plane at the medians of the assessable fields; a field
/// is a candidate when both DDRs are at or below their medians.
pub fn classify_fields(assessments: &BTreeMap<String, FractalAssessment>) -> Result<Classification, FractalError> {
    let pairs: Vec<(f64, f64)> = assessments.values().filter_map(FractalAssessment::ddr_pair).collect();
    if pairs.len() < 2 {
        return Err(FractalError::TooFewAssessable(pairs.len()));
    }
    let mut d1: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let mut d2: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    d1.sort_by(f64::total_cmp);
    d2.sort_by(f64::total_cmp);
    let median_ddr1 = quantile_sorted(&d1, 0.5);
    let median_ddr2 = quantile_sorted(&d2, 0.5);

    let flags: BTreeMap<String, Fractality> = assessments
        .iter()
        .map(|(field, a)| {
            let flag = match a.ddr_pair() {
                None => Fractality::NotAssessable,
                Some((x, y)) if x <= median_ddr1 && y <= median_ddr2 => Fractality::Candidate,
                Some(_) => Fractality::Rejected,
            };
            (field.clone(), flag)
        })
        .collect();
    let n_candidates = flags.values().filter(|f| **f == Fractality::Candidate).count();
    Ok(Classification {
        median_ddr1,
        median_ddr2,
        flags,
        n_assessable: pairs.len(),
        n_candidates,
        size_threshold: None,
    })
}

/// Repeats [`classify_fields`] on fields whose size is at or above the
/// `quantile` of all field sizes.
pub fn size_restricted_classification(
    assessments: &BTreeMap<String, FractalAssessment>,
    field_sizes: &BTreeMap<String, usize>,
    quantile: f64,
) -> Result<Classification, FractalError> {
    if !(quantile > 0.0 && quantile < 1.0) {
        return Err(FractalError::BadQuantile(quantile));
    }
    let mut sizes = Vec::with_capacity(assessments.len());
    for field in assessments.keys() {
        let n = field_sizes
            .get(field)
            .ok_or_else(|| FractalError::MissingSize(field.clone()))?;
        sizes.push(*n as f64);
    }
    sizes.sort_by(f64::total_cmp);
    let threshold = quantile_sorted(&sizes, quantile);
    let restricted: BTreeMap<String, FractalAssessment> = assessments
        .iter()
        .filter(|(f, _)| field_sizes[*f] as f64 >= threshold)
        .map(|(f, a)| (f.clone(), *a))
        .collect();
    let mut c = classify_fields(&restricted)?;
    c.size_threshold = Some(threshold);
    Ok(c)
}
