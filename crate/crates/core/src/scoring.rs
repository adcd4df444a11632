//! Fractional author credit and per-researcher productivity indicators.
//!
//! FSS for a researcher with `t` years of activity is
//! `(1/t) * Σ (citations_i / baseline_i) * share_i` over the researcher's
//! in-window publications, where `baseline_i` is the citation scaling factor
//! and `share_i` the researcher's fractional contribution to publication `i`.
//! PO is publications per year.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baseline::{BaselineError, CitationBaseline};
use crate::corpus::{AuthorSlot, Corpus, Publication, Researcher};

#[derive(Debug, Error)]
pub enum ScoringError {
    #[error("publication `{0}`: every author has zero raw weight")]
    ZeroWeights(String),
    #[error("researcher `{researcher}` is not on the byline of `{publication}`")]
    NotAnAuthor { researcher: String, publication: String },
    #[error("researcher `{0}` has non-positive years_active")]
    NonPositiveYears(String),
    #[error("invalid weight scheme: {0}")]
    InvalidScheme(String),
    #[error("unknown field `{0}`")]
    UnknownField(String),
    #[error("FSS requires a citation baseline")]
    MissingBaseline,
    #[error(transparent)]
    Baseline(#[from] BaselineError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Indicator {
    #[default]
    Fss,
    Po,
}

impl Indicator {
    pub fn as_str(self) -> &'static str {
        match self {
            Indicator::Fss => "fss",
            Indicator::Po => "po",
        }
    }
}

impl fmt::Display for Indicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Indicator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fss" => Ok(Indicator::Fss),
            "po" => Ok(Indicator::Po),
            other => Err(format!("unknown indicator `{other}` (expected fss or po)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PositionClass {
    First,
    Last,
    Second,
    SecondToLast,
    Other,
}

impl PositionClass {
    /// Class of 1-based `position` in a byline of `n` authors. Where classes
    /// overlap the earlier one in first, last, second, second-to-last wins.
    pub fn of(position: u32, n: u32) -> PositionClass {
        if position == 1 {
            PositionClass::First
        } else if position == n {
            PositionClass::Last
        } else if position == 2 {
            PositionClass::Second
        } else if position + 1 == n {
            PositionClass::SecondToLast
        } else {
            PositionClass::Other
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassWeights {
    pub intramural: f64,
    pub extramural: f64,
}

impl ClassWeights {
    pub fn both(w: f64) -> Self {
        ClassWeights {
            intramural: w,
            extramural: w,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    #[default]
    Uniform,
    BylineWeighted,
}

/// Author credit policy. In `byline_weighted` mode each slot's raw weight is
/// looked up by position class and intramural flag, then normalized over the
/// byline. Classes missing from the table use the `other` weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightScheme {
    pub mode: WeightMode,
    pub weight_table: BTreeMap<PositionClass, ClassWeights>,
}

impl Default for WeightScheme {
    fn default() -> Self {
        WeightScheme {
            mode: WeightMode::Uniform,
            weight_table: Self::default_table(),
        }
    }
}

impl WeightScheme {
    pub fn uniform() -> Self {
        Self::default()
    }

    pub fn byline_weighted(weight_table: BTreeMap<PositionClass, ClassWeights>) -> Self {
        WeightScheme {
            mode: WeightMode::BylineWeighted,
            weight_table,
        }
    }

    /// Policy default: first and last 2.0, second and second-to-last 1.5, others 1.0.
    pub fn default_table() -> BTreeMap<PositionClass, ClassWeights> {
        BTreeMap::from([
            (PositionClass::First, ClassWeights::both(2.0)),
            (PositionClass::Last, ClassWeights::both(2.0)),
            (PositionClass::Second, ClassWeights::both(1.5)),
            (PositionClass::SecondToLast, ClassWeights::both(1.5)),
            (PositionClass::Other, ClassWeights::both(1.0)),
        ])
    }

    pub fn validate(&self) -> Result<(), ScoringError> {
        if self.mode == WeightMode::Uniform {
            return Ok(());
        }
        if !self.weight_table.contains_key(&PositionClass::Other) {
            return Err(ScoringError::InvalidScheme(
                "weight_table needs an `other` entry".into(),
            ));
        }
        for (class, w) in &self.weight_table {
            for v in [w.intramural, w.extramural] {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(ScoringError::InvalidScheme(format!(
                        "weight for {class:?} must be a non-negative number, got {v}"
                    )));
                }
            }
        }
        Ok(())
    }

    fn raw_weight(&self, slot: &AuthorSlot, n: u32) -> f64 {
        let class = PositionClass::of(slot.position, n);
        let w = self
            .weight_table
            .get(&class)
            .or_else(|| self.weight_table.get(&PositionClass::Other))
            .copied()
            .unwrap_or(ClassWeights::both(1.0));
        if slot.intramural {
            w.intramural
        } else {
            w.extramural
        }
    }
}

/// Shares of every slot of `publication`'s byline, in byline order.
pub fn byline_shares(publication: &Publication, scheme: &WeightScheme) -> Result<Vec<f64>, ScoringError> {
    let n = publication.authors.len();
    match scheme.mode {
        WeightMode::Uniform => Ok(vec![1.0 / n as f64; n]),
        WeightMode::BylineWeighted => {
            let raw: Vec<f64> = publication
                .authors
                .iter()
                .map(|s| scheme.raw_weight(s, n as u32))
                .collect();
            let total: f64 = raw.iter().sum();
            if total <= 0.0 {
                return Err(ScoringError::ZeroWeights(publication.pub_id.clone()));
            }
            Ok(raw.into_iter().map(|w| w / total).collect())
        }
    }
}

/// Fractional contribution of the author at 1-based `position`.
pub fn fractional_contribution(
    publication: &Publication,
    position: u32,
    scheme: &WeightScheme,
) -> Result<f64, ScoringError> {
    let idx = (position as usize)
        .checked_sub(1)
        .filter(|&i| i < publication.authors.len())
        .ok_or_else(|| ScoringError::NotAnAuthor {
            researcher: format!("position {position}"),
            publication: publication.pub_id.clone(),
        })?;
    Ok(byline_shares(publication, scheme)?[idx])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreRecord {
    pub researcher_id: String,
    pub field_code: String,
    pub discipline_code: String,
    pub indicator: Indicator,
    pub value: f64,
    pub n_publications: usize,
    /// Categories that had to use the year fallback baseline.
    #[serde(skip)]
    pub baseline_fallbacks: usize,
}

fn researcher_share(
    researcher: &Researcher,
    publication: &Publication,
    scheme: &WeightScheme,
) -> Result<f64, ScoringError> {
    let slot = publication
        .slot_of(&researcher.researcher_id)
        .ok_or_else(|| ScoringError::NotAnAuthor {
            researcher: researcher.researcher_id.clone(),
            publication: publication.pub_id.clone(),
        })?;
    fractional_contribution(publication, slot.position, scheme)
}

fn check_years(researcher: &Researcher) -> Result<(), ScoringError> {
    if researcher.years_active > 0.0 {
        Ok(())
    } else {
        Err(ScoringError::NonPositiveYears(researcher.researcher_id.clone()))
    }
}

/// Sums per-publication terms in pub_id order so the result does not depend on
/// the order publications were supplied in.
fn ordered_sum(mut terms: Vec<(&str, f64)>) -> f64 {
    terms.sort_by(|a, b| a.0.cmp(b.0));
    terms.into_iter().map(|(_, v)| v).sum()
}

pub fn compute_fss(
    researcher: &Researcher,
    publications: &[&Publication],
    baseline: &CitationBaseline,
    scheme: &WeightScheme,
) -> Result<ScoreRecord, ScoringError> {
    check_years(researcher)?;
    let mut fallbacks = 0;
    let mut terms = Vec::with_capacity(publications.len());
    for p in publications {
        let share = researcher_share(researcher, p, scheme)?;
        let scale = baseline.scaling_factor(p.year, &p.categories)?;
        fallbacks += scale.fallback_categories;
        terms.push((p.pub_id.as_str(), p.citations as f64 / scale.value * share));
    }
    Ok(ScoreRecord {
        researcher_id: researcher.researcher_id.clone(),
        field_code: researcher.field_code.clone(),
        discipline_code: researcher.discipline_code.clone(),
        indicator: Indicator::Fss,
        value: ordered_sum(terms) / researcher.years_active,
        n_publications: publications.len(),
        baseline_fallbacks: fallbacks,
    })
}

/// Publication counting rule for PO.
#[derive(Debug, Clone, Copy)]
pub enum PoCounting<'a> {
    Full,
    Fractional(&'a WeightScheme),
}

pub fn compute_po(
    researcher: &Researcher,
    publications: &[&Publication],
    counting: PoCounting<'_>,
) -> Result<ScoreRecord, ScoringError> {
    check_years(researcher)?;
    let count = match counting {
        PoCounting::Full => publications.len() as f64,
        PoCounting::Fractional(scheme) => {
            let mut terms = Vec::with_capacity(publications.len());
            for p in publications {
                terms.push((p.pub_id.as_str(), researcher_share(researcher, p, scheme)?));
            }
            ordered_sum(terms)
        }
    };
    Ok(ScoreRecord {
        researcher_id: researcher.researcher_id.clone(),
        field_code: researcher.field_code.clone(),
        discipline_code: researcher.discipline_code.clone(),
        indicator: Indicator::Po,
        value: count / researcher.years_active,
        n_publications: publications.len(),
        baseline_fallbacks: 0,
    })
}

/// Everything needed to score researchers besides the corpus itself.
#[derive(Debug, Clone, Copy)]
pub struct ScoringContext<'a> {
    pub indicator: Indicator,
    pub baseline: Option<&'a CitationBaseline>,
    pub scheme: &'a WeightScheme,
    pub po_fractional: bool,
}

pub fn score_researcher(
    corpus: &Corpus,
    researcher: &Researcher,
    ctx: &ScoringContext<'_>,
) -> Result<ScoreRecord, ScoringError> {
    let pubs = corpus.publications_of(&researcher.researcher_id);
    match ctx.indicator {
        Indicator::Fss => {
            let baseline = ctx.baseline.ok_or(ScoringError::MissingBaseline)?;
            compute_fss(researcher, &pubs, baseline, ctx.scheme)
        }
        Indicator::Po => {
            let counting = if ctx.po_fractional {
                PoCounting::Fractional(ctx.scheme)
            } else {
                PoCounting::Full
            };
            compute_po(researcher, &pubs, counting)
        }
    }
}

/// One record per roster member of `field_code`, ordered by researcher_id.
/// All of a researcher's publications count, whatever their subject category.
pub fn score_field(
    corpus: &Corpus,
    field_code: &str,
    ctx: &ScoringContext<'_>,
) -> Result<Vec<ScoreRecord>, ScoringError> {
    let fields = corpus.fields();
    let members = fields
        .get(field_code)
        .ok_or_else(|| ScoringError::UnknownField(field_code.to_string()))?;
    members
        .iter()
        .map(|r| score_researcher(corpus, r, ctx))
        .collect()
}

pub fn write_scores_csv<W: std::io::Write>(records: &[ScoreRecord], sink: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Deserialize)]
struct ScoreRow {
    researcher_id: String,
    field_code: String,
    discipline_code: String,
    indicator: Indicator,
    value: f64,
    n_publications: usize,
}

/// Reads a `scores.csv` file as written by [`write_scores_csv`].
pub fn read_scores_csv<R: std::io::Read>(source: R) -> csv::Result<Vec<ScoreRecord>> {
    let mut rdr = csv::Reader::from_reader(source);
    rdr.deserialize::<ScoreRow>()
        .map(|row| {
            row.map(|r| ScoreRecord {
                researcher_id: r.researcher_id,
                field_code: r.field_code,
                discipline_code: r.discipline_code,
                indicator: r.indicator,
                value: r.value,
                n_publications: r.n_publications,
                baseline_fallbacks: 0,
            })
        })
        .collect()
}
