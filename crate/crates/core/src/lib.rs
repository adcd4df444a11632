//! Researcher productivity scoring and field-level distribution analysis.
//!
//! * [`corpus`]: roster and publication loading, validation, field filtering.
//! * [`baseline`]: mean citations of cited publications per (year, category).
//! * [`scoring`]: FSS and PO indicators with fractional byline counting.
//! * [`cssdist`]: characteristic scores and scales partitions.
//! * [`skewstats`]: GM skewness index and descriptive statistics.
//! * [`fractal`]: decay ratios and the median-split self-similarity test.
//! * [`synth`]: seeded synthetic corpora.
//! * [`report`]: per-field analysis, pooling, tables, plots and the pipeline.

pub mod baseline;
pub mod corpus;
pub mod cssdist;
pub mod fractal;
pub mod report;
pub mod scoring;
pub mod skewstats;
pub mod synth;

use thiserror::Error;

/// Any library error, tagged with the module it came from.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Corpus(#[from] corpus::CorpusError),
    #[error(transparent)]
    Baseline(#[from] baseline::BaselineError),
    #[error(transparent)]
    Scoring(#[from] scoring::ScoringError),
    #[error(transparent)]
    Css(#[from] cssdist::CssError),
    #[error(transparent)]
    Stats(#[from] skewstats::StatsError),
    #[error(transparent)]
    Fractal(#[from] fractal::FractalError),
    #[error(transparent)]
    Synth(#[from] synth::SynthError),
    #[error(transparent)]
    Report(#[from] report::ReportError),
}

impl Error {
    pub fn module(&self) -> &'static str {
        match self {
            Error::Corpus(_) => "corpus",
            Error::Baseline(_) => "baseline",
            Error::Scoring(_) => "scoring",
            Error::Css(_) => "cssdist",
            Error::Stats(_) => "skewstats",
            Error::Fractal(_) => "fractal",
            Error::Synth(_) => "synth",
            Error::Report(_) => "report",
        }
    }
}
