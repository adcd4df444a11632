//! Citation scaling factors: mean citations of *cited* publications per
//! (year, subject category), with a per-year fallback.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::Deserialize;
use thiserror::Error;

use crate::corpus::Publication;

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("reference corpus contains no cited publication")]
    NoCitedPublications,
    #[error("year {0} is not covered by the citation baseline")]
    YearNotCovered(i32),
    #[error("baseline table line {line}: {message}")]
    MalformedTable { line: u64, message: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineEntry {
    pub mean_cited_citations: f64,
    pub n_cited: u64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CitationBaseline {
    entries: BTreeMap<(i32, String), BaselineEntry>,
    year_fallback: BTreeMap<i32, f64>,
}

/// A resolved scaling factor and whether any category needed the year fallback.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFactor {
    pub value: f64,
    pub fallback_categories: usize,
}

/// Builds the baseline from a reference stream. Uncited publications do not
/// enter any mean; a multi-category publication counts once per category and
/// once in its year's fallback.
pub fn build_baseline<'a, I>(reference: I) -> Result<CitationBaseline, BaselineError>
where
    I: IntoIterator<Item = &'a Publication>,
{
    // Integer accumulation keeps the result independent of stream order.
    let mut per_cat: BTreeMap<(i32, String), (u64, u64)> = BTreeMap::new();
    let mut per_year: BTreeMap<i32, (u64, u64)> = BTreeMap::new();
    for p in reference {
        if p.citations == 0 {
            continue;
        }
        let y = per_year.entry(p.year).or_default();
        y.0 += p.citations;
        y.1 += 1;
        let mut cats: Vec<&String> = p.categories.iter().collect();
        cats.sort();
        cats.dedup();
        for c in cats {
            let e = per_cat.entry((p.year, c.clone())).or_default();
            e.0 += p.citations;
            e.1 += 1;
        }
    }
    if per_year.is_empty() {
        return Err(BaselineError::NoCitedPublications);
    }
    Ok(CitationBaseline {
        entries: per_cat
            .into_iter()
            .map(|(k, (sum, n))| {
                (
                    k,
                    BaselineEntry {
                        mean_cited_citations: sum as f64 / n as f64,
                        n_cited: n,
                    },
                )
            })
            .collect(),
        year_fallback: per_year
            .into_iter()
            .map(|(y, (sum, n))| (y, sum as f64 / n as f64))
            .collect(),
    })
}

impl CitationBaseline {
    pub fn entry(&self, year: i32, category: &str) -> Option<&BaselineEntry> {
        self.entries.get(&(year, category.to_string()))
    }

    pub fn entries(&self) -> impl Iterator<Item = (i32, &str, &BaselineEntry)> {
        self.entries.iter().map(|((y, c), e)| (*y, c.as_str(), e))
    }

    pub fn year_fallback(&self, year: i32) -> Option<f64> {
        self.year_fallback.get(&year).copied()
    }

    pub fn years(&self) -> impl Iterator<Item = i32> + '_ {
        self.year_fallback.keys().copied()
    }

    /// Scaling factor for a publication: the mean of its categories' baselines.
    /// Categories without an entry use the year fallback and are counted.
    pub fn scaling_factor(&self, year: i32, categories: &[String]) -> Result<ScalingFactor, BaselineError> {
        let fallback = self
            .year_fallback(year)
            .ok_or(BaselineError::YearNotCovered(year))?;
        if categories.is_empty() {
            return Ok(ScalingFactor {
                value: fallback,
                fallback_categories: 1,
            });
        }
        let mut sum = 0.0;
        let mut missing = 0;
        for c in categories {
            match self.entry(year, c) {
                Some(e) => sum += e.mean_cited_citations,
                None => {
                    missing += 1;
                    sum += fallback;
                }
            }
        }
        Ok(ScalingFactor {
            value: sum / categories.len() as f64,
            fallback_categories: missing,
        })
    }

    /// Loads a precomputed `baseline.csv` (`year,category,mean_cited_citations,n_cited`).
    ///
    /// The per-year fallback is the `n_cited`-weighted mean of the year's
    /// entries, which equals the exact fallback when every publication has a
    /// single category.
    pub fn read_csv<R: Read>(source: R) -> Result<CitationBaseline, BaselineError> {
        #[derive(Deserialize)]
        struct Row {
            year: i32,
            category: String,
            mean_cited_citations: f64,
            n_cited: u64,
        }
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
        let mut entries = BTreeMap::new();
        let mut weighted: BTreeMap<i32, (f64, u64)> = BTreeMap::new();
        for (i, row) in rdr.deserialize::<Row>().enumerate() {
            let line = i as u64 + 2;
            let row = row.map_err(|e| BaselineError::MalformedTable {
                line: e.position().map(|p| p.line()).unwrap_or(line),
                message: e.to_string(),
            })?;
            if !(row.mean_cited_citations > 0.0 && row.mean_cited_citations.is_finite()) || row.n_cited == 0 {
                return Err(BaselineError::MalformedTable {
                    line,
                    message: "mean_cited_citations must be positive and n_cited at least 1".into(),
                });
            }
            let w = weighted.entry(row.year).or_default();
            w.0 += row.mean_cited_citations * row.n_cited as f64;
            w.1 += row.n_cited;
            if entries
                .insert(
                    (row.year, row.category.clone()),
                    BaselineEntry {
                        mean_cited_citations: row.mean_cited_citations,
                        n_cited: row.n_cited,
                    },
                )
                .is_some()
            {
                return Err(BaselineError::MalformedTable {
                    line,
                    message: format!("duplicate entry ({}, {})", row.year, row.category),
                });
            }
        }
        if entries.is_empty() {
            return Err(BaselineError::NoCitedPublications);
        }
        Ok(CitationBaseline {
            entries,
            year_fallback: weighted
                .into_iter()
                .map(|(y, (s, n))| (y, s / n as f64))
                .collect(),
        })
    }

    pub fn write_csv<W: Write>(&self, sink: W) -> Result<(), BaselineError> {
        let mut w = csv::Writer::from_writer(sink);
        let to_io = |e: csv::Error| BaselineError::Io(std::io::Error::other(e));
        w.write_record(["year", "category", "mean_cited_citations", "n_cited"])
            .map_err(to_io)?;
        for ((year, cat), e) in &self.entries {
            w.write_record([
                year.to_string(),
                cat.clone(),
                e.mean_cited_citations.to_string(),
                e.n_cited.to_string(),
            ])
            .map_err(to_io)?;
        }
        w.flush()?;
        Ok(())
    }
}
