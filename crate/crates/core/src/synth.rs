//! Seeded synthetic rosters, publications and score populations.
//!
//! All draws come from a single `ChaCha8Rng` stream seeded with
//! `SynthSpec::seed`, consumed in a fixed order (fields, then researchers,
//! then publications), so a spec always produces the same output.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Gamma, LogNormal, Pareto, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baseline::{build_baseline, BaselineError, CitationBaseline};
use crate::corpus::{self, AuthorIdentity, AuthorSlot, DocType, Publication, Researcher};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Distribution of the strictly positive part of a score population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "distribution", rename_all = "snake_case")]
pub enum PositivePart {
    Lognormal { loc: f64, scale: f64 },
    Pareto { xmin: f64, alpha: f64 },
    Exponential { rate: f64 },
}

impl PositivePart {
    fn validate(&self) -> Result<(), String> {
        let ok = match *self {
            PositivePart::Lognormal { loc, scale } => loc.is_finite() && scale.is_finite() && scale >= 0.0,
            PositivePart::Pareto { xmin, alpha } => xmin > 0.0 && alpha > 0.0 && xmin.is_finite() && alpha.is_finite(),
            PositivePart::Exponential { rate } => rate > 0.0 && rate.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(format!("bad positive-part parameters {self:?}"))
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            PositivePart::Lognormal { loc, scale } => LogNormal::new(loc, scale).expect("validated").sample(rng),
            PositivePart::Pareto { xmin, alpha } => Pareto::new(xmin, alpha).expect("validated").sample(rng),
            PositivePart::Exponential { rate } => Exp::new(rate).expect("validated").sample(rng),
        }
    }
}

/// Negative-binomial citation counts as a gamma-Poisson mixture with the given
/// mean and shape (`dispersion`). The zero share is `(r / (r + mean))^r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CitationModel {
    pub mean: f64,
    pub dispersion: f64,
}

impl Default for CitationModel {
    /// Roughly 30% uncited publications.
    fn default() -> Self {
        CitationModel {
            mean: 5.0,
            dispersion: 0.5,
        }
    }
}

impl CitationModel {
    fn sample<R: Rng>(&self, mean: f64, rng: &mut R) -> u64 {
        if mean <= 0.0 {
            return 0;
        }
        let rate = Gamma::new(self.dispersion, mean / self.dispersion)
            .expect("validated")
            .sample(rng);
        if rate <= 1e-12 {
            return 0;
        }
        Poisson::new(rate).map(|p| p.sample(rng) as u64).unwrap_or(0)
    }
}

/// Per-field replacement of the global parameters, by 0-based field index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldOverride {
    pub field: usize,
    #[serde(default)]
    pub zero_share: Option<f64>,
    #[serde(default)]
    pub pubs_per_researcher: Option<[usize; 2]>,
    #[serde(default)]
    pub positive_part: Option<PositivePart>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    pub n_fields: usize,
    pub n_disciplines: usize,
    /// Inclusive range.
    pub researchers_per_field: [usize; 2],
    pub zero_share: f64,
    pub positive_part: PositivePart,
    /// Inclusive range, drawn for researchers that are not unproductive.
    pub pubs_per_researcher: [usize; 2],
    pub citations: CitationModel,
    pub max_authors: usize,
    /// Probability that a co-author slot is another productive roster member of the same field.
    pub internal_coauthor_share: f64,
    /// Probability that a researcher was active for only part of the window.
    pub partial_activity_share: f64,
    pub window_start: i32,
    pub window_end: i32,
    pub field_overrides: Vec<FieldOverride>,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n_fields: 10,
            n_disciplines: 3,
            researchers_per_field: [180, 220],
            zero_share: 0.1,
            positive_part: PositivePart::Lognormal { loc: 0.0, scale: 1.0 },
            pubs_per_researcher: [1, 15],
            citations: CitationModel::default(),
            max_authors: 6,
            internal_coauthor_share: 0.2,
            partial_activity_share: 0.1,
            window_start: 2009,
            window_end: 2013,
            field_overrides: Vec::new(),
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct FieldParams {
    zero_share: f64,
    pubs: [usize; 2],
    positive: PositivePart,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidSpec(m));
        if self.n_fields == 0 {
            return bad("n_fields must be at least 1".into());
        }
        if self.n_disciplines == 0 || self.n_disciplines > self.n_fields {
            return bad(format!("n_disciplines must lie in 1..={}", self.n_fields));
        }
        let check_range = |name: &str, r: [usize; 2], min: usize| -> Result<(), SynthError> {
            if r[0] > r[1] || r[0] < min {
                Err(SynthError::InvalidSpec(format!("{name} range {r:?} is invalid")))
            } else {
                Ok(())
            }
        };
        check_range("researchers_per_field", self.researchers_per_field, 1)?;
        check_range("pubs_per_researcher", self.pubs_per_researcher, 0)?;
        for (name, p) in [
            ("zero_share", self.zero_share),
            ("internal_coauthor_share", self.internal_coauthor_share),
            ("partial_activity_share", self.partial_activity_share),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must lie in [0, 1], got {p}"));
            }
        }
        self.positive_part.validate().map_err(SynthError::InvalidSpec)?;
        let c = self.citations;
        if !(c.mean >= 0.0 && c.mean.is_finite() && c.dispersion > 0.0 && c.dispersion.is_finite()) {
            return bad(format!("citation model {c:?} is invalid"));
        }
        if self.max_authors == 0 {
            return bad("max_authors must be at least 1".into());
        }
        if self.window_start > self.window_end {
            return bad("window_start is after window_end".into());
        }
        for o in &self.field_overrides {
            if o.field >= self.n_fields {
                return bad(format!("override for field index {} out of range", o.field));
            }
            if let Some(p) = o.zero_share {
                if !(0.0..=1.0).contains(&p) {
                    return bad(format!("override zero_share {p} outside [0, 1]"));
                }
            }
            if let Some(r) = o.pubs_per_researcher {
                check_range("override pubs_per_researcher", r, 0)?;
            }
            if let Some(pp) = o.positive_part {
                pp.validate().map_err(SynthError::InvalidSpec)?;
            }
        }
        Ok(())
    }

    fn field_params(&self, field: usize) -> FieldParams {
        let mut p = FieldParams {
            zero_share: self.zero_share,
            pubs: self.pubs_per_researcher,
            positive: self.positive_part,
        };
        for o in self.field_overrides.iter().filter(|o| o.field == field) {
            if let Some(z) = o.zero_share {
                p.zero_share = z;
            }
            if let Some(r) = o.pubs_per_researcher {
                p.pubs = r;
            }
            if let Some(pp) = o.positive_part {
                p.positive = pp;
            }
        }
        p
    }

    pub fn field_code(&self, field: usize) -> String {
        let width = self.n_fields.to_string().len().max(2);
        format!("F{:0width$}", field + 1)
    }

    pub fn discipline_code(&self, field: usize) -> String {
        format!("D{}", field % self.n_disciplines + 1)
    }

    fn window_years(&self) -> f64 {
        f64::from(self.window_end - self.window_start + 1)
    }
}

/// Score populations per field: each researcher scores 0 with probability
/// `zero_share`, otherwise a positive-part draw.
pub fn generate_scores(spec: &SynthSpec) -> Result<BTreeMap<String, Vec<f64>>, SynthError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = BTreeMap::new();
    for f in 0..spec.n_fields {
        let params = spec.field_params(f);
        let n = rng.random_range(spec.researchers_per_field[0]..=spec.researchers_per_field[1]);
        let scores = (0..n)
            .map(|_| {
                if rng.random_bool(params.zero_share) {
                    0.0
                } else {
                    params.positive.sample(&mut rng)
                }
            })
            .collect();
        out.insert(spec.field_code(f), scores);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub researchers: Vec<Researcher>,
    pub publications: Vec<Publication>,
    pub baseline: CitationBaseline,
}

fn doc_type<R: Rng>(rng: &mut R) -> DocType {
    match rng.random_range(0..100) {
        0..=69 => DocType::Article,
        70..=79 => DocType::Review,
        80..=84 => DocType::Letter,
        _ => DocType::Proceedings,
    }
}

/// Roster, publications and the implied citation baseline.
///
/// Unproductive researchers (probability `zero_share`) get no publications.
/// Every other researcher draws a positive-part "impact propensity" that
/// multiplies the mean of their publications' citation counts, so heavy-tailed
/// positive parts give right-skewed FSS distributions.
pub fn generate_corpus(spec: &SynthSpec) -> Result<SynthCorpus, SynthError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let window = spec.window_years();
    let mut researchers = Vec::new();
    let mut publications = Vec::new();

    for f in 0..spec.n_fields {
        let params = spec.field_params(f);
        let field_code = spec.field_code(f);
        let discipline_code = spec.discipline_code(f);
        let n = rng.random_range(spec.researchers_per_field[0]..=spec.researchers_per_field[1]);

        // (index into `researchers`, own publication count, propensity)
        let mut members = Vec::with_capacity(n);
        for i in 0..n {
            let years_active = if window > 1.0 && rng.random_bool(spec.partial_activity_share) {
                // half-year steps in [1, window)
                1.0 + (rng.random_range(0..((window - 1.0) * 2.0) as u32) as f64) / 2.0
            } else {
                window
            };
            researchers.push(Researcher {
                researcher_id: format!("{field_code}-{:04}", i + 1),
                field_code: field_code.clone(),
                discipline_code: discipline_code.clone(),
                years_active,
            });
            let (count, propensity) = if rng.random_bool(params.zero_share) {
                (0, 0.0)
            } else {
                let count = rng.random_range(params.pubs[0]..=params.pubs[1]);
                (count, params.positive.sample(&mut rng))
            };
            members.push((researchers.len() - 1, count, propensity));
        }
        let productive: Vec<usize> = members.iter().filter(|m| m.1 > 0).map(|m| m.0).collect();
        let home = format!("CAT-{field_code}");

        for &(idx, count, propensity) in &members {
            for _ in 0..count {
                let year = rng.random_range(spec.window_start..=spec.window_end);
                let mut categories = vec![home.clone()];
                if spec.n_fields > 1 && rng.random_bool(0.2) {
                    let other = (f + rng.random_range(1..spec.n_fields)) % spec.n_fields;
                    categories.push(format!("CAT-{}", spec.field_code(other)));
                }
                let n_authors = rng.random_range(1..=spec.max_authors);
                let own_pos = rng.random_range(0..n_authors);
                let mut ids: Vec<&str> = vec![researchers[idx].researcher_id.as_str()];
                let mut authors = Vec::with_capacity(n_authors);
                for pos in 0..n_authors {
                    let (identity, intramural) = if pos == own_pos {
                        (AuthorIdentity::Internal(researchers[idx].researcher_id.clone()), true)
                    } else if rng.random_bool(spec.internal_coauthor_share) {
                        match productive.choose(&mut rng) {
                            Some(&c) if !ids.contains(&researchers[c].researcher_id.as_str()) => {
                                ids.push(researchers[c].researcher_id.as_str());
                                (AuthorIdentity::Internal(researchers[c].researcher_id.clone()), true)
                            }
                            _ => (AuthorIdentity::External, false),
                        }
                    } else {
                        (AuthorIdentity::External, rng.random_bool(0.3))
                    };
                    authors.push(AuthorSlot {
                        position: pos as u32 + 1,
                        identity,
                        intramural,
                    });
                }
                let citations = spec.citations.sample(spec.citations.mean * propensity, &mut rng);
                publications.push(Publication {
                    pub_id: format!("P{:07}", publications.len() + 1),
                    year,
                    doc_type: doc_type(&mut rng),
                    categories,
                    citations,
                    authors,
                });
            }
        }
    }
    let baseline = build_baseline(&publications)?;
    Ok(SynthCorpus {
        researchers,
        publications,
        baseline,
    })
}

impl SynthCorpus {
    /// Writes `researchers.csv`, `publications.jsonl` and `baseline.csv` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<(), SynthError> {
        std::fs::create_dir_all(dir)?;
        corpus::write_roster(&self.researchers, File::create(dir.join("researchers.csv"))?)
            .map_err(|e| SynthError::Io(std::io::Error::other(e)))?;
        let mut w = BufWriter::new(File::create(dir.join("publications.jsonl"))?);
        for p in &self.publications {
            writeln!(w, "{}", corpus::publication_to_json(p))?;
        }
        w.flush()?;
        self.baseline
            .write_csv(File::create(dir.join("baseline.csv"))?)?;
        Ok(())
    }
}
