//! Roster and publication data model, input loading and field-size filtering.
//!
//! The roster is authoritative: every researcher listed in `researchers.csv`
//! is part of the analysis even with an empty publication set. Publications
//! come from a JSON-lines stream and are attributed to roster members through
//! their author bylines.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::{BufRead, Read};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scoring::{Indicator, WeightScheme};

/// Quartile convention used throughout the crate.
pub const QUARTILE_METHOD: &str = "linear-interpolation-between-closest-ranks";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("roster line {line}: {message}")]
    MalformedRoster { line: u64, message: String },
    #[error("publications line {line}: {message}")]
    MalformedPublication { line: usize, message: String },
    #[error("duplicate researcher_id `{0}` in roster")]
    DuplicateResearcher(String),
    #[error("duplicate pub_id `{0}`")]
    DuplicatePublication(String),
    #[error("roster is empty")]
    EmptyRoster,
    #[error("field `{field}` maps to disciplines `{first}` and `{second}`")]
    InconsistentDiscipline {
        field: String,
        first: String,
        second: String,
    },
    #[error("every field has fewer than {min_field_size} researchers")]
    AllFieldsExcluded { min_field_size: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocType {
    Article,
    Review,
    Letter,
    Proceedings,
}

impl DocType {
    pub const ALL: [DocType; 4] = [
        DocType::Article,
        DocType::Review,
        DocType::Letter,
        DocType::Proceedings,
    ];

    pub fn parse(s: &str) -> Option<DocType> {
        match s {
            "article" => Some(DocType::Article),
            "review" => Some(DocType::Review),
            "letter" => Some(DocType::Letter),
            "proceedings" => Some(DocType::Proceedings),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DocType::Article => "article",
            DocType::Review => "review",
            DocType::Letter => "letter",
            DocType::Proceedings => "proceedings",
        }
    }
}

impl fmt::Display for DocType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A roster entry. `years_active` is the number of years of work inside the
/// observation window and is the divisor of every per-year indicator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Researcher {
    pub researcher_id: String,
    pub field_code: String,
    pub discipline_code: String,
    pub years_active: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AuthorIdentity {
    Internal(String),
    External,
}

impl AuthorIdentity {
    pub fn researcher_id(&self) -> Option<&str> {
        match self {
            AuthorIdentity::Internal(id) => Some(id),
            AuthorIdentity::External => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuthorSlot {
    pub position: u32,
    pub identity: AuthorIdentity,
    pub intramural: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Publication {
    pub pub_id: String,
    pub year: i32,
    pub doc_type: DocType,
    pub categories: Vec<String>,
    pub citations: u64,
    /// Sorted by position; positions are exactly `1..=authors.len()`.
    pub authors: Vec<AuthorSlot>,
}

impl Publication {
    pub fn slot_of(&self, researcher_id: &str) -> Option<&AuthorSlot> {
        self.authors
            .iter()
            .find(|s| s.identity.researcher_id() == Some(researcher_id))
    }
}

/// Run configuration. Serialized as the JSON config file; every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObservationConfig {
    pub window_start: i32,
    pub window_end: i32,
    pub min_field_size: usize,
    pub indicator: Indicator,
    pub weight_scheme: WeightScheme,
    pub quartile_method: String,
    pub histogram_bin_width: f64,
    pub rng_seed: u64,
    /// Accepted document types; publications of any other type are dropped.
    pub doc_types: Vec<DocType>,
    /// Count PO fractionally instead of the default full counting.
    pub po_fractional: bool,
    /// Also emit CSS recomputed on pooled discipline scores.
    pub recompute_css_at_uda: bool,
    /// Size quantile for the large-fields robustness classification.
    pub size_quantile: f64,
}

impl Default for ObservationConfig {
    fn default() -> Self {
        ObservationConfig {
            window_start: 2009,
            window_end: 2013,
            min_field_size: 30,
            indicator: Indicator::Fss,
            weight_scheme: WeightScheme::default(),
            quartile_method: QUARTILE_METHOD.to_string(),
            histogram_bin_width: 0.1,
            rng_seed: 0,
            doc_types: DocType::ALL.to_vec(),
            po_fractional: false,
            recompute_css_at_uda: false,
            size_quantile: 0.75,
        }
    }
}

impl ObservationConfig {
    pub fn window_years(&self) -> f64 {
        f64::from(self.window_end - self.window_start + 1)
    }

    pub fn in_window(&self, year: i32) -> bool {
        (self.window_start..=self.window_end).contains(&year)
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        let bad = |m: String| Err(CorpusError::InvalidConfig(m));
        if self.window_start > self.window_end {
            return bad(format!(
                "window_start {} is after window_end {}",
                self.window_start, self.window_end
            ));
        }
        if self.min_field_size < 1 {
            return bad("min_field_size must be at least 1".into());
        }
        if !(self.histogram_bin_width > 0.0 && self.histogram_bin_width.is_finite()) {
            return bad(format!(
                "histogram_bin_width must be positive, got {}",
                self.histogram_bin_width
            ));
        }
        if self.quartile_method != QUARTILE_METHOD {
            return bad(format!(
                "unsupported quartile_method `{}` (only `{QUARTILE_METHOD}`)",
                self.quartile_method
            ));
        }
        if self.doc_types.is_empty() {
            return bad("doc_types whitelist is empty".into());
        }
        if !(self.size_quantile > 0.0 && self.size_quantile < 1.0) {
            return bad(format!(
                "size_quantile must lie in (0, 1), got {}",
                self.size_quantile
            ));
        }
        self.weight_scheme
            .validate()
            .map_err(|e| CorpusError::InvalidConfig(e.to_string()))
    }
}

/// Counters for records that were dropped or rewritten while loading.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct LoadWarnings {
    pub out_of_window: usize,
    pub excluded_doc_type: usize,
    pub unknown_authors: usize,
}

impl LoadWarnings {
    pub fn total(&self) -> usize {
        self.out_of_window + self.excluded_doc_type + self.unknown_authors
    }
}

/// Validated, immutable roster plus in-window publications.
#[derive(Debug, Clone)]
pub struct Corpus {
    researchers: Vec<Researcher>,
    publications: Vec<Publication>,
    /// researcher_id -> indices into `publications`, ordered by pub_id.
    authored: HashMap<String, Vec<usize>>,
    field_discipline: BTreeMap<String, String>,
    warnings: LoadWarnings,
}

impl Corpus {
    /// Builds a corpus from already-parsed records, enforcing every roster and
    /// byline invariant. Publications are filtered by window and doc type.
    pub fn from_records(
        mut researchers: Vec<Researcher>,
        publications: Vec<Publication>,
        config: &ObservationConfig,
    ) -> Result<Corpus, CorpusError> {
        config.validate()?;
        if researchers.is_empty() {
            return Err(CorpusError::EmptyRoster);
        }
        let window = config.window_years();
        let mut ids = BTreeSet::new();
        let mut field_discipline: BTreeMap<String, String> = BTreeMap::new();
        for (i, r) in researchers.iter().enumerate() {
            let line = i as u64 + 2;
            if r.researcher_id.is_empty() || r.field_code.is_empty() || r.discipline_code.is_empty() {
                return Err(CorpusError::MalformedRoster {
                    line,
                    message: "empty identifier".into(),
                });
            }
            if !(r.years_active > 0.0 && r.years_active <= window) {
                return Err(CorpusError::MalformedRoster {
                    line,
                    message: format!(
                        "years_active {} outside (0, {window}] for researcher `{}`",
                        r.years_active, r.researcher_id
                    ),
                });
            }
            if !ids.insert(r.researcher_id.clone()) {
                return Err(CorpusError::DuplicateResearcher(r.researcher_id.clone()));
            }
            match field_discipline.get(&r.field_code) {
                Some(d) if *d != r.discipline_code => {
                    return Err(CorpusError::InconsistentDiscipline {
                        field: r.field_code.clone(),
                        first: d.clone(),
                        second: r.discipline_code.clone(),
                    })
                }
                Some(_) => {}
                None => {
                    field_discipline.insert(r.field_code.clone(), r.discipline_code.clone());
                }
            }
        }
        researchers.sort_by(|a, b| a.researcher_id.cmp(&b.researcher_id));

        let mut warnings = LoadWarnings::default();
        let mut kept = Vec::with_capacity(publications.len());
        let mut pub_ids = BTreeSet::new();
        for (i, mut p) in publications.into_iter().enumerate() {
            check_publication(&p).map_err(|message| CorpusError::MalformedPublication {
                line: i + 1,
                message,
            })?;
            if !pub_ids.insert(p.pub_id.clone()) {
                return Err(CorpusError::DuplicatePublication(p.pub_id));
            }
            if !config.in_window(p.year) {
                warnings.out_of_window += 1;
                continue;
            }
            if !config.doc_types.contains(&p.doc_type) {
                warnings.excluded_doc_type += 1;
                continue;
            }
            for slot in &mut p.authors {
                if let AuthorIdentity::Internal(id) = &slot.identity {
                    if !ids.contains(id) {
                        warnings.unknown_authors += 1;
                        slot.identity = AuthorIdentity::External;
                    }
                }
            }
            kept.push(p);
        }
        kept.sort_by(|a, b| a.pub_id.cmp(&b.pub_id));
        if warnings.total() > 0 {
            log::warn!(
                "dropped {} out-of-window and {} excluded-type publications; {} unknown author references treated as external",
                warnings.out_of_window,
                warnings.excluded_doc_type,
                warnings.unknown_authors
            );
        }

        let mut authored: HashMap<String, Vec<usize>> = HashMap::new();
        for (idx, p) in kept.iter().enumerate() {
            for slot in &p.authors {
                if let AuthorIdentity::Internal(id) = &slot.identity {
                    authored.entry(id.clone()).or_default().push(idx);
                }
            }
        }

        Ok(Corpus {
            researchers,
            publications: kept,
            authored,
            field_discipline,
            warnings,
        })
    }

    pub fn researchers(&self) -> &[Researcher] {
        &self.researchers
    }

    pub fn publications(&self) -> &[Publication] {
        &self.publications
    }

    pub fn warnings(&self) -> LoadWarnings {
        self.warnings
    }

    pub fn researcher(&self, id: &str) -> Option<&Researcher> {
        self.researchers
            .binary_search_by(|r| r.researcher_id.as_str().cmp(id))
            .ok()
            .map(|i| &self.researchers[i])
    }

    /// In-window publications bylined by `researcher_id`, ordered by pub_id.
    pub fn publications_of(&self, researcher_id: &str) -> Vec<&Publication> {
        self.authored
            .get(researcher_id)
            .map(|idx| idx.iter().map(|&i| &self.publications[i]).collect())
            .unwrap_or_default()
    }

    /// Roster members grouped by field, both levels sorted.
    pub fn fields(&self) -> BTreeMap<&str, Vec<&Researcher>> {
        let mut out: BTreeMap<&str, Vec<&Researcher>> = BTreeMap::new();
        for r in &self.researchers {
            out.entry(r.field_code.as_str()).or_default().push(r);
        }
        out
    }

    pub fn field_sizes(&self) -> BTreeMap<String, usize> {
        self.fields()
            .into_iter()
            .map(|(f, rs)| (f.to_string(), rs.len()))
            .collect()
    }

    pub fn discipline_of(&self, field_code: &str) -> Option<&str> {
        self.field_discipline.get(field_code).map(String::as_str)
    }

    pub fn field_disciplines(&self) -> &BTreeMap<String, String> {
        &self.field_discipline
    }
}

fn check_publication(p: &Publication) -> Result<(), String> {
    if p.pub_id.is_empty() {
        return Err("empty pub_id".into());
    }
    if p.categories.is_empty() || p.categories.iter().any(|c| c.is_empty()) {
        return Err(format!("publication `{}` has no subject category", p.pub_id));
    }
    if p.authors.is_empty() {
        return Err(format!("publication `{}` has an empty byline", p.pub_id));
    }
    for (i, slot) in p.authors.iter().enumerate() {
        if slot.position as usize != i + 1 {
            return Err(format!(
                "publication `{}` byline positions must be 1..{} without gaps",
                p.pub_id,
                p.authors.len()
            ));
        }
    }
    let mut seen = BTreeSet::new();
    for slot in &p.authors {
        if let AuthorIdentity::Internal(id) = &slot.identity {
            if !seen.insert(id.as_str()) {
                return Err(format!(
                    "publication `{}` lists researcher `{id}` twice",
                    p.pub_id
                ));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Deserialize)]
struct RosterRow {
    researcher_id: String,
    field_code: String,
    discipline_code: String,
    years_active: f64,
}

/// Parses `researchers.csv` (`researcher_id,field_code,discipline_code,years_active`).
pub fn read_roster<R: Read>(source: R) -> Result<Vec<Researcher>, CorpusError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let headers = rdr.headers().map_err(|e| roster_error(&e, 1))?.clone();
    let expected = ["researcher_id", "field_code", "discipline_code", "years_active"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(CorpusError::MalformedRoster {
            line: 1,
            message: format!("expected header `{}`", expected.join(",")),
        });
    }
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<RosterRow>().enumerate() {
        let row = row.map_err(|e| roster_error(&e, i as u64 + 2))?;
        out.push(Researcher {
            researcher_id: row.researcher_id,
            field_code: row.field_code,
            discipline_code: row.discipline_code,
            years_active: row.years_active,
        });
    }
    Ok(out)
}

fn roster_error(e: &csv::Error, fallback_line: u64) -> CorpusError {
    let line = e.position().map(|p| p.line()).unwrap_or(fallback_line);
    CorpusError::MalformedRoster {
        line,
        message: e.to_string(),
    }
}

pub fn write_roster<W: std::io::Write>(researchers: &[Researcher], sink: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["researcher_id", "field_code", "discipline_code", "years_active"])?;
    for r in researchers {
        w.write_record([
            r.researcher_id.as_str(),
            r.field_code.as_str(),
            r.discipline_code.as_str(),
            &r.years_active.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AuthorRecord {
    position: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    researcher_id: Option<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    external: bool,
    intramural: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PublicationRecord {
    pub_id: String,
    year: i32,
    doc_type: String,
    categories: Vec<String>,
    citations: u64,
    authors: Vec<AuthorRecord>,
}

/// A publication whose doc type is outside the fixed four-type vocabulary.
/// Kept distinct so loaders can count it as a warning instead of failing.
#[derive(Debug)]
pub enum ParsedPublication {
    Known(Publication),
    UnknownDocType { pub_id: String, doc_type: String },
}

/// Parses `publications.jsonl`. Blank lines are skipped; line numbers are 1-based.
pub fn read_publications<R: BufRead>(source: R) -> Result<Vec<ParsedPublication>, CorpusError> {
    let mut out = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: PublicationRecord =
            serde_json::from_str(&line).map_err(|e| CorpusError::MalformedPublication {
                line: line_no,
                message: e.to_string(),
            })?;
        out.push(
            record_to_publication(rec).map_err(|message| CorpusError::MalformedPublication {
                line: line_no,
                message,
            })?,
        );
    }
    Ok(out)
}

fn record_to_publication(rec: PublicationRecord) -> Result<ParsedPublication, String> {
    let Some(doc_type) = DocType::parse(&rec.doc_type) else {
        return Ok(ParsedPublication::UnknownDocType {
            pub_id: rec.pub_id,
            doc_type: rec.doc_type,
        });
    };
    let mut authors = Vec::with_capacity(rec.authors.len());
    for a in rec.authors {
        let identity = match (a.researcher_id, a.external) {
            (Some(id), false) => AuthorIdentity::Internal(id),
            (None, true) => AuthorIdentity::External,
            (Some(_), true) => {
                return Err(format!(
                    "author at position {} has both researcher_id and external",
                    a.position
                ))
            }
            (None, false) => {
                return Err(format!(
                    "author at position {} needs researcher_id or external:true",
                    a.position
                ))
            }
        };
        authors.push(AuthorSlot {
            position: a.position,
            identity,
            intramural: a.intramural,
        });
    }
    authors.sort_by_key(|s| s.position);
    let publication = Publication {
        pub_id: rec.pub_id,
        year: rec.year,
        doc_type,
        categories: rec.categories,
        citations: rec.citations,
        authors,
    };
    check_publication(&publication)?;
    Ok(ParsedPublication::Known(publication))
}

/// Serializes one publication as a `publications.jsonl` line (no trailing newline).
pub fn publication_to_json(p: &Publication) -> String {
    let rec = PublicationRecord {
        pub_id: p.pub_id.clone(),
        year: p.year,
        doc_type: p.doc_type.as_str().to_string(),
        categories: p.categories.clone(),
        citations: p.citations,
        authors: p
            .authors
            .iter()
            .map(|s| AuthorRecord {
                position: s.position,
                researcher_id: s.identity.researcher_id().map(str::to_string),
                external: s.identity == AuthorIdentity::External,
                intramural: s.intramural,
            })
            .collect(),
    };
    serde_json::to_string(&rec).expect("publication record serializes")
}

/// Splits parsed publications into known ones and a count of unknown doc types.
pub fn known_publications(parsed: Vec<ParsedPublication>) -> (Vec<Publication>, usize) {
    let mut unknown = 0;
    let pubs = parsed
        .into_iter()
        .filter_map(|p| match p {
            ParsedPublication::Known(p) => Some(p),
            ParsedPublication::UnknownDocType { pub_id, doc_type } => {
                log::debug!("dropping `{pub_id}` with doc_type `{doc_type}`");
                unknown += 1;
                None
            }
        })
        .collect();
    (pubs, unknown)
}

/// Parses both input streams and builds a validated corpus.
pub fn load_corpus<R: Read, P: BufRead>(
    roster_source: R,
    publication_source: P,
    config: &ObservationConfig,
) -> Result<Corpus, CorpusError> {
    let researchers = read_roster(roster_source)?;
    let (pubs, unknown) = known_publications(read_publications(publication_source)?);
    let mut corpus = Corpus::from_records(researchers, pubs, config)?;
    corpus.warnings.excluded_doc_type += unknown;
    Ok(corpus)
}

/// Outcome of [`filter_fields`].
#[derive(Debug, Clone)]
pub struct FieldFilter {
    pub corpus: Corpus,
    pub excluded_fields: Vec<String>,
    pub excluded_researchers: usize,
}

/// Keeps fields with at least `min_field_size` researchers (fields strictly
/// smaller are excluded). Publications stay untouched so byline sizes keep
/// counting every author.
pub fn filter_fields(corpus: &Corpus, min_field_size: usize) -> Result<FieldFilter, CorpusError> {
    let sizes = corpus.field_sizes();
    let excluded_fields: Vec<String> = sizes
        .iter()
        .filter(|(_, &n)| n < min_field_size)
        .map(|(f, _)| f.clone())
        .collect();
    if excluded_fields.len() == sizes.len() {
        return Err(CorpusError::AllFieldsExcluded { min_field_size });
    }
    let excluded: BTreeSet<&str> = excluded_fields.iter().map(String::as_str).collect();
    let researchers: Vec<Researcher> = corpus
        .researchers
        .iter()
        .filter(|r| !excluded.contains(r.field_code.as_str()))
        .cloned()
        .collect();
    let excluded_researchers = corpus.researchers.len() - researchers.len();
    let kept_ids: BTreeSet<&str> = researchers.iter().map(|r| r.researcher_id.as_str()).collect();
    let authored = corpus
        .authored
        .iter()
        .filter(|(id, _)| kept_ids.contains(id.as_str()))
        .map(|(id, v)| (id.clone(), v.clone()))
        .collect();
    let field_discipline = corpus
        .field_discipline
        .iter()
        .filter(|(f, _)| !excluded.contains(f.as_str()))
        .map(|(f, d)| (f.clone(), d.clone()))
        .collect();
    Ok(FieldFilter {
        corpus: Corpus {
            researchers,
            publications: corpus.publications.clone(),
            authored,
            field_discipline,
            warnings: corpus.warnings,
        },
        excluded_fields,
        excluded_researchers,
    })
}
