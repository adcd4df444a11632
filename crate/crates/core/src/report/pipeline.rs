//! End-to-end run: validate, baseline, score, analyze, aggregate, report.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::plots::{render_plots, PlotData};
use super::table::Format;
use super::tables::render_tables;
use super::{analyze_field, gm_summary, grand_summary, FieldAnalysis, GmSummary, GrandSummary, ReportError};
use crate::baseline::{build_baseline, CitationBaseline};
use crate::corpus::{filter_fields, known_publications, load_corpus, read_publications, Corpus, LoadWarnings, ObservationConfig};
use crate::fractal::{classify_fields, size_restricted_classification, Classification};
use crate::scoring::{read_scores_csv, score_field, write_scores_csv, Indicator, ScoreRecord, ScoringContext};
use crate::Error;

/// Input paths of a run.
#[derive(Debug, Clone, Default)]
pub struct InputFiles {
    pub roster: PathBuf,
    pub publications: PathBuf,
    /// Reference publications for the citation baseline; defaults to the
    /// analysed publications.
    pub reference: Option<PathBuf>,
    /// Precomputed baseline table, used instead of building one.
    pub baseline_table: Option<PathBuf>,
}

/// Everything the tables and plots are drawn from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisBundle {
    pub indicator: Indicator,
    /// One entry per field, ordered by field code.
    pub analyses: Vec<FieldAnalysis>,
    pub summary: GrandSummary,
    pub gm: GmSummary,
    pub classification: Option<Classification>,
    pub size_restricted: Option<Classification>,
    /// CSS recomputed on pooled discipline scores, when requested.
    pub recomputed_disciplines: Option<Vec<FieldAnalysis>>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InputDigest {
    pub role: String,
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct RunCounts {
    pub researchers: usize,
    pub researchers_excluded: usize,
    pub fields: usize,
    pub fields_excluded: Vec<String>,
    pub publications: usize,
    pub baseline_fallbacks: usize,
    pub warnings: LoadWarnings,
}

/// Written as `run_manifest.json`; carries no timestamps so reruns are identical.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub software: String,
    pub version: String,
    pub command: String,
    pub indicator: Indicator,
    pub format: String,
    pub config: ObservationConfig,
    pub inputs: Vec<InputDigest>,
    pub counts: RunCounts,
    pub notes: Vec<String>,
    pub outputs: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub bundle: AnalysisBundle,
    pub manifest: RunManifest,
    pub plots: PlotData,
}

fn read_file(role: &str, path: &Path) -> Result<(Vec<u8>, InputDigest), ReportError> {
    let bytes = std::fs::read(path).map_err(|source| ReportError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let digest = InputDigest {
        role: role.to_string(),
        path: path.display().to_string(),
        sha256: hex::encode(Sha256::digest(&bytes)),
        bytes: bytes.len(),
    };
    Ok((bytes, digest))
}

/// Groups scores by field and runs every per-field and cross-field analysis.
pub fn analyze_scores(records: &[ScoreRecord], config: &ObservationConfig) -> Result<AnalysisBundle, Error> {
    let indicator = records.first().ok_or(ReportError::NoFields)?.indicator;
    let mut fields: BTreeMap<&str, (&str, Vec<f64>)> = BTreeMap::new();
    for r in records {
        let entry = fields
            .entry(r.field_code.as_str())
            .or_insert_with(|| (r.discipline_code.as_str(), Vec::new()));
        if entry.0 != r.discipline_code {
            return Err(ReportError::InconsistentDiscipline(r.field_code.clone()).into());
        }
        entry.1.push(r.value);
    }
    let entries: Vec<(&str, &str, &Vec<f64>)> = fields.iter().map(|(f, (d, s))| (*f, *d, s)).collect();
    let analyses: Vec<FieldAnalysis> = entries
        .par_iter()
        .map(|(f, d, s)| analyze_field(f, d, s))
        .collect::<Result<_, _>>()?;

    let mut notes = Vec::new();
    let assessments = analyses
        .iter()
        .map(|a| (a.field_code.clone(), a.fractal))
        .collect::<BTreeMap<_, _>>();
    let sizes = analyses
        .iter()
        .map(|a| (a.field_code.clone(), a.n))
        .collect::<BTreeMap<_, _>>();
    let classification = classify_fields(&assessments)
        .map_err(|e| notes.push(format!("fractal classification skipped: {e}")))
        .ok();
    let size_restricted = size_restricted_classification(&assessments, &sizes, config.size_quantile)
        .map_err(|e| notes.push(format!("size-restricted classification skipped: {e}")))
        .ok();
    for n in &notes {
        warn!("{n}");
    }

    let recomputed_disciplines = if config.recompute_css_at_uda {
        let mut by_disc: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
        for r in records {
            by_disc.entry(r.discipline_code.as_str()).or_default().push(r.value);
        }
        Some(
            by_disc
                .iter()
                .map(|(d, s)| analyze_field(d, d, s))
                .collect::<Result<Vec<_>, _>>()?,
        )
    } else {
        None
    };

    Ok(AnalysisBundle {
        indicator,
        summary: grand_summary(&analyses)?,
        gm: gm_summary(&analyses, config.histogram_bin_width)?,
        analyses,
        classification,
        size_restricted,
        recomputed_disciplines,
        notes,
    })
}

/// Loaded and field-filtered corpus plus the digests of the files read.
pub struct LoadedCorpus {
    pub corpus: Corpus,
    pub excluded_fields: Vec<String>,
    pub excluded_researchers: usize,
    pub inputs: Vec<InputDigest>,
}

pub fn load_inputs(inputs: &InputFiles, config: &ObservationConfig) -> Result<LoadedCorpus, Error> {
    config.validate()?;
    let (roster, roster_digest) = read_file("roster", &inputs.roster)?;
    let (pubs, pubs_digest) = read_file("publications", &inputs.publications)?;
    let corpus = load_corpus(roster.as_slice(), pubs.as_slice(), config)?;
    let w = corpus.warnings();
    if w.total() > 0 {
        warn!(
            "dropped {} out-of-window and {} excluded-type publications; {} unknown author ids treated as external",
            w.out_of_window, w.excluded_doc_type, w.unknown_authors
        );
    }
    let filtered = filter_fields(&corpus, config.min_field_size)?;
    if !filtered.excluded_fields.is_empty() {
        info!(
            "excluded {} fields below {} researchers",
            filtered.excluded_fields.len(),
            config.min_field_size
        );
    }
    Ok(LoadedCorpus {
        corpus: filtered.corpus,
        excluded_fields: filtered.excluded_fields,
        excluded_researchers: filtered.excluded_researchers,
        inputs: vec![roster_digest, pubs_digest],
    })
}

/// Baseline from a table, a reference corpus, or the analysed publications.
pub fn run_baseline(
    inputs: &InputFiles,
    corpus: &Corpus,
    config: &ObservationConfig,
    digests: &mut Vec<InputDigest>,
) -> Result<CitationBaseline, Error> {
    if let Some(path) = &inputs.baseline_table {
        let (bytes, d) = read_file("baseline_table", path)?;
        digests.push(d);
        return Ok(CitationBaseline::read_csv(bytes.as_slice())?);
    }
    if let Some(path) = &inputs.reference {
        let (bytes, d) = read_file("reference", path)?;
        digests.push(d);
        let (pubs, _) = known_publications(read_publications(bytes.as_slice())?);
        let kept = pubs.iter().filter(|p| config.doc_types.contains(&p.doc_type));
        return Ok(build_baseline(kept)?);
    }
    Ok(build_baseline(corpus.publications())?)
}

/// Scores every researcher of every field, ordered by field then researcher.
pub fn score_corpus(
    corpus: &Corpus,
    config: &ObservationConfig,
    baseline: Option<&CitationBaseline>,
) -> Result<Vec<ScoreRecord>, Error> {
    let ctx = ScoringContext {
        indicator: config.indicator,
        baseline,
        scheme: &config.weight_scheme,
        po_fractional: config.po_fractional,
    };
    let fields: Vec<&str> = corpus.fields().keys().copied().collect();
    let per_field: Vec<Vec<ScoreRecord>> = fields
        .par_iter()
        .map(|f| score_field(corpus, f, &ctx))
        .collect::<Result<_, _>>()?;
    Ok(per_field.into_iter().flatten().collect())
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), ReportError> {
    std::fs::write(path, bytes).map_err(|source| ReportError::Write {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_scores(records: &[ScoreRecord], path: &Path) -> Result<(), ReportError> {
    let mut buf = Vec::new();
    write_scores_csv(records, &mut buf).map_err(|e| ReportError::Write {
        path: path.to_path_buf(),
        source: std::io::Error::other(e),
    })?;
    write(path, &buf)
}

pub fn read_scores(path: &Path) -> Result<(Vec<ScoreRecord>, InputDigest), ReportError> {
    let (bytes, digest) = read_file("scores", path)?;
    let records = read_scores_csv(bytes.as_slice()).map_err(|e| ReportError::Scores(e.to_string()))?;
    Ok((records, digest))
}

/// Writes tables, plots and the manifest; returns the plot data.
pub fn write_outputs(
    bundle: &AnalysisBundle,
    format: Format,
    out_dir: &Path,
    manifest: &mut RunManifest,
) -> Result<PlotData, Error> {
    let mut written = render_tables(bundle, format, &out_dir.join("tables"))?;
    let (plots, plot_files) = render_plots(bundle, &out_dir.join("plots"))?;
    written.extend(plot_files);
    manifest.notes.extend(bundle.notes.iter().cloned());
    manifest.outputs.extend(written.iter().map(|p| {
        p.strip_prefix(out_dir)
            .unwrap_or(p)
            .to_string_lossy()
            .replace('\\', "/")
    }));
    manifest.outputs.push("run_manifest.json".into());
    let mut json = serde_json::to_string_pretty(manifest).expect("serializable manifest");
    json.push('\n');
    write(&out_dir.join("run_manifest.json"), json.as_bytes())?;
    Ok(plots)
}

fn manifest(command: &str, config: &ObservationConfig, indicator: Indicator, format: Format) -> RunManifest {
    RunManifest {
        software: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        indicator,
        format: format.extension().to_string(),
        config: config.clone(),
        inputs: Vec::new(),
        counts: RunCounts::default(),
        notes: Vec::new(),
        outputs: Vec::new(),
    }
}

fn create_dir(dir: &Path) -> Result<(), ReportError> {
    std::fs::create_dir_all(dir).map_err(|source| ReportError::Write {
        path: dir.to_path_buf(),
        source,
    })
}

/// Full pipeline from roster and publications to every table and plot.
pub fn run_analysis(
    inputs: &InputFiles,
    config: &ObservationConfig,
    format: Format,
    out_dir: &Path,
) -> Result<RunSummary, Error> {
    let mut loaded = load_inputs(inputs, config)?;
    create_dir(out_dir)?;
    let mut m = manifest("analyze", config, config.indicator, format);

    let baseline = match config.indicator {
        Indicator::Fss => {
            let b = run_baseline(inputs, &loaded.corpus, config, &mut loaded.inputs)?;
            let mut buf = Vec::new();
            b.write_csv(&mut buf)?;
            write(&out_dir.join("baseline.csv"), &buf)?;
            m.outputs.push("baseline.csv".into());
            Some(b)
        }
        Indicator::Po => None,
    };
    let records = score_corpus(&loaded.corpus, config, baseline.as_ref())?;
    write_scores(&records, &out_dir.join("scores.csv"))?;
    m.outputs.push("scores.csv".into());

    let bundle = analyze_scores(&records, config)?;
    m.inputs = loaded.inputs;
    m.counts = RunCounts {
        researchers: loaded.corpus.researchers().len(),
        researchers_excluded: loaded.excluded_researchers,
        fields: bundle.analyses.len(),
        fields_excluded: loaded.excluded_fields,
        publications: loaded.corpus.publications().len(),
        baseline_fallbacks: records.iter().map(|r| r.baseline_fallbacks).sum(),
        warnings: loaded.corpus.warnings(),
    };
    if m.counts.baseline_fallbacks > 0 {
        warn!("{} category baselines fell back to the year mean", m.counts.baseline_fallbacks);
    }
    let plots = write_outputs(&bundle, format, out_dir, &mut m)?;
    Ok(RunSummary {
        bundle,
        manifest: m,
        plots,
    })
}

/// Analysis and reporting from an existing `scores.csv`.
pub fn run_report(scores: &Path, config: &ObservationConfig, format: Format, out_dir: &Path) -> Result<RunSummary, Error> {
    config.validate()?;
    let (records, digest) = read_scores(scores)?;
    let bundle = analyze_scores(&records, config)?;
    create_dir(out_dir)?;
    let mut m = manifest("report", config, bundle.indicator, format);
    m.inputs.push(digest);
    m.counts = RunCounts {
        researchers: records.len(),
        fields: bundle.analyses.len(),
        ..RunCounts::default()
    };
    let plots = write_outputs(&bundle, format, out_dir, &mut m)?;
    Ok(RunSummary {
        bundle,
        manifest: m,
        plots,
    })
}
