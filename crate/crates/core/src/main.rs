use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use prodskew::baseline::build_baseline;
use prodskew::corpus::{known_publications, read_publications, ObservationConfig};
use prodskew::report::{self, Format, InputFiles};
use prodskew::scoring::Indicator;
use prodskew::synth::{generate_corpus, SynthSpec};

#[derive(Parser)]
#[command(name = "prodskew", version, about = "Researcher productivity scores and field-level skewness analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Inputs {
    /// Roster CSV (researcher_id,field_code,discipline_code,years_active)
    #[arg(long)]
    roster: PathBuf,
    /// Publications JSON Lines
    #[arg(long)]
    publications: PathBuf,
    /// Reference publications for the citation baseline
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Precomputed baseline CSV (year,category,mean_cited_citations,n_cited)
    #[arg(long)]
    baseline: Option<PathBuf>,
}

impl Inputs {
    fn files(&self) -> InputFiles {
        InputFiles {
            roster: self.roster.clone(),
            publications: self.publications.clone(),
            reference: self.reference.clone(),
            baseline_table: self.baseline.clone(),
        }
    }
}

#[derive(Args, Clone, Default)]
struct ConfigArgs {
    /// JSON configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// fss or po
    #[arg(long)]
    indicator: Option<Indicator>,
    #[arg(long)]
    min_field_size: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Count PO fractionally by byline share
    #[arg(long)]
    po_fractional: bool,
    /// Also report CSS recomputed on pooled discipline scores
    #[arg(long)]
    recompute_css_at_uda: bool,
}

impl ConfigArgs {
    fn load(&self) -> Result<ObservationConfig> {
        let mut config = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config `{}`", path.display()))?;
                serde_json::from_str(&text).with_context(|| format!("invalid config `{}`", path.display()))?
            }
            None => ObservationConfig::default(),
        };
        if let Some(i) = self.indicator {
            config.indicator = i;
        }
        if let Some(m) = self.min_field_size {
            config.min_field_size = m;
        }
        if let Some(s) = self.seed {
            config.rng_seed = s;
        }
        config.po_fractional |= self.po_fractional;
        config.recompute_css_at_uda |= self.recompute_css_at_uda;
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Load and validate inputs; print a JSON summary
    Validate {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Build the citation baseline table from reference publications
    Baseline {
        /// Reference publications JSON Lines
        #[arg(long)]
        reference: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Score every researcher and write scores.csv
    Score {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Full pipeline: scores, tables, plots and manifest
    Analyze {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        out_dir: PathBuf,
        /// csv, markdown or json
        #[arg(long, default_value = "csv")]
        format: Format,
    },
    /// Tables and plots from an existing scores.csv
    Report {
        #[arg(long)]
        scores: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value = "csv")]
        format: Format,
    },
    /// Write a seeded synthetic corpus
    Synth {
        /// JSON generator spec; defaults apply when omitted
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Validate { inputs, config } => {
            let config = config.load()?;
            let loaded = report::load_inputs(&inputs.files(), &config)?;
            let c = &loaded.corpus;
            print_json(&serde_json::json!({
                "researchers": c.researchers().len(),
                "researchers_excluded": loaded.excluded_researchers,
                "fields": c.field_sizes(),
                "fields_excluded": loaded.excluded_fields,
                "publications": c.publications().len(),
                "warnings": c.warnings(),
                "inputs": loaded.inputs,
            }));
        }
        Command::Baseline { reference, config, out_dir } => {
            let config = config.load()?;
            config.validate()?;
            let bytes = std::fs::read(&reference).with_context(|| format!("cannot read `{}`", reference.display()))?;
            let (pubs, _) = known_publications(read_publications(bytes.as_slice())?);
            let baseline = build_baseline(pubs.iter().filter(|p| config.doc_types.contains(&p.doc_type)))?;
            std::fs::create_dir_all(&out_dir)?;
            let path = out_dir.join("baseline.csv");
            baseline.write_csv(std::fs::File::create(&path)?)?;
            eprintln!("wrote {}", path.display());
        }
        Command::Score { inputs, config, out_dir } => {
            let config = config.load()?;
            let files = inputs.files();
            let mut loaded = report::load_inputs(&files, &config)?;
            let baseline = match config.indicator {
                Indicator::Fss => Some(report::run_baseline(&files, &loaded.corpus, &config, &mut loaded.inputs)?),
                Indicator::Po => None,
            };
            let records = report::score_corpus(&loaded.corpus, &config, baseline.as_ref())?;
            std::fs::create_dir_all(&out_dir)?;
            let path = out_dir.join("scores.csv");
            report::write_scores(&records, &path)?;
            eprintln!("wrote {} scores to {}", records.len(), path.display());
        }
        Command::Analyze {
            inputs,
            config,
            out_dir,
            format,
        } => {
            let config = config.load()?;
            let summary = report::run_analysis(&inputs.files(), &config, format, &out_dir)?;
            print_outcome(&summary, &out_dir);
        }
        Command::Report {
            scores,
            config,
            out_dir,
            format,
        } => {
            let config = config.load()?;
            let summary = report::run_report(&scores, &config, format, &out_dir)?;
            print_outcome(&summary, &out_dir);
        }
        Command::Synth { spec, seed, out_dir } => {
            let mut spec: SynthSpec = match spec {
                Some(path) => {
                    let text = std::fs::read_to_string(&path).with_context(|| format!("cannot read spec `{}`", path.display()))?;
                    serde_json::from_str(&text).with_context(|| format!("invalid spec `{}`", path.display()))?
                }
                None => SynthSpec::default(),
            };
            if let Some(s) = seed {
                spec.seed = s;
            }
            let corpus = generate_corpus(&spec)?;
            corpus.write_to(&out_dir)?;
            eprintln!(
                "wrote {} researchers and {} publications to {}",
                corpus.researchers.len(),
                corpus.publications.len(),
                out_dir.display()
            );
        }
    }
    Ok(())
}

fn print_outcome(summary: &report::RunSummary, out_dir: &Path) {
    let m = &summary.manifest;
    eprintln!(
        "analyzed {} fields ({} researchers); {} output files in {}",
        m.counts.fields,
        m.counts.researchers,
        m.outputs.len(),
        out_dir.display()
    );
    for note in &m.notes {
        eprintln!("note: {note}");
    }
}

/// Module that raised `err`, whether it arrived wrapped or as a module error.
fn module_of(err: &anyhow::Error) -> &'static str {
    use prodskew::{baseline, corpus, cssdist, fractal, report, scoring, skewstats, synth};
    if let Some(e) = err.downcast_ref::<prodskew::Error>() {
        return e.module();
    }
    let checks: [(&str, bool); 8] = [
        ("corpus", err.is::<corpus::CorpusError>()),
        ("baseline", err.is::<baseline::BaselineError>()),
        ("scoring", err.is::<scoring::ScoringError>()),
        ("cssdist", err.is::<cssdist::CssError>()),
        ("skewstats", err.is::<skewstats::StatsError>()),
        ("fractal", err.is::<fractal::FractalError>()),
        ("synth", err.is::<synth::SynthError>()),
        ("report", err.is::<report::ReportError>()),
    ];
    checks.iter().find(|c| c.1).map_or("cli", |c| c.0)
}

fn error_json(err: &anyhow::Error) -> String {
    let module = module_of(err);
    let message = err.chain().map(ToString::to_string).collect::<Vec<_>>().join(": ");
    serde_json::json!({ "error": { "module": module, "message": message } }).to_string()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_json(&e));
            ExitCode::FAILURE
        }
    }
}
