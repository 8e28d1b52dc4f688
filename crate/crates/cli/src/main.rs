//! Command-line front end for the perceived-stress classification pipeline.
//!
//! Exit codes: 0 success, 2 argument errors, 3 configuration errors,
//! 4 I/O errors, 5 malformed input data, 1 anything else.

mod cohort;
mod config;
mod output;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use stresslab::classify::ClassifierKind;
use stresslab::data::{LabelScheme, StressLevel};
use stresslab::evaluate::{metrics, ConfusionMatrix};
use stresslab::ingest::synth::CohortSpec;
use stresslab::ingest::GsrUnit;
use stresslab::pipeline;
use stresslab::select::FusionMode;

use config::{CliConfig, SchemeChoice};

#[derive(Parser)]
#[command(name = "stresslab", version, about = "Multimodal perceived-stress classification pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Two,
    Three,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum FusionArg {
    Lff,
    Eff,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassifierArg {
    Mlp,
    Svm,
    Nb,
}

#[derive(Clone, Copy, ValueEnum)]
enum GsrUnitArg {
    #[value(name = "kohm")]
    KOhm,
    #[value(name = "us")]
    MicroSiemens,
}

/// Options shared by the pipeline commands. Command-line flags override the
/// configuration file.
#[derive(Args)]
struct CommonOpts {
    /// Configuration file (key = value lines)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Cohort directory (overrides input_dir)
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output directory (overrides output_dir)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed (overrides master_seed)
    #[arg(long)]
    seed: Option<u64>,
    /// Worker thread cap, 0 = all cores (overrides threads)
    #[arg(long)]
    threads: Option<usize>,
    /// Labeling scheme (overrides label_scheme)
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    /// Fusion mode (overrides fusion_mode)
    #[arg(long, value_enum)]
    fusion: Option<FusionArg>,
    /// Classifier (overrides classifier)
    #[arg(long, value_enum)]
    classifier: Option<ClassifierArg>,
}

impl CommonOpts {
    fn resolve(&self) -> Result<CliConfig> {
        let mut cfg = match &self.config {
            Some(path) => config::parse_file(path).map_err(ConfigError::wrap)?,
            None => CliConfig::default(),
        };
        if let Some(p) = &self.input {
            cfg.input_dir = p.clone();
        }
        if let Some(p) = &self.out {
            cfg.output_dir = p.clone();
        }
        if let Some(s) = self.seed {
            cfg.pipeline.master_seed = s;
        }
        if let Some(t) = self.threads {
            cfg.threads = t;
        }
        if let Some(s) = self.scheme {
            cfg.scheme = match s {
                SchemeArg::Two => SchemeChoice::Two,
                SchemeArg::Three => SchemeChoice::Three,
                SchemeArg::Both => SchemeChoice::Both,
            };
        }
        if let Some(f) = self.fusion {
            cfg.pipeline.fusion = match f {
                FusionArg::Lff => FusionMode::Late,
                FusionArg::Eff => FusionMode::Early,
            };
        }
        if let Some(c) = self.classifier {
            cfg.classifier = match c {
                ClassifierArg::Mlp => ClassifierKind::Mlp,
                ClassifierArg::Svm => ClassifierKind::Svm,
                ClassifierArg::Nb => ClassifierKind::Nb,
            };
        }
        init_threads(cfg.threads);
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded synthetic cohort (device-format CSVs + manifest)
    Synth {
        /// Output directory
        #[arg(long)]
        out: PathBuf,
        /// Number of subjects (at least 4)
        #[arg(long, default_value_t = 40)]
        subjects: usize,
        /// Class proportions to plant
        #[arg(long, value_enum, default_value_t = SchemeArg::Three)]
        scheme: SchemeArg,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Recording length per subject in seconds
        #[arg(long, default_value_t = 180.0)]
        duration: f64,
        /// Multiplier on the class-dependent signal effects (0 = none)
        #[arg(long, default_value_t = 1.0)]
        effect_scale: f64,
        /// Unit the GSR column is written in
        #[arg(long, value_enum, default_value_t = GsrUnitArg::KOhm)]
        gsr_unit: GsrUnitArg,
        /// Also write a matching pipeline config template
        #[arg(long)]
        write_config: Option<PathBuf>,
    },
    /// Parse and validate a cohort directory
    IngestCheck {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Extract feature matrices to CSV
    Features {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Significance analysis (t-test / ANOVA) of the raw measures
    Stats {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// EEG frequency-band selection
    SelectBand {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Wrapper feature selection with fusion
    SelectFeatures {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Leave-one-out evaluation of the fused, selected features
    Evaluate {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// The full modality-combination comparison grid
    Sweep {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Metrics from a confusion-matrix CSV file
    Metrics {
        /// CSV file of integer counts (rows actual, columns predicted)
        #[arg(long)]
        file: PathBuf,
    },
    /// Full pipeline: features, stats, selection, evaluation, sweep
    Run {
        #[command(flatten)]
        common: CommonOpts,
    },
}

/// Marker for configuration problems so the exit code can distinguish them.
#[derive(Debug)]
struct ConfigError(anyhow::Error);

impl ConfigError {
    fn wrap(e: anyhow::Error) -> anyhow::Error {
        anyhow::Error::new(ConfigError(e))
    }
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn init_threads(threads: usize) {
    if threads > 0 {
        // may fail if a pool already exists; the cap is best effort then
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
}

fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.downcast_ref::<ConfigError>().is_some() {
            return 3;
        }
        if let Some(e) = cause.downcast_ref::<stresslab::Error>() {
            return match e {
                stresslab::Error::Config(_) => 3,
                stresslab::Error::Io { .. } => 4,
                stresslab::Error::MissingColumn { .. }
                | stresslab::Error::CsvFormat { .. }
                | stresslab::Error::EmptyRecording(_)
                | stresslab::Error::SampleRateMismatch { .. }
                | stresslab::Error::InvalidSignal(_)
                | stresslab::Error::PssScoreOutOfRange(_)
                | stresslab::Error::EmptyCohort
                | stresslab::Error::DatasetMismatch(_) => 5,
                _ => 1,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 4;
        }
    }
    1
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = dispatch(cli.command) {
        eprintln!("error: {err:#}");
        std::process::exit(exit_code(&err));
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Synth {
            out,
            subjects,
            scheme,
            seed,
            duration,
            effect_scale,
            gsr_unit,
            write_config,
        } => cmd_synth(
            out,
            subjects,
            scheme,
            seed,
            duration,
            effect_scale,
            gsr_unit,
            write_config,
        ),
        Command::IngestCheck { common } => cmd_ingest_check(&common.resolve()?),
        Command::Features { common } => cmd_features(&common.resolve()?),
        Command::Stats { common } => cmd_stats(&common.resolve()?),
        Command::SelectBand { common } => cmd_select_band(&common.resolve()?),
        Command::SelectFeatures { common } => cmd_select_features(&common.resolve()?),
        Command::Evaluate { common } => cmd_evaluate(&common.resolve()?),
        Command::Sweep { common } => cmd_sweep(&common.resolve()?),
        Command::Metrics { file } => cmd_metrics(&file),
        Command::Run { common } => cmd_run(&common.resolve()?),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_synth(
    out: PathBuf,
    subjects: usize,
    scheme: SchemeArg,
    seed: u64,
    duration: f64,
    effect_scale: f64,
    gsr_unit: GsrUnitArg,
    write_config: Option<PathBuf>,
) -> Result<()> {
    if subjects < 4 {
        eprintln!("error: --subjects must be at least 4 (got {subjects})");
        std::process::exit(2);
    }
    let spec = CohortSpec {
        n_subjects: subjects,
        scheme: match scheme {
            SchemeArg::Two => LabelScheme::TwoClass,
            SchemeArg::Three => LabelScheme::ThreeClass,
            SchemeArg::Both => {
                eprintln!("error: --scheme both is not a plantable cohort scheme");
                std::process::exit(2);
            }
        },
        seed,
        duration_seconds: duration,
        sample_rate: stresslab::data::DEVICE_SAMPLE_RATE_HZ,
        effect_scale,
    };
    let unit = match gsr_unit {
        GsrUnitArg::KOhm => GsrUnit::KiloOhm,
        GsrUnitArg::MicroSiemens => GsrUnit::MicroSiemens,
    };
    let cohort = cohort::write_synth_cohort(&out, &spec, unit)?;
    println!(
        "wrote {} subjects to {} ({} s at {} Hz each)",
        cohort.records.len(),
        out.display(),
        duration,
        spec.sample_rate
    );
    println!("  two-class labels: {}", cohort::label_counts(&cohort.labels_two));
    println!(
        "  three-class labels: {}",
        cohort::label_counts(&cohort.labels_three)
    );
    if let Some(cfg_path) = write_config {
        output::write(&cfg_path, &config::sample_config(&out, &out.join("out")))?;
        println!("wrote config template to {}", cfg_path.display());
    }
    Ok(())
}

fn cmd_ingest_check(cfg: &CliConfig) -> Result<()> {
    let manifest_text = std::fs::read_to_string(cfg.input_dir.join("manifest.csv"))
        .with_context(|| format!("cannot read {}/manifest.csv", cfg.input_dir.display()))?;
    let rows = cohort::parse_manifest(&manifest_text)?;
    cohort::verify_manifest_labels(&rows)?;
    let subjects = cohort::load_cohort(&cfg.input_dir)?;
    println!(
        "{}: {} subjects parsed cleanly",
        cfg.input_dir.display(),
        subjects.len()
    );
    for s in &subjects {
        println!(
            "  {:>8}  pss {:>2}  eeg {:>7.1} s  gsr/ppg {:>7.1} s  dropped rows {}/{}  gsr unit {}",
            s.record.subject_id,
            s.record.pss_score,
            s.record.eeg.duration_seconds(),
            s.record.gsr.duration_seconds(),
            s.dropped_muse_rows,
            s.dropped_shimmer_rows,
            match s.gsr_unit {
                GsrUnit::MicroSiemens => "µS",
                GsrUnit::KiloOhm => "kΩ",
            }
        );
    }
    let off_nominal = subjects
        .iter()
        .filter(|s| {
            (s.record.eeg.duration_seconds() - stresslab::data::NOMINAL_DURATION_S).abs() > 2.0
        })
        .count();
    if off_nominal > 0 {
        println!(
            "note: {off_nominal} recording(s) deviate from the nominal {:.0} s protocol",
            stresslab::data::NOMINAL_DURATION_S
        );
    }
    Ok(())
}

fn load_records(cfg: &CliConfig) -> Result<Vec<stresslab::data::SubjectRecord>> {
    let subjects = cohort::load_cohort(&cfg.input_dir)?;
    Ok(cohort::records(&subjects))
}

fn ensure_out(cfg: &CliConfig) -> Result<()> {
    std::fs::create_dir_all(&cfg.output_dir)
        .with_context(|| format!("cannot create {}", cfg.output_dir.display()))
}

fn cmd_features(cfg: &CliConfig) -> Result<()> {
    let records = load_records(cfg)?;
    ensure_out(cfg)?;
    for scheme in cfg.scheme.schemes() {
        let features = pipeline::cohort_features(&records, scheme, &cfg.pipeline)?;
        let path = cfg.output_dir.join(format!("features_{}.csv", scheme.name()));
        output::write(&path, &pipeline::dataset_to_csv(&features.dataset))?;
        println!(
            "wrote {} ({} subjects x {} features)",
            path.display(),
            features.dataset.n_subjects(),
            features.dataset.n_features()
        );
    }
    Ok(())
}

fn cmd_stats(cfg: &CliConfig) -> Result<()> {
    let records = load_records(cfg)?;
    ensure_out(cfg)?;
    for scheme in cfg.scheme.schemes() {
        let features = pipeline::cohort_features(&records, scheme, &cfg.pipeline)?;
        let report = stresslab::stats::significance_report(&features.measures)?;
        let csv_path = cfg
            .output_dir
            .join(format!("significance_{}.csv", scheme.name()));
        output::write(&csv_path, &stresslab::stats::significance_to_csv(&report))?;
        println!("{}-class significance (p < 0.05 marked *):", scheme.name());
        for row in report.iter().take(8) {
            println!(
                "  {:<22} p = {:.4}{}",
                row.measure,
                row.result.p_value,
                if row.significant { " *" } else { "" }
            );
        }
        println!("  ... full table in {}", csv_path.display());
    }
    Ok(())
}

fn cmd_select_band(cfg: &CliConfig) -> Result<()> {
    let records = load_records(cfg)?;
    ensure_out(cfg)?;
    let spec = cfg.pipeline.spec_for(cfg.classifier);
    for scheme in cfg.scheme.schemes() {
        let features = pipeline::cohort_features(&records, scheme, &cfg.pipeline)?;
        let (eeg, _, _) = pipeline::modality_views(&features.dataset);
        let seed = stresslab::rng::derive_seed(
            cfg.pipeline.master_seed,
            &[b'b' as u64, scheme as u64, cfg.classifier as u64],
        );
        let (selection, bands, _) = pipeline::banded_eeg(&eeg, &spec, &cfg.pipeline, seed)?;
        let path = cfg.output_dir.join(format!(
            "band_selection_{}_{}.json",
            scheme.name(),
            cfg.classifier.name()
        ));
        output::write_json(&path, &selection)?;
        println!(
            "{}-class, {}: chose bands {} (mean LOOCV accuracy {:.4}) -> {}",
            scheme.name(),
            cfg.classifier.name(),
            bands.iter().map(|b| b.name()).collect::<Vec<_>>().join("+"),
            selection.objective,
            path.display()
        );
    }
    Ok(())
}

fn cmd_select_features(cfg: &CliConfig) -> Result<()> {
    let records = load_records(cfg)?;
    ensure_out(cfg)?;
    for scheme in cfg.scheme.schemes() {
        let run = pipeline::run_scheme(&records, scheme, &cfg.pipeline, &[cfg.classifier])?;
        let cr = &run.runs[0];
        let path = cfg.output_dir.join(format!(
            "selection_{}_{}.json",
            scheme.name(),
            cfg.classifier.name()
        ));
        output::write_json(&path, &cr.fusion.selections)?;
        println!(
            "{}-class, {}: fused {} features: {}",
            scheme.name(),
            cfg.classifier.name(),
            cr.fusion.dataset.n_features(),
            cr.fusion
                .dataset
                .feature_defs
                .iter()
                .map(|d| d.name.as_str())
                .collect::<Vec<_>>()
                .join(", ")
        );
    }
    Ok(())
}

fn cmd_evaluate(cfg: &CliConfig) -> Result<()> {
    let records = load_records(cfg)?;
    ensure_out(cfg)?;
    for scheme in cfg.scheme.schemes() {
        let run = pipeline::run_scheme(&records, scheme, &cfg.pipeline, &[cfg.classifier])?;
        output::write_scheme_outputs(&cfg.output_dir, &run)?;
        let cr = &run.runs[0];
        println!(
            "{}-class, {}: accuracy {:.4}, weighted F {:.4}, kappa {:.4}",
            scheme.name(),
            cfg.classifier.name(),
            cr.evaluation.metrics.accuracy,
            cr.evaluation.metrics.weighted_f1,
            cr.evaluation.metrics.kappa
        );
    }
    Ok(())
}

fn cmd_sweep(cfg: &CliConfig) -> Result<()> {
    let records = load_records(cfg)?;
    ensure_out(cfg)?;
    let classifiers = ClassifierKind::ALL;
    let mut inputs = Vec::new();
    for scheme in cfg.scheme.schemes() {
        inputs.push(pipeline::sweep_input(
            &records,
            scheme,
            &cfg.pipeline,
            &classifiers,
        )?);
    }
    let specs: Vec<_> = classifiers.iter().map(|k| cfg.pipeline.spec_for(*k)).collect();
    let sweep = stresslab::evaluate::modality_sweep(
        &inputs,
        &specs,
        cfg.pipeline.fusion,
        stresslab::rng::derive_seed(cfg.pipeline.master_seed, &[b's' as u64]),
    );
    output::write_sweep(&cfg.output_dir, &sweep)?;
    print!("{}", sweep.to_text());
    Ok(())
}

fn cmd_metrics(file: &PathBuf) -> Result<()> {
    let text = std::fs::read_to_string(file)
        .with_context(|| format!("cannot read {}", file.display()))?;
    let counts = parse_confusion_csv(&text)?;
    let classes: Vec<StressLevel> = match counts.len() {
        2 => vec![StressLevel::NonStressed, StressLevel::Stressed],
        3 => vec![
            StressLevel::NonStressed,
            StressLevel::MildlyStressed,
            StressLevel::Stressed,
        ],
        k => bail!("confusion matrix must be 2x2 or 3x3, got {k}x{k}"),
    };
    let cm = ConfusionMatrix::from_counts(classes, counts).map_err(|e| anyhow!(e))?;
    let m = metrics(&cm).map_err(|e| anyhow!(e))?;
    println!("accuracy  {:.2}%", m.accuracy * 100.0);
    println!(
        "weighted F {:.4}   macro F {:.4}   kappa {:.4}",
        m.weighted_f1, m.macro_f1, m.kappa
    );
    for c in &m.per_class {
        println!(
            "  {:<16} precision {:.3}{} recall {:.3}{} f1 {:.3} (support {})",
            c.class.name(),
            c.precision,
            if c.precision_defined { " " } else { "*" },
            c.recall,
            if c.recall_defined { " " } else { "*" },
            c.f1,
            c.support
        );
    }
    Ok(())
}

/// Parse a confusion CSV: plain integer rows, or this tool's own confusion
/// output (header row plus class-name row labels).
fn parse_confusion_csv(text: &str) -> Result<Vec<Vec<u64>>> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let numeric: Vec<u64> = cells
            .iter()
            .filter(|c| !c.is_empty() && c.chars().all(|ch| ch.is_ascii_digit()))
            .map(|c| c.parse::<u64>().unwrap())
            .collect();
        let non_numeric = cells
            .iter()
            .filter(|c| !c.is_empty() && !c.chars().all(|ch| ch.is_ascii_digit()))
            .count();
        if numeric.is_empty() {
            continue; // header or blank line
        }
        if non_numeric > 1 {
            bail!("line {}: mixed labels and counts", lineno + 1);
        }
        rows.push(numeric);
    }
    if rows.is_empty() {
        bail!("no counts found in file");
    }
    let k = rows.len();
    for (i, row) in rows.iter().enumerate() {
        if row.len() != k {
            bail!(
                "matrix is not square: row {} has {} entries, expected {k}",
                i + 1,
                row.len()
            );
        }
    }
    Ok(rows)
}

fn cmd_run(cfg: &CliConfig) -> Result<()> {
    let records = load_records(cfg)?;
    ensure_out(cfg)?;
    let full = pipeline::full_run(&records, &cfg.pipeline)?;
    output::write_run_manifest(
        &cfg.output_dir,
        cfg,
        records.iter().map(|r| r.subject_id.clone()).collect(),
    )?;
    for run in &full.schemes {
        output::write_scheme_outputs(&cfg.output_dir, run)?;
    }
    output::write_sweep(&cfg.output_dir, &full.sweep)?;
    for run in &full.schemes {
        for cr in &run.runs {
            println!(
                "{}-class {:<4} bands {:<18} features {:>2}  accuracy {:.4}  wF {:.4}  kappa {:.4}",
                run.scheme.name(),
                cr.classifier.name(),
                cr.chosen_bands
                    .iter()
                    .map(|b| b.name())
                    .collect::<Vec<_>>()
                    .join("+"),
                cr.fusion.dataset.n_features(),
                cr.evaluation.metrics.accuracy,
                cr.evaluation.metrics.weighted_f1,
                cr.evaluation.metrics.kappa
            );
        }
    }
    println!("reports written to {}", cfg.output_dir.display());
    Ok(())
}
