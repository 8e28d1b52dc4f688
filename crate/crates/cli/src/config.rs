//! Flat key = value configuration file, `#` comments, unknown keys rejected.
//! Every key has a default; the generated run manifest flags which values
//! are artifact defaults (chosen for this implementation) as opposed to the
//! published method constants.

use anyhow::{anyhow, bail, Context, Result};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use stresslab::data::{CohortStats, LabelScheme};
use stresslab::pipeline::PipelineConfig;
use stresslab::preprocess::{Taper, VarianceThreshold};
use stresslab::select::FusionMode;

/// Which labeling schemes a command should run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeChoice {
    Two,
    Three,
    Both,
}

impl SchemeChoice {
    pub fn schemes(self) -> Vec<LabelScheme> {
        match self {
            SchemeChoice::Two => vec![LabelScheme::TwoClass],
            SchemeChoice::Three => vec![LabelScheme::ThreeClass],
            SchemeChoice::Both => vec![LabelScheme::TwoClass, LabelScheme::ThreeClass],
        }
    }
}

/// Full CLI configuration: pipeline settings plus I/O and execution knobs.
#[derive(Debug, Clone)]
pub struct CliConfig {
    pub input_dir: PathBuf,
    pub output_dir: PathBuf,
    pub threads: usize,
    pub scheme: SchemeChoice,
    pub classifier: stresslab::classify::ClassifierKind,
    pub pipeline: PipelineConfig,
}

impl Default for CliConfig {
    fn default() -> Self {
        CliConfig {
            input_dir: PathBuf::from("cohort"),
            output_dir: PathBuf::from("out"),
            threads: 0,
            scheme: SchemeChoice::Both,
            classifier: stresslab::classify::ClassifierKind::Mlp,
            pipeline: PipelineConfig::default(),
        }
    }
}

/// Keys whose default values are artifact choices rather than published
/// method constants; the run manifest flags them.
pub const ARTIFACT_DEFAULT_KEYS: &[&str] = &[
    "sg_window_samples",
    "stft_taper",
    "artifact_variance_fold",
    "artifact_kurtosis_threshold",
    "artifact_epoch_seconds",
    "entropy_bins",
    "band_iterations",
    "mlp_hidden_layers",
    "mlp_epochs",
    "svm_tolerance",
    "svm_max_passes",
    "nb_variance_floor",
    "master_seed",
];

pub fn parse_file(path: &Path) -> Result<CliConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    parse_str(&text).with_context(|| format!("in config file {}", path.display()))
}

pub fn parse_str(text: &str) -> Result<CliConfig> {
    let mut cfg = CliConfig::default();
    let mut artifact_variance_fold: Option<f64> = None;
    let mut artifact_variance_uv2: Option<f64> = None;

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected key = value, got '{line}'", lineno + 1))?;
        let key = key.trim();
        let value = value.trim();
        if value.is_empty() {
            continue; // blank value keeps the default
        }
        let ctx = |what: &str| format!("line {}: key '{key}': {what}", lineno + 1);

        match key {
            "input_dir" => cfg.input_dir = PathBuf::from(value),
            "output_dir" => cfg.output_dir = PathBuf::from(value),
            "threads" => cfg.threads = value.parse().map_err(|_| anyhow!(ctx("not an integer")))?,
            "label_scheme" => {
                cfg.scheme = match value {
                    "two" => SchemeChoice::Two,
                    "three" => SchemeChoice::Three,
                    "both" => SchemeChoice::Both,
                    _ => bail!(ctx("expected two | three | both")),
                }
            }
            "fusion_mode" => {
                cfg.pipeline.fusion = match value {
                    "lff" => FusionMode::Late,
                    "eff" => FusionMode::Early,
                    _ => bail!(ctx("expected lff | eff")),
                }
            }
            "classifier" => {
                cfg.classifier = parse_classifier(value).ok_or_else(|| anyhow!(ctx("expected mlp | svm | nb")))?
            }
            "master_seed" => {
                cfg.pipeline.master_seed =
                    value.parse().map_err(|_| anyhow!(ctx("not an integer")))?
            }
            "sg_window_samples" => {
                cfg.pipeline.features.sg.window_length =
                    value.parse().map_err(|_| anyhow!(ctx("not an integer")))?
            }
            "sg_poly_order" => {
                cfg.pipeline.features.sg.poly_order =
                    value.parse().map_err(|_| anyhow!(ctx("not an integer")))?
            }
            "stft_window_samples" => {
                cfg.pipeline.features.stft.window_size =
                    value.parse().map_err(|_| anyhow!(ctx("not an integer")))?
            }
            "stft_overlap_fraction" => {
                cfg.pipeline.features.stft.overlap_fraction =
                    value.parse().map_err(|_| anyhow!(ctx("not a number")))?
            }
            "stft_taper" => {
                cfg.pipeline.features.stft.taper = match value {
                    "hamming" => Taper::Hamming,
                    "rectangular" => Taper::Rectangular,
                    _ => bail!(ctx("expected hamming | rectangular")),
                }
            }
            "artifact_variance_fold" => {
                artifact_variance_fold =
                    Some(value.parse().map_err(|_| anyhow!(ctx("not a number")))?)
            }
            "artifact_variance_uv2" => {
                artifact_variance_uv2 =
                    Some(value.parse().map_err(|_| anyhow!(ctx("not a number")))?)
            }
            "artifact_kurtosis_threshold" => {
                cfg.pipeline.features.artifact.kurtosis_threshold =
                    value.parse().map_err(|_| anyhow!(ctx("not a number")))?
            }
            "artifact_epoch_seconds" => {
                cfg.pipeline.features.artifact.epoch_seconds =
                    value.parse().map_err(|_| anyhow!(ctx("not a number")))?
            }
            "entropy_bins" => {
                cfg.pipeline.features.entropy_bins =
                    value.parse().map_err(|_| anyhow!(ctx("not an integer")))?
            }
            "band_iterations" => {
                cfg.pipeline.band_iterations =
                    value.parse().map_err(|_| anyhow!(ctx("not an integer")))?
            }
            "mlp_hidden_layers" => {
                cfg.pipeline.mlp.hidden_layers = value
                    .split(',')
                    .map(|v| v.trim().parse::<usize>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| anyhow!(ctx("expected comma-separated widths")))?
            }
            "mlp_learning_rate" => {
                cfg.pipeline.mlp.learning_rate =
                    value.parse().map_err(|_| anyhow!(ctx("not a number")))?
            }
            "mlp_momentum" => {
                cfg.pipeline.mlp.momentum =
                    value.parse().map_err(|_| anyhow!(ctx("not a number")))?
            }
            "mlp_epochs" => {
                cfg.pipeline.mlp.epochs =
                    value.parse().map_err(|_| anyhow!(ctx("not an integer")))?
            }
            "svm_gamma" => {
                cfg.pipeline.svm.gamma = value.parse().map_err(|_| anyhow!(ctx("not a number")))?
            }
            "svm_c" => {
                cfg.pipeline.svm.c = value.parse().map_err(|_| anyhow!(ctx("not a number")))?
            }
            "svm_tolerance" => {
                cfg.pipeline.svm.tolerance =
                    value.parse().map_err(|_| anyhow!(ctx("not a number")))?
            }
            "svm_max_passes" => {
                cfg.pipeline.svm.max_passes =
                    value.parse().map_err(|_| anyhow!(ctx("not an integer")))?
            }
            "nb_variance_floor" => {
                cfg.pipeline.nb.variance_floor =
                    value.parse().map_err(|_| anyhow!(ctx("not a number")))?
            }
            "pin_mu" => {
                let mu: f64 = value.parse().map_err(|_| anyhow!(ctx("not a number")))?;
                let sigma = cfg.pipeline.pinned_stats.map_or(0.0, |s| s.sigma);
                cfg.pipeline.pinned_stats = Some(CohortStats { mu, sigma });
            }
            "pin_sigma" => {
                let sigma: f64 = value.parse().map_err(|_| anyhow!(ctx("not a number")))?;
                let mu = cfg.pipeline.pinned_stats.map_or(0.0, |s| s.mu);
                cfg.pipeline.pinned_stats = Some(CohortStats { mu, sigma });
            }
            other => bail!("line {}: unknown configuration key '{other}'", lineno + 1),
        }
    }

    match (artifact_variance_fold, artifact_variance_uv2) {
        (Some(_), Some(_)) => {
            bail!("artifact_variance_fold and artifact_variance_uv2 are mutually exclusive")
        }
        (Some(f), None) => {
            cfg.pipeline.features.artifact.variance = VarianceThreshold::MedianFold(f)
        }
        (None, Some(v)) => {
            cfg.pipeline.features.artifact.variance = VarianceThreshold::Absolute(v)
        }
        (None, None) => {}
    }
    Ok(cfg)
}

pub fn parse_classifier(value: &str) -> Option<stresslab::classify::ClassifierKind> {
    use stresslab::classify::ClassifierKind;
    match value {
        "mlp" => Some(ClassifierKind::Mlp),
        "svm" => Some(ClassifierKind::Svm),
        "nb" => Some(ClassifierKind::Nb),
        _ => None,
    }
}

/// Deterministic map of the effective configuration, for the run manifest
/// and the config hash. The thread cap is deliberately absent: results are
/// independent of it, so reports must be too.
pub fn config_map(cfg: &CliConfig) -> BTreeMap<String, String> {
    let p = &cfg.pipeline;
    let mut m = BTreeMap::new();
    m.insert("input_dir".into(), cfg.input_dir.display().to_string());
    m.insert("output_dir".into(), cfg.output_dir.display().to_string());
    m.insert(
        "label_scheme".into(),
        match cfg.scheme {
            SchemeChoice::Two => "two",
            SchemeChoice::Three => "three",
            SchemeChoice::Both => "both",
        }
        .into(),
    );
    m.insert("classifier".into(), cfg.classifier.name().into());
    m.insert("fusion_mode".into(), p.fusion.name().into());
    m.insert("master_seed".into(), p.master_seed.to_string());
    m.insert("sg_window_samples".into(), p.features.sg.window_length.to_string());
    m.insert("sg_poly_order".into(), p.features.sg.poly_order.to_string());
    m.insert("stft_window_samples".into(), p.features.stft.window_size.to_string());
    m.insert(
        "stft_overlap_fraction".into(),
        format!("{}", p.features.stft.overlap_fraction),
    );
    m.insert(
        "stft_taper".into(),
        match p.features.stft.taper {
            Taper::Hamming => "hamming",
            Taper::Rectangular => "rectangular",
        }
        .into(),
    );
    match p.features.artifact.variance {
        VarianceThreshold::MedianFold(f) => {
            m.insert("artifact_variance_fold".into(), format!("{f}"));
        }
        VarianceThreshold::Absolute(v) => {
            m.insert("artifact_variance_uv2".into(), format!("{v}"));
        }
    }
    m.insert(
        "artifact_kurtosis_threshold".into(),
        format!("{}", p.features.artifact.kurtosis_threshold),
    );
    m.insert(
        "artifact_epoch_seconds".into(),
        format!("{}", p.features.artifact.epoch_seconds),
    );
    m.insert("entropy_bins".into(), p.features.entropy_bins.to_string());
    m.insert("band_iterations".into(), p.band_iterations.to_string());
    m.insert(
        "mlp_hidden_layers".into(),
        p.mlp.hidden_layers
            .iter()
            .map(|w| w.to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    m.insert("mlp_learning_rate".into(), format!("{}", p.mlp.learning_rate));
    m.insert("mlp_momentum".into(), format!("{}", p.mlp.momentum));
    m.insert("mlp_epochs".into(), p.mlp.epochs.to_string());
    m.insert("svm_gamma".into(), format!("{}", p.svm.gamma));
    m.insert("svm_c".into(), format!("{}", p.svm.c));
    m.insert("svm_tolerance".into(), format!("{}", p.svm.tolerance));
    m.insert("svm_max_passes".into(), p.svm.max_passes.to_string());
    m.insert("nb_variance_floor".into(), format!("{}", p.nb.variance_floor));
    if let Some(stats) = p.pinned_stats {
        m.insert("pin_mu".into(), format!("{}", stats.mu));
        m.insert("pin_sigma".into(), format!("{}", stats.sigma));
    }
    m
}

/// FNV-1a over the sorted key=value pairs.
pub fn config_hash(map: &BTreeMap<String, String>) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for (k, v) in map {
        for byte in format!("{k}={v}\n").bytes() {
            hash ^= byte as u64;
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    format!("{hash:016x}")
}

// defaults referenced by the sample config written with `synth`
pub fn sample_config(input_dir: &Path, output_dir: &Path) -> String {
    format!(
        r#"# stresslab pipeline configuration
# Unknown keys are rejected. Blank values keep the defaults shown here.

input_dir = {}
output_dir = {}
threads = 0                        # 0 = use all cores
label_scheme = both                # two | three | both
fusion_mode = lff                  # lff (select per modality) | eff (select after concatenation)
classifier = mlp                   # default classifier for select-* commands
master_seed = 7

sg_window_samples = 11             # Savitzky-Golay window (odd)
sg_poly_order = 3
stft_window_samples = 256
stft_overlap_fraction = 0.90
stft_taper = hamming               # hamming | rectangular
artifact_variance_fold = 5.0       # reject epochs above this multiple of the median epoch variance
artifact_kurtosis_threshold = 8.0
artifact_epoch_seconds = 1.0
entropy_bins = 16

band_iterations = 3                # stochastic retrainings averaged per band subset
mlp_hidden_layers = 16,16,8,8
mlp_learning_rate = 0.3
mlp_momentum = 0.2
mlp_epochs = 500
svm_gamma = 0.01
svm_c = 10.0
svm_tolerance = 0.001
svm_max_passes = 10
nb_variance_floor = 1e-9

pin_mu =                           # optionally pin labeling to fixed cohort parameters
pin_sigma =                        # (e.g. 22 and 7.15)
"#,
        input_dir.display(),
        output_dir.display()
    )
}
