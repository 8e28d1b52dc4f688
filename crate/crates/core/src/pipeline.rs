//! End-to-end orchestration: cohort records in, reports out.
//!
//! The CLI front end maps its configuration file onto [`PipelineConfig`] and
//! writes the returned artifacts to disk; tests and the browser demo call
//! the same functions directly.

use crate::classify::{ClassifierKind, ClassifierSpec, MlpConfig, NbConfig, SvmConfig};
use crate::data::{
    Band, CohortStats, FeatureDef, LabelScheme, LabeledDataset, Modality, StressLevel,
    SubjectRecord,
};
use crate::error::{Error, Result};
use crate::evaluate::{loocv, modality_sweep, EvaluationReport, SweepInput, SweepTable};
use crate::features::{assemble_subject_features, savitzky_golay_means, FeatureConfig};
use crate::rng::derive_seed;
use crate::select::{band_selection, fuse_early, fuse_late, Fusion, FusionMode, SelectionChoice, SelectionResult};
use crate::stats::{significance_report, MeasureSignificance};
use serde::{Deserialize, Serialize};

/// Library-level pipeline settings (the CLI config file maps onto this).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub features: FeatureConfig,
    pub band_iterations: usize,
    pub fusion: FusionMode,
    pub mlp: MlpConfig,
    pub svm: SvmConfig,
    pub nb: NbConfig,
    pub master_seed: u64,
    /// Pin labeling to fixed cohort parameters instead of deriving them
    /// from the input scores.
    pub pinned_stats: Option<CohortStats>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            features: FeatureConfig::default(),
            // Band selection retrains the MLP for every candidate subset;
            // three repeats already average out init noise at desk scale.
            band_iterations: 3,
            fusion: FusionMode::Late,
            mlp: MlpConfig::default(),
            svm: SvmConfig::default(),
            nb: NbConfig::default(),
            master_seed: 7,
            pinned_stats: None,
        }
    }
}

impl PipelineConfig {
    pub fn spec_for(&self, kind: ClassifierKind) -> ClassifierSpec {
        match kind {
            ClassifierKind::Mlp => ClassifierSpec::Mlp(self.mlp.clone()),
            ClassifierKind::Svm => ClassifierSpec::Svm(self.svm.clone()),
            ClassifierKind::Nb => ClassifierSpec::Nb(self.nb.clone()),
        }
    }

    fn labels(&self, scores: &[u8], scheme: LabelScheme) -> Result<Vec<StressLevel>> {
        match (self.pinned_stats, scheme) {
            (Some(stats), LabelScheme::TwoClass) => {
                crate::data::label_two_class_pinned(scores, stats.mu)
            }
            (Some(stats), LabelScheme::ThreeClass) => {
                crate::data::label_three_class_pinned(scores, stats)
            }
            (None, s) => crate::data::label_cohort(scores, s),
        }
    }
}

/// Per-subject extraction products: the 58-entry feature vector plus the
/// signal means used by the significance analysis.
#[derive(Debug, Clone)]
struct SubjectExtraction {
    features: Vec<f64>,
    defs: Vec<FeatureDef>,
    gsr_mean_kohm: f64,
    ppg_mean: f64,
}

fn extract_subject(record: &SubjectRecord, cfg: &FeatureConfig) -> Result<SubjectExtraction> {
    let fv = assemble_subject_features(record, cfg)?;
    let (gsr_mean_kohm, ppg_mean) = savitzky_golay_means(record, &cfg.sg)
        .map_err(|e| e.for_subject(&record.subject_id))?;
    Ok(SubjectExtraction {
        features: fv.values().to_vec(),
        defs: fv.defs().to_vec(),
        gsr_mean_kohm,
        ppg_mean,
    })
}

/// Feature matrix plus the subject-level measures table for one scheme.
#[derive(Debug, Clone)]
pub struct CohortFeatures {
    /// All 58 features, labeled for `scheme`.
    pub dataset: LabeledDataset,
    /// The 22 significance measures: per-channel band powers, GSR mean
    /// resistance, PPG mean.
    pub measures: LabeledDataset,
}

/// Extract features for a cohort and label them under one scheme.
pub fn cohort_features(
    records: &[SubjectRecord],
    scheme: LabelScheme,
    cfg: &PipelineConfig,
) -> Result<CohortFeatures> {
    if records.is_empty() {
        return Err(Error::EmptyCohort);
    }
    let scores: Vec<u8> = records.iter().map(|r| r.pss_score).collect();
    let labels = cfg.labels(&scores, scheme)?;
    let extractions = crate::par_map(records.iter().collect::<Vec<_>>(), |r| {
        extract_subject(r, &cfg.features)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let defs = extractions[0].defs.clone();
    for e in &extractions {
        if e.defs != defs {
            return Err(Error::DatasetMismatch(
                "feature definitions differ between subjects".into(),
            ));
        }
    }
    let subject_ids: Vec<String> = records.iter().map(|r| r.subject_id.clone()).collect();
    let dataset = LabeledDataset::new(
        subject_ids.clone(),
        defs.clone(),
        extractions.iter().map(|e| e.features.clone()).collect(),
        labels.clone(),
        scheme,
    )?;

    // Measures table: the 20 mean band powers plus the two peripheral means.
    let pmean_idx: Vec<usize> = defs
        .iter()
        .enumerate()
        .filter(|(_, d)| d.name.starts_with("pmean_"))
        .map(|(i, _)| i)
        .collect();
    let mut measure_defs: Vec<FeatureDef> = pmean_idx
        .iter()
        .map(|&i| defs[i].clone())
        .collect();
    measure_defs.push(FeatureDef::new("gsr_mean_resistance", Modality::Gsr, None));
    measure_defs.push(FeatureDef::new("ppg_mean", Modality::Ppg, None));
    let measure_rows: Vec<Vec<f64>> = extractions
        .iter()
        .map(|e| {
            let mut row: Vec<f64> = pmean_idx.iter().map(|&i| e.features[i]).collect();
            row.push(e.gsr_mean_kohm);
            row.push(e.ppg_mean);
            row
        })
        .collect();
    let measures = LabeledDataset::new(subject_ids, measure_defs, measure_rows, labels, scheme)?;

    Ok(CohortFeatures { dataset, measures })
}

/// Everything the pipeline produced for one (scheme, classifier) pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassifierRun {
    pub classifier: ClassifierKind,
    pub band_selection: SelectionResult,
    pub chosen_bands: Vec<Band>,
    pub fusion: Fusion,
    pub evaluation: EvaluationReport,
}

/// Everything produced for one labeling scheme.
#[derive(Debug, Clone)]
pub struct SchemeRun {
    pub scheme: LabelScheme,
    pub features: CohortFeatures,
    pub significance: Vec<MeasureSignificance>,
    pub runs: Vec<ClassifierRun>,
}

/// Split the full feature set into per-modality views.
pub fn modality_views(dataset: &LabeledDataset) -> (LabeledDataset, LabeledDataset, LabeledDataset) {
    (
        dataset.restrict(|d| d.modality == Modality::Eeg),
        dataset.restrict(|d| d.modality == Modality::Gsr),
        dataset.restrict(|d| d.modality == Modality::Ppg),
    )
}

/// Band-select EEG features for a classifier and return the restricted view.
pub fn banded_eeg(
    eeg: &LabeledDataset,
    spec: &ClassifierSpec,
    cfg: &PipelineConfig,
    seed: u64,
) -> Result<(SelectionResult, Vec<Band>, LabeledDataset)> {
    let selection = band_selection(eeg, spec, cfg.band_iterations, seed)?;
    let bands = match &selection.chosen {
        SelectionChoice::Bands(b) => b.clone(),
        SelectionChoice::Features(_) => unreachable!("band_selection returns bands"),
    };
    let restricted = eeg.restrict(|d| d.band.is_some_and(|b| bands.contains(&b)));
    Ok((selection, bands, restricted))
}

/// Shared per-scheme preparation: features, significance, modality views
/// and the per-classifier band-restricted EEG datasets.
pub struct SchemePrep {
    pub scheme: LabelScheme,
    pub features: CohortFeatures,
    pub significance: Vec<MeasureSignificance>,
    pub gsr: LabeledDataset,
    pub ppg: LabeledDataset,
    pub banded: Vec<(ClassifierKind, SelectionResult, Vec<Band>, LabeledDataset)>,
}

pub fn prepare_scheme(
    records: &[SubjectRecord],
    scheme: LabelScheme,
    cfg: &PipelineConfig,
    classifiers: &[ClassifierKind],
) -> Result<SchemePrep> {
    let features = cohort_features(records, scheme, cfg)?;
    let significance = significance_report(&features.measures)?;
    let (eeg, gsr, ppg) = modality_views(&features.dataset);
    let mut banded = Vec::with_capacity(classifiers.len());
    for kind in classifiers {
        let spec = cfg.spec_for(*kind);
        let seed = derive_seed(cfg.master_seed, &[b'b' as u64, scheme as u64, *kind as u64]);
        let (selection, bands, restricted) = banded_eeg(&eeg, &spec, cfg, seed)?;
        banded.push((*kind, selection, bands, restricted));
    }
    Ok(SchemePrep {
        scheme,
        features,
        significance,
        gsr,
        ppg,
        banded,
    })
}

impl SchemePrep {
    /// Fuse and evaluate one prepared classifier.
    pub fn classifier_run(&self, kind: ClassifierKind, cfg: &PipelineConfig) -> Result<ClassifierRun> {
        let (_, band_selection, chosen_bands, eeg_banded) = self
            .banded
            .iter()
            .find(|(k, ..)| *k == kind)
            .map(|(k, s, b, d)| (*k, s.clone(), b.clone(), d))
            .ok_or_else(|| Error::Config(format!("classifier {kind} was not prepared")))?;
        let spec = cfg.spec_for(kind);
        let scheme_word = self.scheme as u64;
        let fusion_seed = derive_seed(cfg.master_seed, &[b'f' as u64, scheme_word, kind as u64]);
        let parts = [eeg_banded, &self.gsr, &self.ppg];
        let fusion = match cfg.fusion {
            FusionMode::Late => fuse_late(&parts, &spec, fusion_seed)?,
            FusionMode::Early => fuse_early(&parts, &spec, fusion_seed)?,
        };
        let eval_seed = derive_seed(cfg.master_seed, &[b'v' as u64, scheme_word, kind as u64]);
        let evaluation = loocv(&fusion.dataset, &spec, eval_seed)?;
        Ok(ClassifierRun {
            classifier: kind,
            band_selection,
            chosen_bands,
            fusion,
            evaluation,
        })
    }

    pub fn into_sweep_input(self) -> SweepInput {
        SweepInput {
            scheme: self.scheme,
            eeg_by_classifier: self
                .banded
                .into_iter()
                .map(|(k, _, _, d)| (k, d))
                .collect(),
            gsr: self.gsr,
            ppg: self.ppg,
        }
    }

    fn to_scheme_run(&self, cfg: &PipelineConfig) -> Result<SchemeRun> {
        let runs = self
            .banded
            .iter()
            .map(|(k, ..)| self.classifier_run(*k, cfg))
            .collect::<Result<Vec<_>>>()?;
        Ok(SchemeRun {
            scheme: self.scheme,
            features: self.features.clone(),
            significance: self.significance.clone(),
            runs,
        })
    }
}

/// Run band selection, fusion and LOOCV for one scheme and a set of
/// classifiers.
pub fn run_scheme(
    records: &[SubjectRecord],
    scheme: LabelScheme,
    cfg: &PipelineConfig,
    classifiers: &[ClassifierKind],
) -> Result<SchemeRun> {
    prepare_scheme(records, scheme, cfg, classifiers)?.to_scheme_run(cfg)
}

/// Build the sweep inputs for one scheme (per-classifier banded EEG).
pub fn sweep_input(
    records: &[SubjectRecord],
    scheme: LabelScheme,
    cfg: &PipelineConfig,
    classifiers: &[ClassifierKind],
) -> Result<SweepInput> {
    Ok(prepare_scheme(records, scheme, cfg, classifiers)?.into_sweep_input())
}

/// The full pipeline outcome: both schemes plus the 42-cell sweep.
#[derive(Debug)]
pub struct FullRun {
    pub schemes: Vec<SchemeRun>,
    pub sweep: SweepTable,
}

/// Run everything: both schemes, all three classifiers, and the
/// modality-combination sweep. Feature extraction and band selection are
/// shared between the per-scheme reports and the sweep.
pub fn full_run(records: &[SubjectRecord], cfg: &PipelineConfig) -> Result<FullRun> {
    let classifiers = ClassifierKind::ALL;
    let mut schemes = Vec::new();
    let mut sweep_inputs = Vec::new();
    for scheme in [LabelScheme::TwoClass, LabelScheme::ThreeClass] {
        let prep = prepare_scheme(records, scheme, cfg, &classifiers)?;
        schemes.push(prep.to_scheme_run(cfg)?);
        sweep_inputs.push(prep.into_sweep_input());
    }
    let specs: Vec<ClassifierSpec> = classifiers.iter().map(|k| cfg.spec_for(*k)).collect();
    let sweep = modality_sweep(
        &sweep_inputs,
        &specs,
        cfg.fusion,
        derive_seed(cfg.master_seed, &[b's' as u64]),
    );
    Ok(FullRun { schemes, sweep })
}

/// Subject-level means used by the measures table (smoothed the same way the
/// features are).
pub fn peripheral_means(record: &SubjectRecord, cfg: &FeatureConfig) -> Result<(f64, f64)> {
    savitzky_golay_means(record, &cfg.sg)
}

// re-exported for CLI convenience
pub use crate::features::dataset_to_csv;
