//! Leave-one-out cross-validation, classification metrics and the
//! modality-combination sweep.

use crate::classify::{train, ClassifierKind, ClassifierSpec};
use crate::data::{LabelScheme, LabeledDataset, Modality, StressLevel};
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::select::{fuse_early, fuse_late, FusionMode};
use serde::{Deserialize, Serialize};

/// Confusion counts; rows are actual classes, columns predicted, both in
/// canonical class order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<StressLevel>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn zeros(classes: Vec<StressLevel>) -> Self {
        let k = classes.len();
        ConfusionMatrix {
            classes,
            counts: vec![vec![0; k]; k],
        }
    }

    pub fn from_counts(classes: Vec<StressLevel>, counts: Vec<Vec<u64>>) -> Result<Self> {
        if counts.len() != classes.len() || counts.iter().any(|r| r.len() != classes.len()) {
            return Err(Error::DatasetMismatch(format!(
                "confusion matrix must be {k} x {k}",
                k = classes.len()
            )));
        }
        Ok(ConfusionMatrix { classes, counts })
    }

    pub fn record(&mut self, actual: StressLevel, predicted: StressLevel) -> Result<()> {
        let a = self.class_index(actual)?;
        let p = self.class_index(predicted)?;
        self.counts[a][p] += 1;
        Ok(())
    }

    fn class_index(&self, class: StressLevel) -> Result<usize> {
        self.classes
            .iter()
            .position(|c| *c == class)
            .ok_or_else(|| Error::DatasetMismatch(format!("class {class} not in matrix")))
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.classes.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        (0..self.classes.len())
            .map(|c| self.counts.iter().map(|r| r[c]).sum())
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("actual\\predicted");
        for c in &self.classes {
            out.push(',');
            out.push_str(c.name());
        }
        out.push('\n');
        for (i, row) in self.counts.iter().enumerate() {
            out.push_str(self.classes[i].name());
            for v in row {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Per-class precision/recall/F1. `*_defined` is false when the denominator
/// was zero; the rate is then reported as 0 rather than dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: StressLevel,
    pub support: u64,
    pub precision: f64,
    pub precision_defined: bool,
    pub recall: f64,
    pub recall_defined: bool,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub per_class: Vec<ClassMetrics>,
    /// Support-weighted mean of per-class F1 (toolkit-style F measure).
    pub weighted_f1: f64,
    /// Unweighted mean of per-class F1, reported alongside.
    pub macro_f1: f64,
    /// Cohen's kappa, exactly 1 when the off-diagonal is empty.
    pub kappa: f64,
}

/// Compute all metrics from a confusion matrix.
pub fn metrics(cm: &ConfusionMatrix) -> Result<Metrics> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::Stats("empty confusion matrix".into()));
    }
    let total_f = total as f64;
    let rows = cm.row_sums();
    let cols = cm.col_sums();
    let k = cm.classes.len();

    let mut per_class = Vec::with_capacity(k);
    for c in 0..k {
        let diag = cm.counts[c][c] as f64;
        let (precision, precision_defined) = if cols[c] > 0 {
            (diag / cols[c] as f64, true)
        } else {
            (0.0, false)
        };
        let (recall, recall_defined) = if rows[c] > 0 {
            (diag / rows[c] as f64, true)
        } else {
            (0.0, false)
        };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        per_class.push(ClassMetrics {
            class: cm.classes[c],
            support: rows[c],
            precision,
            precision_defined,
            recall,
            recall_defined,
            f1,
        });
    }

    let accuracy = cm.trace() as f64 / total_f;
    let weighted_f1 = per_class
        .iter()
        .map(|m| m.support as f64 / total_f * m.f1)
        .sum();
    let macro_f1 = per_class.iter().map(|m| m.f1).sum::<f64>() / k as f64;

    let off_diagonal: u64 = total - cm.trace();
    let kappa = if off_diagonal == 0 {
        1.0
    } else {
        let pe: f64 = (0..k)
            .map(|c| rows[c] as f64 * cols[c] as f64)
            .sum::<f64>()
            / (total_f * total_f);
        (accuracy - pe) / (1.0 - pe)
    };

    Ok(Metrics {
        accuracy,
        per_class,
        weighted_f1,
        macro_f1,
        kappa,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectPrediction {
    pub subject_id: String,
    pub actual: StressLevel,
    pub predicted: StressLevel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub confusion: ConfusionMatrix,
    pub metrics: Metrics,
    pub predictions: Vec<SubjectPrediction>,
    /// Folds whose training failed, with the error text; they are excluded
    /// from the confusion matrix.
    pub failed_folds: Vec<(String, String)>,
}

impl EvaluationReport {
    pub fn accuracy(&self) -> f64 {
        self.metrics.accuracy
    }

    /// Plain-text rendering (confusion matrix plus the headline numbers).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "accuracy {:.4}  weighted-F {:.4}  macro-F {:.4}  kappa {:.4}\n",
            self.metrics.accuracy, self.metrics.weighted_f1, self.metrics.macro_f1, self.metrics.kappa
        ));
        out.push_str("confusion (rows actual, cols predicted):\n");
        for (i, row) in self.confusion.counts.iter().enumerate() {
            out.push_str(&format!("  {:>16}", self.confusion.classes[i].name()));
            for v in row {
                out.push_str(&format!(" {v:>5}"));
            }
            out.push('\n');
        }
        for m in &self.metrics.per_class {
            out.push_str(&format!(
                "  {:>16}: precision {:.3}{} recall {:.3}{} f1 {:.3}\n",
                m.class.name(),
                m.precision,
                if m.precision_defined { "" } else { "*" },
                m.recall,
                if m.recall_defined { "" } else { "*" },
                m.f1
            ));
        }
        if !self.failed_folds.is_empty() {
            out.push_str(&format!("  failed folds: {}\n", self.failed_folds.len()));
        }
        out
    }
}

/// Leave-one-out evaluation of a classifier spec. Fold `i` trains on all
/// other subjects with a seed derived from `(seed, i)` and predicts subject
/// `i`; folds run in parallel and aggregate in subject order.
pub fn loocv(dataset: &LabeledDataset, spec: &ClassifierSpec, seed: u64) -> Result<EvaluationReport> {
    let spec = spec.clone();
    loocv_with(dataset, seed, move |train_set, test_row, fold_seed| {
        let fold_spec = spec.with_seed(fold_seed);
        let model = train(&fold_spec, train_set)?;
        Ok(model.predict_row(test_row)?.0)
    })
}

/// LOOCV over an arbitrary fit-and-predict closure (used by tests to run
/// stub classifiers through the same fold plumbing).
pub fn loocv_with<F>(dataset: &LabeledDataset, seed: u64, fit_predict: F) -> Result<EvaluationReport>
where
    F: Fn(&LabeledDataset, &[f64], u64) -> Result<StressLevel> + Sync + Send,
{
    let n = dataset.n_subjects();
    if n < 2 {
        return Err(Error::Stats(format!(
            "LOOCV needs at least 2 subjects, got {n}"
        )));
    }
    if dataset.classes_present().len() < 2 {
        return Err(Error::Stats("LOOCV needs at least 2 classes present".into()));
    }

    let outcomes = crate::par_map((0..n).collect::<Vec<_>>(), |i| {
        let train_set = dataset.without_row(i);
        let fold_seed = derive_seed(seed, &[i as u64]);
        fit_predict(&train_set, &dataset.rows[i], fold_seed)
    });

    let mut confusion = ConfusionMatrix::zeros(dataset.scheme.classes().to_vec());
    let mut predictions = Vec::with_capacity(n);
    let mut failed_folds = Vec::new();
    for (i, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(predicted) => {
                confusion.record(dataset.labels[i], predicted)?;
                predictions.push(SubjectPrediction {
                    subject_id: dataset.subject_ids[i].clone(),
                    actual: dataset.labels[i],
                    predicted,
                });
            }
            Err(e) => failed_folds.push((dataset.subject_ids[i].clone(), e.to_string())),
        }
    }

    Ok(EvaluationReport {
        metrics: metrics(&confusion)?,
        confusion,
        predictions,
        failed_folds,
    })
}

/// One cell of the modality sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub scheme: LabelScheme,
    pub modalities: Vec<Modality>,
    pub classifier: ClassifierKind,
    pub outcome: SweepOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SweepOutcome {
    Ok {
        accuracy: f64,
        weighted_f1: f64,
        kappa: f64,
        /// Fused feature count fed to the classifier.
        n_features: usize,
    },
    Failed(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub fusion: FusionMode,
    pub cells: Vec<SweepCell>,
}

impl SweepTable {
    pub fn cell(
        &self,
        scheme: LabelScheme,
        modalities: &[Modality],
        classifier: ClassifierKind,
    ) -> Option<&SweepCell> {
        self.cells.iter().find(|c| {
            c.scheme == scheme && c.modalities == modalities && c.classifier == classifier
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("scheme,modalities,classifier,accuracy,weighted_f1,kappa,n_features,error\n");
        for c in &self.cells {
            let mods = c
                .modalities
                .iter()
                .map(|m| m.name())
                .collect::<Vec<_>>()
                .join("+");
            match &c.outcome {
                SweepOutcome::Ok {
                    accuracy,
                    weighted_f1,
                    kappa,
                    n_features,
                } => out.push_str(&format!(
                    "{},{},{},{:.4},{:.4},{:.4},{},\n",
                    c.scheme, mods, c.classifier, accuracy, weighted_f1, kappa, n_features
                )),
                SweepOutcome::Failed(e) => out.push_str(&format!(
                    "{},{},{},,,,,\"{}\"\n",
                    c.scheme,
                    mods,
                    c.classifier,
                    e.replace('"', "'")
                )),
            }
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{:<6} {:<14} {:<4} {:>8} {:>8} {:>8}\n",
            "scheme", "modalities", "clf", "acc", "wF1", "kappa"
        );
        for c in &self.cells {
            let mods = c
                .modalities
                .iter()
                .map(|m| m.name())
                .collect::<Vec<_>>()
                .join("+");
            match &c.outcome {
                SweepOutcome::Ok {
                    accuracy,
                    weighted_f1,
                    kappa,
                    ..
                } => out.push_str(&format!(
                    "{:<6} {:<14} {:<4} {:>8.4} {:>8.4} {:>8.4}\n",
                    c.scheme.name(),
                    mods,
                    c.classifier.name(),
                    accuracy,
                    weighted_f1,
                    kappa
                )),
                SweepOutcome::Failed(e) => out.push_str(&format!(
                    "{:<6} {:<14} {:<4} failed: {e}\n",
                    c.scheme.name(),
                    mods,
                    c.classifier.name()
                )),
            }
        }
        out
    }
}

/// The seven non-empty modality combinations, single modalities first.
pub fn modality_combinations() -> Vec<Vec<Modality>> {
    let mut combos = Vec::new();
    for mask in 1u8..8 {
        let combo: Vec<Modality> = Modality::ALL
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, m)| *m)
            .collect();
        combos.push(combo);
    }
    combos.sort_by_key(|c| c.len());
    combos
}

/// Per-scheme per-modality feature datasets feeding the sweep. Band
/// selection is classifier-dependent, so each classifier brings its own
/// band-restricted EEG view.
#[derive(Debug, Clone)]
pub struct SweepInput {
    pub scheme: LabelScheme,
    pub eeg_by_classifier: Vec<(ClassifierKind, LabeledDataset)>,
    pub gsr: LabeledDataset,
    pub ppg: LabeledDataset,
}

impl SweepInput {
    fn dataset_for(&self, m: Modality, kind: ClassifierKind) -> Result<&LabeledDataset> {
        match m {
            Modality::Eeg => self
                .eeg_by_classifier
                .iter()
                .find(|(k, _)| *k == kind)
                .map(|(_, d)| d)
                .ok_or_else(|| {
                    Error::DatasetMismatch(format!("no EEG dataset prepared for {kind}"))
                }),
            Modality::Gsr => Ok(&self.gsr),
            Modality::Ppg => Ok(&self.ppg),
        }
    }
}

/// Evaluate every (modality combination × classifier × scheme) cell: fuse
/// the combination's features with the cell's classifier in the loop, then
/// run LOOCV. Cell failures are recorded without aborting the sweep.
pub fn modality_sweep(
    inputs: &[SweepInput],
    specs: &[ClassifierSpec],
    fusion: FusionMode,
    seed: u64,
) -> SweepTable {
    let combos = modality_combinations();
    let mut jobs = Vec::new();
    for (si, _input) in inputs.iter().enumerate() {
        for (mi, combo) in combos.iter().enumerate() {
            for (ki, spec) in specs.iter().enumerate() {
                jobs.push((si, mi, ki, combo.clone(), spec.clone()));
            }
        }
    }

    let cells = crate::par_map(jobs, |(si, mi, ki, combo, spec)| {
        let input = &inputs[si];
        let cell_seed = derive_seed(seed, &[si as u64, mi as u64, ki as u64]);
        let outcome = evaluate_cell(input, &combo, &spec, fusion, cell_seed);
        SweepCell {
            scheme: input.scheme,
            modalities: combo,
            classifier: spec.kind(),
            outcome: match outcome {
                Ok(o) => o,
                Err(e) => SweepOutcome::Failed(e.to_string()),
            },
        }
    });

    SweepTable { fusion, cells }
}

fn evaluate_cell(
    input: &SweepInput,
    combo: &[Modality],
    spec: &ClassifierSpec,
    fusion: FusionMode,
    seed: u64,
) -> Result<SweepOutcome> {
    let parts: Vec<&LabeledDataset> = combo
        .iter()
        .map(|m| input.dataset_for(*m, spec.kind()))
        .collect::<Result<Vec<_>>>()?;
    let fused = match fusion {
        FusionMode::Late => fuse_late(&parts, spec, seed)?.dataset,
        FusionMode::Early => fuse_early(&parts, spec, seed)?.dataset,
    };
    if fused.n_features() == 0 {
        return Ok(SweepOutcome::Failed(
            "selection kept no features for this combination".into(),
        ));
    }
    let report = loocv(&fused, spec, derive_seed(seed, &[b'e' as u64]))?;
    Ok(SweepOutcome::Ok {
        accuracy: report.metrics.accuracy,
        weighted_f1: report.metrics.weighted_f1,
        kappa: report.metrics.kappa,
        n_features: fused.n_features(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{FeatureDef, Modality};

    fn two_class(counts: [[u64; 2]; 2]) -> ConfusionMatrix {
        ConfusionMatrix::from_counts(
            vec![StressLevel::NonStressed, StressLevel::Stressed],
            counts.iter().map(|r| r.to_vec()).collect(),
        )
        .unwrap()
    }

    fn three_class(counts: [[u64; 3]; 3]) -> ConfusionMatrix {
        ConfusionMatrix::from_counts(
            vec![
                StressLevel::NonStressed,
                StressLevel::MildlyStressed,
                StressLevel::Stressed,
            ],
            counts.iter().map(|r| r.to_vec()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn published_two_class_matrix_metrics() {
        let m = metrics(&two_class([[21, 1], [1, 17]])).unwrap();
        assert!((m.accuracy - 0.95).abs() < 1e-12);
        assert!((m.per_class[0].precision - 21.0 / 22.0).abs() < 1e-12);
        assert!((m.per_class[1].precision - 17.0 / 18.0).abs() < 1e-12);
        assert!((m.per_class[0].recall - 21.0 / 22.0).abs() < 1e-12);
        assert!((m.per_class[1].recall - 17.0 / 18.0).abs() < 1e-12);
        // row sums match the published supports
        let cm = two_class([[21, 1], [1, 17]]);
        assert_eq!(cm.row_sums(), vec![22, 18]);
        // Cohen's kappa from the standard formula
        assert!((m.kappa - (0.95 - 0.505) / 0.495).abs() < 1e-12, "{}", m.kappa);
        // weighted vs macro F
        assert!((m.weighted_f1 - 0.95).abs() < 1e-3);
        assert!((m.macro_f1 - 0.9495).abs() < 1e-3);
    }

    #[test]
    fn published_three_class_matrix_metrics() {
        let m = metrics(&three_class([[10, 1, 1], [2, 15, 2], [1, 2, 6]])).unwrap();
        assert!((m.accuracy - 0.775).abs() < 1e-12);
        let precisions: Vec<f64> = m.per_class.iter().map(|c| c.precision).collect();
        assert!((precisions[0] - 10.0 / 13.0).abs() < 1e-12);
        assert!((precisions[1] - 15.0 / 18.0).abs() < 1e-12);
        assert!((precisions[2] - 6.0 / 9.0).abs() < 1e-12);
        let recalls: Vec<f64> = m.per_class.iter().map(|c| c.recall).collect();
        assert!((recalls[0] - 10.0 / 12.0).abs() < 1e-12);
        assert!((recalls[1] - 15.0 / 19.0).abs() < 1e-12);
        assert!((recalls[2] - 6.0 / 9.0).abs() < 1e-12);
        let cm = three_class([[10, 1, 1], [2, 15, 2], [1, 2, 6]]);
        assert_eq!(cm.row_sums(), vec![12, 19, 9]);
    }

    #[test]
    fn diagonal_matrix_is_perfect() {
        let m = metrics(&three_class([[5, 0, 0], [0, 7, 0], [0, 0, 3]])).unwrap();
        assert_eq!(m.accuracy, 1.0);
        assert_eq!(m.kappa, 1.0);
        assert_eq!(m.weighted_f1, 1.0);
        assert!(m.per_class.iter().all(|c| c.precision == 1.0 && c.recall == 1.0));
    }

    #[test]
    fn empty_predicted_column_flags_precision() {
        let m = metrics(&two_class([[10, 0], [5, 0]])).unwrap();
        let stressed = &m.per_class[1];
        assert!(!stressed.precision_defined);
        assert_eq!(stressed.precision, 0.0);
        assert!((-1.0..=1.0).contains(&m.kappa));
    }

    #[test]
    fn kappa_is_one_iff_off_diagonal_is_zero() {
        // everything in one diagonal cell: degenerate but perfect
        let m = metrics(&two_class([[40, 0], [0, 0]])).unwrap();
        assert_eq!(m.kappa, 1.0);
        let m = metrics(&two_class([[39, 1], [0, 0]])).unwrap();
        assert!(m.kappa < 1.0);
    }

    #[test]
    fn metrics_commute_with_class_relabeling() {
        let a = metrics(&three_class([[10, 1, 1], [2, 15, 2], [1, 2, 6]])).unwrap();
        // reverse class order (permute rows and columns identically)
        let rev = ConfusionMatrix::from_counts(
            vec![
                StressLevel::Stressed,
                StressLevel::MildlyStressed,
                StressLevel::NonStressed,
            ],
            vec![vec![6, 2, 1], vec![2, 15, 2], vec![1, 1, 10]],
        )
        .unwrap();
        let b = metrics(&rev).unwrap();
        assert_eq!(a.accuracy, b.accuracy);
        assert!((a.kappa - b.kappa).abs() < 1e-12);
        assert!((a.weighted_f1 - b.weighted_f1).abs() < 1e-12);
        for (x, y) in a.per_class.iter().zip(b.per_class.iter().rev()) {
            assert!((x.f1 - y.f1).abs() < 1e-12);
        }
    }

    fn toy_dataset(labels: Vec<StressLevel>, informative: bool) -> LabeledDataset {
        let rows: Vec<Vec<f64>> = labels
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let v = if informative {
                    match l {
                        StressLevel::NonStressed => -1.0,
                        StressLevel::MildlyStressed => 0.0,
                        StressLevel::Stressed => 1.0,
                    }
                } else {
                    (i % 5) as f64
                };
                vec![v + 0.001 * i as f64]
            })
            .collect();
        LabeledDataset::new(
            (0..labels.len()).map(|i| format!("s{i}")).collect(),
            vec![FeatureDef::new("f0", Modality::Gsr, None)],
            rows,
            labels.clone(),
            if labels.contains(&StressLevel::MildlyStressed) {
                LabelScheme::ThreeClass
            } else {
                LabelScheme::TwoClass
            },
        )
        .unwrap()
    }

    #[test]
    fn majority_stub_reproduces_the_loocv_majority_rate() {
        // 7 non-stressed vs 5 stressed. Leaving out a non-stressed subject
        // keeps non-stressed the training majority (6 vs 5): correct. Leaving
        // out a stressed one: wrong. Accuracy = 7/12.
        let labels: Vec<StressLevel> = (0..12)
            .map(|i| {
                if i < 7 {
                    StressLevel::NonStressed
                } else {
                    StressLevel::Stressed
                }
            })
            .collect();
        let data = toy_dataset(labels, false);
        let report = loocv_with(&data, 0, |train_set, _row, _seed| {
            let classes = train_set.classes_present();
            let best = classes
                .iter()
                .max_by_key(|c| train_set.labels.iter().filter(|l| l == c).count())
                .copied()
                .unwrap();
            Ok(best)
        })
        .unwrap();
        assert!((report.metrics.accuracy - 7.0 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn separable_dataset_scores_perfectly_with_nb() {
        let labels: Vec<StressLevel> = (0..10)
            .map(|i| {
                if i % 2 == 0 {
                    StressLevel::NonStressed
                } else {
                    StressLevel::Stressed
                }
            })
            .collect();
        let data = toy_dataset(labels, true);
        let spec = ClassifierSpec::default_for(ClassifierKind::Nb);
        let report = loocv(&data, &spec, 3).unwrap();
        assert_eq!(report.metrics.accuracy, 1.0);
        assert!(report.failed_folds.is_empty());
    }

    #[test]
    fn loocv_is_deterministic_given_the_seed() {
        let labels: Vec<StressLevel> = (0..8)
            .map(|i| {
                if i % 2 == 0 {
                    StressLevel::NonStressed
                } else {
                    StressLevel::Stressed
                }
            })
            .collect();
        let data = toy_dataset(labels, true);
        let spec = ClassifierSpec::Mlp(crate::classify::MlpConfig {
            hidden_layers: vec![4, 3, 3, 2],
            epochs: 60,
            ..Default::default()
        });
        let a = loocv(&data, &spec, 11).unwrap();
        let b = loocv(&data, &spec, 11).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tiny_datasets_are_rejected() {
        let data = toy_dataset(vec![StressLevel::NonStressed], false);
        assert!(loocv_with(&data, 0, |_, _, _| Ok(StressLevel::NonStressed)).is_err());
    }

    #[test]
    fn single_class_training_folds_are_reported_not_fatal() {
        // leaving out the only stressed subject makes its training fold
        // single-class: that fold errors and is excluded, the rest survive
        let data = toy_dataset(
            vec![
                StressLevel::NonStressed,
                StressLevel::NonStressed,
                StressLevel::NonStressed,
                StressLevel::Stressed,
            ],
            true,
        );
        let spec = ClassifierSpec::default_for(ClassifierKind::Nb);
        let report = loocv(&data, &spec, 1).unwrap();
        assert_eq!(report.failed_folds.len(), 1);
        assert_eq!(report.failed_folds[0].0, "s3");
        assert_eq!(report.predictions.len(), 3);
        assert_eq!(report.confusion.total(), 3);
    }

    #[test]
    fn sweep_grid_has_42_cells_and_isolates_failures() {
        assert_eq!(modality_combinations().len(), 7);
        // 7 combos x 3 classifiers x 2 schemes = 42 (counted, not run, here;
        // the integration suite runs the full grid)
        assert_eq!(modality_combinations().len() * 3 * 2, 42);
    }
}
