//! Core domain types and PSS-score-driven class labeling.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Sampling rate both acquisition devices run at. Inputs at any other rate
/// are rejected instead of resampled, since band-power estimates would shift.
pub const DEVICE_SAMPLE_RATE_HZ: f64 = 256.0;

/// Nominal recording length per subject (3 minutes).
pub const NOMINAL_DURATION_S: f64 = 180.0;

/// EEG channel names in canonical order (temporal left, frontal left,
/// frontal right, temporal right).
pub const EEG_CHANNELS: [&str; 4] = ["TP9", "AF7", "AF8", "TP10"];

/// Hemispheric asymmetry pairs, left channel first.
pub const ASYMMETRY_PAIRS: [(&str, &str); 2] = [("TP9", "TP10"), ("AF7", "AF8")];

/// One sampled signal with its rate and a channel identifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalChannel {
    pub name: String,
    pub sample_rate: f64,
    pub samples: Vec<f64>,
}

impl SignalChannel {
    pub fn new(name: impl Into<String>, sample_rate: f64, samples: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if !(sample_rate > 0.0) {
            return Err(Error::InvalidSignal(format!(
                "channel '{name}': sample rate must be positive, got {sample_rate}"
            )));
        }
        if samples.is_empty() {
            return Err(Error::EmptyRecording(name));
        }
        if let Some(bad) = samples.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidSignal(format!(
                "channel '{name}': non-finite sample {bad}"
            )));
        }
        Ok(SignalChannel {
            name,
            sample_rate,
            samples,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_seconds(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }
}

/// Four-channel EEG recording (TP9, AF7, AF8, TP10), equal lengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EegRecording {
    channels: Vec<SignalChannel>,
}

impl EegRecording {
    /// Channels must arrive in canonical order with matching lengths and rates.
    pub fn new(channels: Vec<SignalChannel>) -> Result<Self> {
        if channels.len() != EEG_CHANNELS.len() {
            return Err(Error::InvalidSignal(format!(
                "EEG needs exactly {} channels, got {}",
                EEG_CHANNELS.len(),
                channels.len()
            )));
        }
        for (ch, expected) in channels.iter().zip(EEG_CHANNELS) {
            if ch.name != expected {
                return Err(Error::InvalidSignal(format!(
                    "EEG channel '{}' where '{expected}' was expected",
                    ch.name
                )));
            }
        }
        let len = channels[0].len();
        let rate = channels[0].sample_rate;
        for ch in &channels {
            if ch.len() != len {
                return Err(Error::InvalidSignal(format!(
                    "EEG channel '{}' has {} samples, expected {len}",
                    ch.name,
                    ch.len()
                )));
            }
            if ch.sample_rate != rate {
                return Err(Error::InvalidSignal(format!(
                    "EEG channel '{}' at {} Hz, expected {rate} Hz",
                    ch.name, ch.sample_rate
                )));
            }
        }
        Ok(EegRecording { channels })
    }

    pub fn channels(&self) -> &[SignalChannel] {
        &self.channels
    }

    pub fn channel(&self, name: &str) -> Option<&SignalChannel> {
        self.channels.iter().find(|c| c.name == name)
    }

    pub fn sample_rate(&self) -> f64 {
        self.channels[0].sample_rate
    }

    pub fn samples_per_channel(&self) -> usize {
        self.channels[0].len()
    }

    pub fn duration_seconds(&self) -> f64 {
        self.channels[0].duration_seconds()
    }
}

/// EEG frequency bands with the fixed ranges used throughout the pipeline.
///
/// Note the deliberate 7–8 Hz gap between theta and alpha: spectral bins in
/// `[7, 8)` belong to no band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Band {
    Delta,
    Theta,
    Alpha,
    Beta,
    Gamma,
}

impl Band {
    pub const ALL: [Band; 5] = [Band::Delta, Band::Theta, Band::Alpha, Band::Beta, Band::Gamma];

    /// Half-open frequency range `[lo, hi)` in Hz.
    pub fn range_hz(self) -> (f64, f64) {
        match self {
            Band::Delta => (0.0, 4.0),
            Band::Theta => (4.0, 7.0),
            Band::Alpha => (8.0, 12.0),
            Band::Beta => (12.0, 30.0),
            Band::Gamma => (30.0, 50.0),
        }
    }

    pub fn contains_hz(self, f: f64) -> bool {
        let (lo, hi) = self.range_hz();
        f >= lo && f < hi
    }

    pub fn index(self) -> usize {
        Band::ALL.iter().position(|b| *b == self).unwrap()
    }

    pub fn name(self) -> &'static str {
        match self {
            Band::Delta => "delta",
            Band::Theta => "theta",
            Band::Alpha => "alpha",
            Band::Beta => "beta",
            Band::Gamma => "gamma",
        }
    }
}

impl std::fmt::Display for Band {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One participant: questionnaire score plus the three raw recordings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubjectRecord {
    pub subject_id: String,
    /// Perceived Stress Scale total, 0..=40.
    pub pss_score: u8,
    pub eeg: EegRecording,
    pub gsr: SignalChannel,
    pub ppg: SignalChannel,
}

impl SubjectRecord {
    pub fn new(
        subject_id: impl Into<String>,
        pss_score: u8,
        eeg: EegRecording,
        gsr: SignalChannel,
        ppg: SignalChannel,
    ) -> Result<Self> {
        if pss_score > 40 {
            return Err(Error::PssScoreOutOfRange(pss_score as i64));
        }
        Ok(SubjectRecord {
            subject_id: subject_id.into(),
            pss_score,
            eeg,
            gsr,
            ppg,
        })
    }
}

/// Two- or three-class labeling scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LabelScheme {
    TwoClass,
    ThreeClass,
}

impl LabelScheme {
    /// Classes of the scheme in canonical (increasing stress) order.
    pub fn classes(self) -> &'static [StressLevel] {
        match self {
            LabelScheme::TwoClass => &[StressLevel::NonStressed, StressLevel::Stressed],
            LabelScheme::ThreeClass => &[
                StressLevel::NonStressed,
                StressLevel::MildlyStressed,
                StressLevel::Stressed,
            ],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LabelScheme::TwoClass => "two",
            LabelScheme::ThreeClass => "three",
        }
    }
}

impl std::fmt::Display for LabelScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Stress class. `MildlyStressed` only occurs under [`LabelScheme::ThreeClass`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StressLevel {
    NonStressed,
    MildlyStressed,
    Stressed,
}

impl StressLevel {
    pub fn name(self) -> &'static str {
        match self {
            StressLevel::NonStressed => "non-stressed",
            StressLevel::MildlyStressed => "mildly-stressed",
            StressLevel::Stressed => "stressed",
        }
    }

    pub fn is_valid_for(self, scheme: LabelScheme) -> bool {
        scheme.classes().contains(&self)
    }
}

impl std::fmt::Display for StressLevel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Cohort statistics the three-class thresholds are computed from.
///
/// `sigma` is the population standard deviation. The published boundary
/// figures (18 and 26 for a mean of 22 and deviation 7.15) are reproduced by
/// rounding `mu - sigma/2` and `mu + sigma/2` to the nearest integer, so
/// that is the rule used here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CohortStats {
    pub mu: f64,
    pub sigma: f64,
}

impl CohortStats {
    pub fn from_scores(scores: &[u8]) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::EmptyCohort);
        }
        for &s in scores {
            if s > 40 {
                return Err(Error::PssScoreOutOfRange(s as i64));
            }
        }
        let n = scores.len() as f64;
        let mu = scores.iter().map(|&s| s as f64).sum::<f64>() / n;
        let var = scores
            .iter()
            .map(|&s| (s as f64 - mu).powi(2))
            .sum::<f64>()
            / n;
        Ok(CohortStats {
            mu,
            sigma: var.sqrt(),
        })
    }

    /// Three-class boundaries `(lo, hi)`: scores `<= lo` are non-stressed,
    /// `lo < s <= hi` mildly stressed, `> hi` stressed.
    pub fn three_class_boundaries(&self) -> (i64, i64) {
        let lo = (self.mu - self.sigma / 2.0).round() as i64;
        let hi = (self.mu + self.sigma / 2.0).round() as i64;
        (lo, hi)
    }
}

/// Two-class labeling: scores at or below the cohort mean are non-stressed,
/// scores above it stressed. The mean is the exact (unrounded) cohort mean.
pub fn label_two_class(scores: &[u8]) -> Result<Vec<StressLevel>> {
    let stats = CohortStats::from_scores(scores)?;
    Ok(scores
        .iter()
        .map(|&s| {
            if (s as f64) <= stats.mu {
                StressLevel::NonStressed
            } else {
                StressLevel::Stressed
            }
        })
        .collect())
}

/// Two-class labeling against a pinned cohort mean.
pub fn label_two_class_pinned(scores: &[u8], mu: f64) -> Result<Vec<StressLevel>> {
    if scores.is_empty() {
        return Err(Error::EmptyCohort);
    }
    for &s in scores {
        if s > 40 {
            return Err(Error::PssScoreOutOfRange(s as i64));
        }
    }
    Ok(scores
        .iter()
        .map(|&s| {
            if (s as f64) <= mu {
                StressLevel::NonStressed
            } else {
                StressLevel::Stressed
            }
        })
        .collect())
}

/// Three-class labeling from the cohort's own mean and deviation.
///
/// With a degenerate cohort (sigma = 0) both boundaries collapse to the
/// rounded mean, so every score at or below it is non-stressed and anything
/// above it stressed; the mildly stressed interval is empty.
pub fn label_three_class(scores: &[u8]) -> Result<Vec<StressLevel>> {
    let stats = CohortStats::from_scores(scores)?;
    Ok(label_three_with(scores, &stats))
}

/// Three-class labeling against pinned cohort parameters.
pub fn label_three_class_pinned(scores: &[u8], stats: CohortStats) -> Result<Vec<StressLevel>> {
    if scores.is_empty() {
        return Err(Error::EmptyCohort);
    }
    for &s in scores {
        if s > 40 {
            return Err(Error::PssScoreOutOfRange(s as i64));
        }
    }
    Ok(label_three_with(scores, &stats))
}

fn label_three_with(scores: &[u8], stats: &CohortStats) -> Vec<StressLevel> {
    let (lo, hi) = stats.three_class_boundaries();
    scores
        .iter()
        .map(|&s| {
            let s = s as i64;
            if s <= lo {
                StressLevel::NonStressed
            } else if s <= hi {
                StressLevel::MildlyStressed
            } else {
                StressLevel::Stressed
            }
        })
        .collect()
}

/// Label a cohort under either scheme.
pub fn label_cohort(scores: &[u8], scheme: LabelScheme) -> Result<Vec<StressLevel>> {
    match scheme {
        LabelScheme::TwoClass => label_two_class(scores),
        LabelScheme::ThreeClass => label_three_class(scores),
    }
}

/// Source modality of a feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Modality {
    Eeg,
    Gsr,
    Ppg,
}

impl Modality {
    pub const ALL: [Modality; 3] = [Modality::Eeg, Modality::Gsr, Modality::Ppg];

    pub fn name(self) -> &'static str {
        match self {
            Modality::Eeg => "eeg",
            Modality::Gsr => "gsr",
            Modality::Ppg => "ppg",
        }
    }
}

impl std::fmt::Display for Modality {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Feature name plus its provenance tags (modality, and band for EEG).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureDef {
    pub name: String,
    pub modality: Modality,
    pub band: Option<Band>,
}

impl FeatureDef {
    pub fn new(name: impl Into<String>, modality: Modality, band: Option<Band>) -> Self {
        FeatureDef {
            name: name.into(),
            modality,
            band,
        }
    }
}

/// Feature matrix for a cohort, with labels and subject ids row-aligned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    pub subject_ids: Vec<String>,
    pub feature_defs: Vec<FeatureDef>,
    /// Row-major, `subject_ids.len()` rows by `feature_defs.len()` columns.
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<StressLevel>,
    pub scheme: LabelScheme,
}

impl LabeledDataset {
    pub fn new(
        subject_ids: Vec<String>,
        feature_defs: Vec<FeatureDef>,
        rows: Vec<Vec<f64>>,
        labels: Vec<StressLevel>,
        scheme: LabelScheme,
    ) -> Result<Self> {
        if subject_ids.len() != rows.len() || subject_ids.len() != labels.len() {
            return Err(Error::DatasetMismatch(format!(
                "{} subjects, {} rows, {} labels",
                subject_ids.len(),
                rows.len(),
                labels.len()
            )));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != feature_defs.len() {
                return Err(Error::DatasetMismatch(format!(
                    "row {i} has {} entries, expected {}",
                    row.len(),
                    feature_defs.len()
                )));
            }
            if let Some(bad) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::DatasetMismatch(format!(
                    "row {i} ('{}') contains non-finite value {bad}",
                    subject_ids[i]
                )));
            }
        }
        for label in &labels {
            if !label.is_valid_for(scheme) {
                return Err(Error::DatasetMismatch(format!(
                    "label {label} is not valid under the {scheme}-class scheme"
                )));
            }
        }
        {
            let mut seen = std::collections::HashSet::new();
            for def in &feature_defs {
                if !seen.insert(&def.name) {
                    return Err(Error::DatasetMismatch(format!(
                        "duplicate feature name '{}'",
                        def.name
                    )));
                }
            }
        }
        Ok(LabeledDataset {
            subject_ids,
            feature_defs,
            rows,
            labels,
            scheme,
        })
    }

    pub fn n_subjects(&self) -> usize {
        self.subject_ids.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_defs.len()
    }

    /// Classes present, in canonical order.
    pub fn classes_present(&self) -> Vec<StressLevel> {
        self.scheme
            .classes()
            .iter()
            .copied()
            .filter(|c| self.labels.contains(c))
            .collect()
    }

    /// Column-restricted copy keeping features whose definition passes `keep`.
    pub fn restrict<F: Fn(&FeatureDef) -> bool>(&self, keep: F) -> LabeledDataset {
        let idx: Vec<usize> = self
            .feature_defs
            .iter()
            .enumerate()
            .filter(|(_, d)| keep(d))
            .map(|(i, _)| i)
            .collect();
        self.select_columns(&idx)
    }

    /// Column-restricted copy by explicit indices (in the given order).
    pub fn select_columns(&self, idx: &[usize]) -> LabeledDataset {
        LabeledDataset {
            subject_ids: self.subject_ids.clone(),
            feature_defs: idx.iter().map(|&i| self.feature_defs[i].clone()).collect(),
            rows: self
                .rows
                .iter()
                .map(|r| idx.iter().map(|&i| r[i]).collect())
                .collect(),
            labels: self.labels.clone(),
            scheme: self.scheme,
        }
    }

    /// Column indices of features named in `names`, in `names` order.
    pub fn column_indices(&self, names: &[String]) -> Result<Vec<usize>> {
        names
            .iter()
            .map(|n| {
                self.feature_defs
                    .iter()
                    .position(|d| &d.name == n)
                    .ok_or_else(|| Error::DatasetMismatch(format!("unknown feature '{n}'")))
            })
            .collect()
    }

    /// Concatenate feature columns of several aligned datasets.
    pub fn concat(parts: &[&LabeledDataset]) -> Result<LabeledDataset> {
        let first = parts
            .first()
            .ok_or_else(|| Error::DatasetMismatch("no datasets to concatenate".into()))?;
        for p in &parts[1..] {
            if p.subject_ids != first.subject_ids {
                return Err(Error::DatasetMismatch(
                    "subject ids differ between modalities".into(),
                ));
            }
            if p.labels != first.labels || p.scheme != first.scheme {
                return Err(Error::DatasetMismatch(
                    "labels differ between modalities".into(),
                ));
            }
        }
        let feature_defs: Vec<FeatureDef> = parts
            .iter()
            .flat_map(|p| p.feature_defs.iter().cloned())
            .collect();
        let rows: Vec<Vec<f64>> = (0..first.n_subjects())
            .map(|i| {
                parts
                    .iter()
                    .flat_map(|p| p.rows[i].iter().copied())
                    .collect()
            })
            .collect();
        LabeledDataset::new(
            first.subject_ids.clone(),
            feature_defs,
            rows,
            first.labels.clone(),
            first.scheme,
        )
    }

    /// Copy with every row except `leave_out`.
    pub fn without_row(&self, leave_out: usize) -> LabeledDataset {
        let keep = |i: &usize| *i != leave_out;
        LabeledDataset {
            subject_ids: self
                .subject_ids
                .iter()
                .enumerate()
                .filter(|(i, _)| keep(i))
                .map(|(_, s)| s.clone())
                .collect(),
            feature_defs: self.feature_defs.clone(),
            rows: self
                .rows
                .iter()
                .enumerate()
                .filter(|(i, _)| keep(i))
                .map(|(_, r)| r.clone())
                .collect(),
            labels: self
                .labels
                .iter()
                .enumerate()
                .filter(|(i, _)| keep(i))
                .map(|(_, l)| *l)
                .collect(),
            scheme: self.scheme,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_class_threshold_is_inclusive_mean() {
        // Cohort engineered to have mean exactly 22.
        let scores = [20u8, 22, 22, 24];
        let labels = label_two_class(&scores).unwrap();
        assert_eq!(
            labels,
            vec![
                StressLevel::NonStressed,
                StressLevel::NonStressed,
                StressLevel::NonStressed,
                StressLevel::Stressed
            ]
        );
    }

    #[test]
    fn two_class_score_above_mean_is_stressed() {
        let labels = label_two_class_pinned(&[22, 23], 22.0).unwrap();
        assert_eq!(labels[0], StressLevel::NonStressed);
        assert_eq!(labels[1], StressLevel::Stressed);
    }

    #[test]
    fn identical_scores_are_all_non_stressed() {
        let labels = label_two_class(&[17; 9]).unwrap();
        assert!(labels.iter().all(|l| *l == StressLevel::NonStressed));
    }

    #[test]
    fn empty_cohort_is_an_error() {
        assert!(matches!(label_two_class(&[]), Err(Error::EmptyCohort)));
        assert!(matches!(label_three_class(&[]), Err(Error::EmptyCohort)));
    }

    #[test]
    fn published_cohort_parameters_give_18_26() {
        let stats = CohortStats {
            mu: 22.0,
            sigma: 7.15,
        };
        assert_eq!(stats.three_class_boundaries(), (18, 26));
    }

    #[test]
    fn boundary_score_26_is_mildly_stressed() {
        let stats = CohortStats {
            mu: 22.0,
            sigma: 7.15,
        };
        let labels = label_three_class_pinned(&[18, 19, 26, 27], stats).unwrap();
        assert_eq!(
            labels,
            vec![
                StressLevel::NonStressed,
                StressLevel::MildlyStressed,
                StressLevel::MildlyStressed,
                StressLevel::Stressed
            ]
        );
    }

    #[test]
    fn single_subject_is_non_stressed() {
        // sigma = 0, mu = score: both boundaries collapse onto the score.
        let labels = label_three_class(&[31]).unwrap();
        assert_eq!(labels, vec![StressLevel::NonStressed]);
    }

    #[test]
    fn three_class_intervals_partition_the_scale() {
        // Exhaustive scan over a grid of cohort parameters: every score in
        // 0..=40 gets exactly one class, and class order follows score order.
        for mu10 in 0..=400u32 {
            for sigma10 in 0..=150u32 {
                let stats = CohortStats {
                    mu: mu10 as f64 / 10.0,
                    sigma: sigma10 as f64 / 10.0,
                };
                let (lo, hi) = stats.three_class_boundaries();
                assert!(lo <= hi, "lo {lo} > hi {hi} for {stats:?}");
                let scores: Vec<u8> = (0..=40).collect();
                let labels = label_three_with(&scores, &stats);
                for w in labels.windows(2) {
                    assert!(w[0] <= w[1]);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn labeling_is_permutation_equivariant(
            mut scores in proptest::collection::vec(0u8..=40, 1..60),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            let base_two = label_two_class(&scores).unwrap();
            let base_three = label_three_class(&scores).unwrap();
            let mut perm: Vec<usize> = (0..scores.len()).collect();
            perm.shuffle(&mut crate::rng::rng_for(seed, &[0]));
            let permuted: Vec<u8> = perm.iter().map(|&i| scores[i]).collect();
            let two = label_two_class(&permuted).unwrap();
            let three = label_three_class(&permuted).unwrap();
            for (k, &i) in perm.iter().enumerate() {
                prop_assert_eq!(two[k], base_two[i]);
                prop_assert_eq!(three[k], base_three[i]);
            }
            // keep the original binding alive for clarity
            scores.clear();
        }

        #[test]
        fn constant_shift_preserves_two_class_labels(
            scores in proptest::collection::vec(0u8..=30, 1..50),
            shift in 0u8..=10,
        ) {
            let base = label_two_class(&scores).unwrap();
            let shifted: Vec<u8> = scores.iter().map(|&s| s + shift).collect();
            let after = label_two_class(&shifted).unwrap();
            prop_assert_eq!(base, after);
        }
    }
}
