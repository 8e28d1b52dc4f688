//! Feature extraction.
//!
//! EEG features come from the band-power series: differential and rational
//! asymmetry (DASM, RASM) and Pearson correlation between the two hemispheric
//! channel pairs, plus mean absolute power per channel. Five bands each, for
//! a feature vector length of 10 + 10 + 10 + 20 = 50. GSR and PPG each
//! contribute kurtosis, entropy, standard-deviation-to-mean-absolute ratio
//! and variance (8 more), for 58 in total.

use crate::data::{
    Band, FeatureDef, LabelScheme, LabeledDataset, Modality, SignalChannel, SubjectRecord,
    ASYMMETRY_PAIRS, EEG_CHANNELS,
};
use crate::error::{Error, Result};
use crate::preprocess::{
    band_powers, savitzky_golay, screen_artifacts, ArtifactConfig, BandPowerSeries, SgConfig,
    StftConfig,
};
use serde::{Deserialize, Serialize};

/// Ordered, named feature values for one subject.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    defs: Vec<FeatureDef>,
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(defs: Vec<FeatureDef>, values: Vec<f64>) -> Result<Self> {
        if defs.len() != values.len() {
            return Err(Error::DatasetMismatch(format!(
                "{} feature names for {} values",
                defs.len(),
                values.len()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for def in &defs {
            if !seen.insert(&def.name) {
                return Err(Error::DatasetMismatch(format!(
                    "duplicate feature '{}'",
                    def.name
                )));
            }
        }
        Ok(FeatureVector { defs, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn defs(&self) -> &[FeatureDef] {
        &self.defs
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.defs
            .iter()
            .position(|d| d.name == name)
            .map(|i| self.values[i])
    }

    pub fn entries(&self) -> impl Iterator<Item = (&FeatureDef, f64)> {
        self.defs.iter().zip(self.values.iter().copied())
    }

    /// Concatenate, keeping entry order.
    pub fn concat(mut self, other: FeatureVector) -> Result<FeatureVector> {
        self.defs.extend(other.defs);
        self.values.extend(other.values);
        FeatureVector::new(self.defs, self.values)
    }
}

const EEG_KINDS: [&str; 3] = ["dasm", "rasm", "corr"];

/// Asymmetry, correlation and mean-power features from a band-power series.
pub fn eeg_features(bp: &BandPowerSeries) -> Result<FeatureVector> {
    if bp.n_windows < 2 {
        return Err(Error::FeatureUndefined {
            feature: "eeg".into(),
            reason: format!("need at least 2 STFT windows, got {}", bp.n_windows),
        });
    }
    for name in EEG_CHANNELS {
        if bp.channel_index(name).is_none() {
            return Err(Error::FeatureUndefined {
                feature: "eeg".into(),
                reason: format!("band powers missing channel '{name}'"),
            });
        }
    }

    let mut defs = Vec::with_capacity(50);
    let mut values = Vec::with_capacity(50);

    for kind in EEG_KINDS {
        for band in Band::ALL {
            for (left, right) in ASYMMETRY_PAIRS {
                let li = bp.channel_index(left).unwrap();
                let ri = bp.channel_index(right).unwrap();
                let name = format!(
                    "{kind}_{band}_{}_{}",
                    left.to_lowercase(),
                    right.to_lowercase()
                );
                let value = match kind {
                    "dasm" => bp.mean_power(li, band) - bp.mean_power(ri, band),
                    "rasm" => {
                        let denom = bp.mean_power(ri, band);
                        if denom == 0.0 {
                            return Err(Error::FeatureUndefined {
                                feature: name,
                                reason: format!("zero mean power on {right} ({band})"),
                            });
                        }
                        bp.mean_power(li, band) / denom
                    }
                    _ => pearson(bp.series(li, band), bp.series(ri, band)).ok_or_else(|| {
                        Error::FeatureUndefined {
                            feature: name.clone(),
                            reason: "constant band-power series".into(),
                        }
                    })?,
                };
                if !value.is_finite() {
                    return Err(Error::FeatureUndefined {
                        feature: name,
                        reason: format!("non-finite value {value}"),
                    });
                }
                defs.push(FeatureDef::new(name, Modality::Eeg, Some(band)));
                values.push(value);
            }
        }
    }

    for band in Band::ALL {
        for ch in EEG_CHANNELS {
            let ci = bp.channel_index(ch).unwrap();
            defs.push(FeatureDef::new(
                format!("pmean_{band}_{}", ch.to_lowercase()),
                Modality::Eeg,
                Some(band),
            ));
            values.push(bp.mean_power(ci, band));
        }
    }

    FeatureVector::new(defs, values)
}

/// Pearson correlation; `None` when either series is constant.
///
/// The denominator is `sqrt(sa * sb)` rather than `sqrt(sa) * sqrt(sb)` so a
/// series correlated with itself gives exactly 1.
fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut sa = 0.0;
    let mut sb = 0.0;
    let mut sab = 0.0;
    for (x, y) in a.iter().zip(b) {
        let da = x - ma;
        let db = y - mb;
        sa += da * da;
        sb += db * db;
        sab += da * db;
    }
    if sa == 0.0 || sb == 0.0 {
        None
    } else {
        Some(sab / (sa * sb).sqrt())
    }
}

/// Population moments used by the time-domain features.
#[derive(Debug, Clone, Copy)]
struct Moments {
    mean: f64,
    variance: f64,
    m4: f64,
    mean_abs: f64,
}

fn moments(x: &[f64]) -> Moments {
    // A constant signal must report exactly zero spread (it gates the
    // kurtosis/SdMar error paths), so detect it before any accumulation
    // rounding can leak in.
    if x.iter().all(|v| *v == x[0]) {
        return Moments {
            mean: x[0],
            variance: 0.0,
            m4: 0.0,
            mean_abs: x[0].abs(),
        };
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let mut m2 = 0.0;
    let mut m4 = 0.0;
    let mut mean_abs = 0.0;
    for v in x {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m4 += d2 * d2;
        mean_abs += v.abs();
    }
    Moments {
        mean,
        variance: m2 / n,
        m4: m4 / n,
        mean_abs: mean_abs / n,
    }
}

/// Non-excess kurtosis m4/m2²; errors on constant input.
pub fn kurtosis(x: &[f64]) -> Result<f64> {
    let m = moments(x);
    if m.variance == 0.0 {
        return Err(Error::FeatureUndefined {
            feature: "kurtosis".into(),
            reason: "zero variance".into(),
        });
    }
    Ok(m.m4 / (m.variance * m.variance))
}

/// Shannon entropy (bits) of the amplitude histogram over `bins` equal-width
/// bins spanning [min, max]. A constant signal occupies one bin: entropy 0.
pub fn shannon_entropy(x: &[f64], bins: usize) -> Result<f64> {
    if bins == 0 {
        return Err(Error::Config("entropy needs at least one bin".into()));
    }
    let min = x.iter().copied().fold(f64::INFINITY, f64::min);
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        return Ok(0.0);
    }
    let width = (max - min) / bins as f64;
    let mut counts = vec![0u64; bins];
    for v in x {
        let idx = (((v - min) / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let n = x.len() as f64;
    Ok(counts
        .iter()
        .filter(|c| **c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum())
}

/// Standard deviation over mean absolute value. Zero spread gives 0.
pub fn sdmar(x: &[f64]) -> Result<f64> {
    let m = moments(x);
    if m.variance == 0.0 {
        return Ok(0.0);
    }
    if m.mean_abs == 0.0 {
        return Err(Error::FeatureUndefined {
            feature: "sdmar".into(),
            reason: "zero mean absolute value".into(),
        });
    }
    Ok(m.variance.sqrt() / m.mean_abs)
}

/// Population variance.
pub fn variance(x: &[f64]) -> f64 {
    moments(x).variance
}

/// Signal mean (used by the significance analysis, not the feature vector).
pub fn mean(x: &[f64]) -> f64 {
    moments(x).mean
}

/// Smoothed GSR and PPG means for the subject-level measures table.
pub fn savitzky_golay_means(record: &SubjectRecord, sg: &SgConfig) -> Result<(f64, f64)> {
    let gsr = savitzky_golay(&record.gsr, sg)?;
    let ppg = savitzky_golay(&record.ppg, sg)?;
    Ok((mean(&gsr.samples), mean(&ppg.samples)))
}

const TIME_KINDS: [&str; 4] = ["kurtosis", "entropy", "sdmar", "variance"];

/// The four time-domain statistics for both peripheral signals.
pub fn gsr_ppg_features(
    gsr: &SignalChannel,
    ppg: &SignalChannel,
    entropy_bins: usize,
) -> Result<FeatureVector> {
    let mut defs = Vec::with_capacity(8);
    let mut values = Vec::with_capacity(8);
    for (modality, sig) in [(Modality::Gsr, gsr), (Modality::Ppg, ppg)] {
        if sig.is_empty() {
            return Err(Error::EmptyRecording(sig.name.clone()));
        }
        for kind in TIME_KINDS {
            let value = match kind {
                "kurtosis" => kurtosis(&sig.samples)?,
                "entropy" => shannon_entropy(&sig.samples, entropy_bins)?,
                "sdmar" => sdmar(&sig.samples)?,
                _ => variance(&sig.samples),
            };
            defs.push(FeatureDef::new(
                format!("{modality}_{kind}"),
                modality,
                None,
            ));
            values.push(value);
        }
    }
    FeatureVector::new(defs, values)
}

/// Everything needed to turn a raw subject into its feature vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub sg: SgConfig,
    pub stft: StftConfig,
    pub artifact: ArtifactConfig,
    pub entropy_bins: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            sg: SgConfig::default(),
            stft: StftConfig::default(),
            artifact: ArtifactConfig::default(),
            entropy_bins: 16,
        }
    }
}

/// Full per-subject pipeline: smooth GSR/PPG, screen + decompose EEG, then
/// extract and concatenate both feature groups (58 entries).
pub fn assemble_subject_features(
    record: &SubjectRecord,
    cfg: &FeatureConfig,
) -> Result<FeatureVector> {
    let with_subject = |e: Error| e.for_subject(&record.subject_id);

    let gsr = savitzky_golay(&record.gsr, &cfg.sg).map_err(with_subject)?;
    let ppg = savitzky_golay(&record.ppg, &cfg.sg).map_err(with_subject)?;
    let (clean, _mask) = screen_artifacts(&record.eeg, &cfg.artifact).map_err(with_subject)?;
    let bp = band_powers(&clean, &cfg.stft).map_err(with_subject)?;

    let eeg = eeg_features(&bp).map_err(with_subject)?;
    let peripheral = gsr_ppg_features(&gsr, &ppg, cfg.entropy_bins).map_err(with_subject)?;
    eeg.concat(peripheral).map_err(with_subject)
}

/// Feature-extract a whole cohort and label it from its own PSS scores.
pub fn assemble_cohort(
    records: &[SubjectRecord],
    scheme: LabelScheme,
    cfg: &FeatureConfig,
) -> Result<LabeledDataset> {
    if records.is_empty() {
        return Err(Error::EmptyCohort);
    }
    let scores: Vec<u8> = records.iter().map(|r| r.pss_score).collect();
    let labels = crate::data::label_cohort(&scores, scheme)?;

    let vectors = crate::par_map(records.iter().collect::<Vec<_>>(), |r| {
        assemble_subject_features(r, cfg)
    });
    let mut defs: Option<Vec<FeatureDef>> = None;
    let mut rows = Vec::with_capacity(records.len());
    for fv in vectors {
        let fv = fv?;
        match &defs {
            None => defs = Some(fv.defs().to_vec()),
            Some(d) => {
                if d != fv.defs() {
                    return Err(Error::DatasetMismatch(
                        "feature definitions differ between subjects".into(),
                    ));
                }
            }
        }
        rows.push(fv.values().to_vec());
    }

    LabeledDataset::new(
        records.iter().map(|r| r.subject_id.clone()).collect(),
        defs.unwrap(),
        rows,
        labels,
        scheme,
    )
}

/// CSV export of a cohort's features: header of feature names, one row per
/// subject, prefixed by subject id, PSS-derived label last.
pub fn dataset_to_csv(dataset: &LabeledDataset) -> String {
    let mut out = String::from("subject_id");
    for def in &dataset.feature_defs {
        out.push(',');
        out.push_str(&def.name);
    }
    out.push_str(",label\n");
    for i in 0..dataset.n_subjects() {
        out.push_str(&dataset.subject_ids[i]);
        for v in &dataset.rows[i] {
            out.push(',');
            out.push_str(&format!("{v}"));
        }
        out.push(',');
        out.push_str(dataset.labels[i].name());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::EegRecording;
    use proptest::prelude::*;

    /// Band-power series built directly from synthetic EEG so the tests
    /// exercise the real decomposition path.
    fn bp_from(f: impl Fn(usize, f64) -> f64, n: usize) -> BandPowerSeries {
        let channels = EEG_CHANNELS
            .iter()
            .enumerate()
            .map(|(ci, name)| {
                let samples = (0..n).map(|i| f(ci, i as f64 / 256.0)).collect();
                SignalChannel::new(*name, 256.0, samples).unwrap()
            })
            .collect();
        let eeg = EegRecording::new(channels).unwrap();
        band_powers(&eeg, &StftConfig::default()).unwrap()
    }

    fn varied(t: f64, phase: f64) -> f64 {
        (std::f64::consts::TAU * 5.0 * t + phase).sin()
            + 0.5 * (std::f64::consts::TAU * 10.0 * t).sin()
            + 0.25 * (std::f64::consts::TAU * 21.0 * t + 1.0).sin()
            + 0.2 * (std::f64::consts::TAU * 2.0 * t).sin()
            + 0.1 * (std::f64::consts::TAU * 35.0 * t).sin()
    }

    #[test]
    fn mirrored_channels_give_identity_features() {
        // All four channels identical: DASM 0, RASM 1, C 1, exactly.
        let bp = bp_from(|_, t| varied(t, 0.3), 2048);
        let fv = eeg_features(&bp).unwrap();
        assert_eq!(fv.len(), 50);
        for (def, value) in fv.entries() {
            if def.name.starts_with("dasm_") {
                assert_eq!(value, 0.0, "{}", def.name);
            } else if def.name.starts_with("rasm_") || def.name.starts_with("corr_") {
                assert_eq!(value, 1.0, "{}", def.name);
            }
        }
    }

    #[test]
    fn doubled_right_channel_halves_rasm() {
        // TP10 and AF8 carry twice the amplitude: power x4, RASM = 1/4, C = 1.
        let bp = bp_from(
            |ci, t| if ci == 2 || ci == 3 { 2.0 } else { 1.0 } * varied(t, 0.0),
            2048,
        );
        let fv = eeg_features(&bp).unwrap();
        for band in Band::ALL {
            let rasm = fv.get(&format!("rasm_{band}_tp9_tp10")).unwrap();
            assert!((rasm - 0.25).abs() < 1e-9, "{band}: {rasm}");
            let c = fv.get(&format!("corr_{band}_tp9_tp10")).unwrap();
            assert!((c - 1.0).abs() < 1e-12, "{band}: {c}");
        }
    }

    #[test]
    fn feature_vector_layout_is_canonical() {
        let bp = bp_from(|ci, t| varied(t, ci as f64), 2048);
        let fv = eeg_features(&bp).unwrap();
        let names: Vec<&str> = fv.defs().iter().map(|d| d.name.as_str()).collect();
        assert_eq!(names.len(), 50);
        assert_eq!(names[0], "dasm_delta_tp9_tp10");
        assert_eq!(names[1], "dasm_delta_af7_af8");
        assert_eq!(names[2], "dasm_theta_tp9_tp10");
        assert_eq!(names[10], "rasm_delta_tp9_tp10");
        assert_eq!(names[20], "corr_delta_tp9_tp10");
        assert_eq!(names[30], "pmean_delta_tp9");
        assert_eq!(names[31], "pmean_delta_af7");
        assert_eq!(names[49], "pmean_gamma_tp10");
        assert_eq!(
            fv.defs().iter().filter(|d| d.name.starts_with("dasm")).count(),
            10
        );
        assert_eq!(
            fv.defs().iter().filter(|d| d.name.starts_with("pmean")).count(),
            20
        );
        // every EEG feature carries a band tag
        assert!(fv.defs().iter().all(|d| d.band.is_some()));
    }

    #[test]
    fn constant_signal_statistics() {
        let x = vec![4.2; 1000];
        assert_eq!(variance(&x), 0.0);
        assert_eq!(shannon_entropy(&x, 16).unwrap(), 0.0);
        assert_eq!(sdmar(&x).unwrap(), 0.0);
        assert!(matches!(
            kurtosis(&x),
            Err(Error::FeatureUndefined { .. })
        ));
    }

    #[test]
    fn uniform_sample_kurtosis_approaches_nine_fifths() {
        let mut rng = crate::rng::rng_for(17, &[0]);
        let x: Vec<f64> = (0..46080).map(|_| rand::Rng::gen::<f64>(&mut rng)).collect();
        let k = kurtosis(&x).unwrap();
        assert!((k - 1.8).abs() < 0.05, "kurtosis {k}");
    }

    #[test]
    fn normal_sample_kurtosis_and_sdmar() {
        let mut rng = crate::rng::rng_for(18, &[0]);
        let x: Vec<f64> = (0..46080)
            .map(|_| crate::rng::standard_normal(&mut rng))
            .collect();
        let k = kurtosis(&x).unwrap();
        assert!((k - 3.0).abs() < 0.1, "kurtosis {k}");
        // E|X| = sqrt(2/pi) for a standard normal, so SdMar -> 1/sqrt(2/pi).
        let s = sdmar(&x).unwrap();
        let expected = 1.0 / (2.0 / std::f64::consts::PI).sqrt();
        assert!((s - expected).abs() < 0.01, "sdmar {s} vs {expected}");
    }

    #[test]
    fn equal_bin_occupancy_maximizes_entropy() {
        // 16 distinct levels, each hit 8 times: entropy is log2(16) = 4 bits.
        let mut x = Vec::new();
        for level in 0..16 {
            x.extend(std::iter::repeat_n(level as f64, 8));
        }
        assert_eq!(shannon_entropy(&x, 16).unwrap(), 4.0);
    }

    #[test]
    fn fused_vector_has_58_entries() {
        let record = crate::ingest::synth::generate_synthetic_subject(
            &crate::ingest::synth::SynthSpec {
                duration_seconds: 20.0,
                ..crate::ingest::synth::SynthSpec::new(9, crate::data::StressLevel::Stressed)
            },
        )
        .unwrap();
        let fv = assemble_subject_features(&record, &FeatureConfig::default()).unwrap();
        assert_eq!(fv.len(), 58);
        assert!(fv.values().iter().all(|v| v.is_finite()));
        // determinism: same record, same vector
        let fv2 = assemble_subject_features(&record, &FeatureConfig::default()).unwrap();
        assert_eq!(fv, fv2);
    }

    proptest! {
        #[test]
        fn dasm_antisymmetry_under_channel_swap(seed in any::<u64>()) {
            let mut rng = crate::rng::rng_for(seed, &[2]);
            let phases: Vec<f64> = (0..4).map(|_| rand::Rng::gen::<f64>(&mut rng) * 6.0).collect();
            let gains: Vec<f64> = (0..4).map(|_| 0.5 + rand::Rng::gen::<f64>(&mut rng)).collect();
            let bp = bp_from(|ci, t| gains[ci] * varied(t, phases[ci]), 1280);
            // swap both pairs: TP9<->TP10 and AF7<->AF8
            let swapped = bp_from(
                |ci, t| {
                    let j = match ci {
                        0 => 3,
                        3 => 0,
                        1 => 2,
                        _ => 1,
                    };
                    gains[j] * varied(t, phases[j])
                },
                1280,
            );
            let f1 = eeg_features(&bp).unwrap();
            let f2 = eeg_features(&swapped).unwrap();
            for (def, v1) in f1.entries() {
                let v2 = f2.get(&def.name).unwrap();
                if def.name.starts_with("dasm_") {
                    prop_assert!((v1 + v2).abs() < 1e-9, "{}: {v1} vs {v2}", def.name);
                } else if def.name.starts_with("rasm_") {
                    prop_assert!((v1 * v2 - 1.0).abs() < 1e-9, "{}: {v1} vs {v2}", def.name);
                }
            }
        }

        #[test]
        fn kurtosis_and_sdmar_are_scale_invariant(
            seed in any::<u64>(),
            k in 0.001f64..1000.0,
        ) {
            let mut rng = crate::rng::rng_for(seed, &[3]);
            let x: Vec<f64> = (0..500)
                .map(|_| crate::rng::standard_normal(&mut rng) + 0.3)
                .collect();
            let scaled: Vec<f64> = x.iter().map(|v| v * k).collect();
            let (k1, k2) = (kurtosis(&x).unwrap(), kurtosis(&scaled).unwrap());
            prop_assert!((k1 - k2).abs() / k1 < 1e-9);
            let (s1, s2) = (sdmar(&x).unwrap(), sdmar(&scaled).unwrap());
            prop_assert!((s1 - s2).abs() / s1 < 1e-9);
        }

        #[test]
        fn correlation_is_invariant_to_positive_affine_maps(
            seed in any::<u64>(),
            scale in 0.01f64..100.0,
            shift in -50.0f64..50.0,
        ) {
            let mut rng = crate::rng::rng_for(seed, &[4]);
            let a: Vec<f64> = (0..200).map(|_| crate::rng::standard_normal(&mut rng)).collect();
            let b: Vec<f64> = (0..200).map(|_| crate::rng::standard_normal(&mut rng)).collect();
            let b2: Vec<f64> = b.iter().map(|v| scale * v + shift).collect();
            let r1 = pearson(&a, &b).unwrap();
            let r2 = pearson(&a, &b2).unwrap();
            prop_assert!((r1 - r2).abs() < 1e-9, "{r1} vs {r2}");
        }
    }
}
