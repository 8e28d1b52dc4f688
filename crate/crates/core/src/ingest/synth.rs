//! Seeded synthetic subjects and cohorts.
//!
//! The generator stands in for the (private) human recordings. Each subject
//! draws a PSS score uniformly from its planted class's score interval, then
//! synthesizes signals whose class-discriminative content scales with that
//! score:
//!
//! * EEG: pink-noise background per channel plus a theta-band (5.5 Hz)
//!   sinusoid on TP9/TP10 and a smaller beta-band (21 Hz) sinusoid on TP9,
//!   amplitudes increasing with the score;
//! * GSR: slow drift around a mean resistance that falls as stress rises;
//! * PPG: a ~1.2 Hz pulse wave whose amplitude (hence variance) grows with
//!   the score, over a slowly shifting baseline.
//!
//! `effect_scale` multiplies every score-dependent term; at 0 the signals
//! carry no class information at all. All draws come from a ChaCha8 stream
//! in a fixed documented order, so a spec generates the same subject on
//! every platform.

use crate::data::{
    EegRecording, LabelScheme, SignalChannel, StressLevel, SubjectRecord, DEVICE_SAMPLE_RATE_HZ,
    EEG_CHANNELS, NOMINAL_DURATION_S,
};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_for, standard_normal};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub seed: u64,
    pub scheme: LabelScheme,
    pub planted_class: StressLevel,
    pub duration_seconds: f64,
    pub sample_rate: f64,
    /// Multiplier on every class/score-dependent signal effect; 0 removes
    /// all class information, 1 is the calibrated default.
    pub effect_scale: f64,
}

impl SynthSpec {
    pub fn new(seed: u64, planted_class: StressLevel) -> Self {
        SynthSpec {
            seed,
            scheme: LabelScheme::ThreeClass,
            planted_class,
            duration_seconds: NOMINAL_DURATION_S,
            sample_rate: DEVICE_SAMPLE_RATE_HZ,
            effect_scale: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration_seconds > 0.0) || !(self.sample_rate > 0.0) {
            return Err(Error::Config(
                "synthetic duration and sample rate must be positive".into(),
            ));
        }
        if !self.planted_class.is_valid_for(self.scheme) {
            return Err(Error::Config(format!(
                "class {} is not valid under the {}-class scheme",
                self.planted_class, self.scheme
            )));
        }
        if !self.effect_scale.is_finite() || self.effect_scale < 0.0 {
            return Err(Error::Config(format!(
                "effect scale must be finite and non-negative, got {}",
                self.effect_scale
            )));
        }
        Ok(())
    }

    /// PSS interval the planted class draws its score from. These are the
    /// published cohort boundaries (mean 22; three-class cuts 18/26).
    pub fn score_interval(&self) -> (u8, u8) {
        match (self.scheme, self.planted_class) {
            (LabelScheme::TwoClass, StressLevel::NonStressed) => (0, 22),
            (LabelScheme::TwoClass, _) => (23, 40),
            (LabelScheme::ThreeClass, StressLevel::NonStressed) => (0, 18),
            (LabelScheme::ThreeClass, StressLevel::MildlyStressed) => (19, 26),
            (LabelScheme::ThreeClass, StressLevel::Stressed) => (27, 40),
        }
    }
}

// Signal calibration constants (µV for EEG, kΩ for GSR, mV for PPG).
const PINK_RMS_UV: f64 = 10.0;
const THETA_HZ: f64 = 5.5;
const THETA_BASE_UV: f64 = 8.0;
const THETA_GAIN_UV: f64 = 40.0;
const BETA_HZ: f64 = 21.0;
const BETA_BASE_UV: f64 = 3.0;
const BETA_GAIN_UV: f64 = 8.0;

const GSR_BASE_KOHM: f64 = 500.0;
const GSR_DROP_KOHM: f64 = 250.0;
const GSR_DRIFT_KOHM: f64 = 25.0;
const GSR_DRIFT_HZ: f64 = 0.03;
const GSR_NOISE_KOHM: f64 = 2.0;

const PPG_BASE_MV: f64 = 1000.0;
const PPG_SHIFT_MV: f64 = 150.0;
const PPG_PULSE_MV: f64 = 80.0;
const PPG_PULSE_GAIN: f64 = 1.5;
const PPG_PULSE_HZ: f64 = 1.2;
const PPG_NOISE_MV: f64 = 5.0;

/// Generate one deterministic subject from its spec.
pub fn generate_synthetic_subject(spec: &SynthSpec) -> Result<SubjectRecord> {
    spec.validate()?;
    let mut rng = rng_for(spec.seed, &[]);
    let n = (spec.duration_seconds * spec.sample_rate).round() as usize;
    if n == 0 {
        return Err(Error::Config("duration too short for one sample".into()));
    }

    // Draw order: score, EEG channels (phases then noise, canonical channel
    // order), GSR, PPG. Changing this order re-randomizes every corpus.
    let (lo, hi) = spec.score_interval();
    let pss_score: u8 = rng.gen_range(lo..=hi);
    let s = pss_score as f64 / 40.0 * spec.effect_scale;

    let rate = spec.sample_rate;
    let channels = EEG_CHANNELS
        .iter()
        .map(|name| {
            let theta_amp = match *name {
                "TP9" | "TP10" => THETA_BASE_UV + THETA_GAIN_UV * s,
                _ => 0.0,
            };
            let theta_phase = rng.gen::<f64>() * std::f64::consts::TAU;
            let beta_phase = rng.gen::<f64>() * std::f64::consts::TAU;
            // The beta effect is deliberately the weak one: per-subject
            // log-normal jitter keeps it directionally informative without
            // rivaling theta, so band selection has a clear optimum.
            let beta_jitter = (0.5 * standard_normal(&mut rng)).exp();
            let beta_amp = match *name {
                "TP9" => (BETA_BASE_UV + BETA_GAIN_UV * s) * beta_jitter,
                _ => 0.0,
            };
            let mut pink = PinkNoise::new();
            let samples: Vec<f64> = (0..n)
                .map(|i| {
                    let t = i as f64 / rate;
                    pink.next(&mut rng) * PINK_RMS_UV
                        + theta_amp * (std::f64::consts::TAU * THETA_HZ * t + theta_phase).sin()
                        + beta_amp * (std::f64::consts::TAU * BETA_HZ * t + beta_phase).sin()
                })
                .collect();
            SignalChannel::new(*name, rate, samples)
        })
        .collect::<Result<Vec<_>>>()?;
    let eeg = EegRecording::new(channels)?;

    let gsr_mean = GSR_BASE_KOHM - GSR_DROP_KOHM * s;
    let gsr_phase = rng.gen::<f64>() * std::f64::consts::TAU;
    let gsr_samples: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / rate;
            gsr_mean
                + GSR_DRIFT_KOHM * (std::f64::consts::TAU * GSR_DRIFT_HZ * t + gsr_phase).sin()
                + GSR_NOISE_KOHM * standard_normal(&mut rng)
        })
        .collect();
    let gsr = SignalChannel::new("GSR", rate, gsr_samples)?;

    let ppg_dc = PPG_BASE_MV + PPG_SHIFT_MV * s;
    let pulse_amp = PPG_PULSE_MV * (1.0 + PPG_PULSE_GAIN * s);
    let pulse_hz = PPG_PULSE_HZ + 0.1 * (rng.gen::<f64>() - 0.5);
    let ppg_phase = rng.gen::<f64>() * std::f64::consts::TAU;
    let ppg_samples: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / rate;
            let cycle = std::f64::consts::TAU * pulse_hz * t + ppg_phase;
            ppg_dc
                + pulse_amp * (cycle.sin() + 0.3 * (2.0 * cycle + 0.8).sin())
                + PPG_NOISE_MV * standard_normal(&mut rng)
        })
        .collect();
    let ppg = SignalChannel::new("PPG", rate, ppg_samples)?;

    SubjectRecord::new(format!("synth-{:016x}", spec.seed), pss_score, eeg, gsr, ppg)
}

/// Three-pole pink (1/f) filter over white Gaussian input.
struct PinkNoise {
    b0: f64,
    b1: f64,
    b2: f64,
}

impl PinkNoise {
    fn new() -> Self {
        PinkNoise {
            b0: 0.0,
            b1: 0.0,
            b2: 0.0,
        }
    }

    fn next<R: Rng>(&mut self, rng: &mut R) -> f64 {
        let white = standard_normal(rng);
        self.b0 = 0.99765 * self.b0 + white * 0.0990460;
        self.b1 = 0.96300 * self.b1 + white * 0.2965164;
        self.b2 = 0.57000 * self.b2 + white * 1.0526913;
        // ~unit variance after the 0.18 trim
        (self.b0 + self.b1 + self.b2 + white * 0.1848) * 0.18
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CohortSpec {
    pub n_subjects: usize,
    pub scheme: LabelScheme,
    pub seed: u64,
    pub duration_seconds: f64,
    pub sample_rate: f64,
    pub effect_scale: f64,
}

impl CohortSpec {
    pub fn new(n_subjects: usize, scheme: LabelScheme, seed: u64) -> Self {
        CohortSpec {
            n_subjects,
            scheme,
            seed,
            duration_seconds: NOMINAL_DURATION_S,
            sample_rate: DEVICE_SAMPLE_RATE_HZ,
            effect_scale: 1.0,
        }
    }
}

/// A generated cohort. `labels_*` are recomputed from the realized score
/// multiset with the cohort labeling rules, so they are always consistent
/// with what the pipeline derives downstream (they can differ from the
/// planted classes near interval edges).
#[derive(Debug, Clone)]
pub struct SyntheticCohort {
    pub records: Vec<SubjectRecord>,
    pub planted: Vec<StressLevel>,
    pub labels_two: Vec<StressLevel>,
    pub labels_three: Vec<StressLevel>,
}

impl SyntheticCohort {
    pub fn scores(&self) -> Vec<u8> {
        self.records.iter().map(|r| r.pss_score).collect()
    }
}

/// Generate a cohort with class proportions mirroring the published split
/// (12 : 19 : 9 for three classes, 22 : 18 for two).
pub fn generate_cohort(spec: &CohortSpec) -> Result<SyntheticCohort> {
    if spec.n_subjects == 0 {
        return Err(Error::EmptyCohort);
    }
    let mut records = Vec::with_capacity(spec.n_subjects);
    let mut planted = Vec::with_capacity(spec.n_subjects);
    for i in 0..spec.n_subjects {
        let class = planted_class_for(i, spec.n_subjects, spec.scheme);
        let sub = SynthSpec {
            seed: derive_seed(spec.seed, &[i as u64]),
            scheme: spec.scheme,
            planted_class: class,
            duration_seconds: spec.duration_seconds,
            sample_rate: spec.sample_rate,
            effect_scale: spec.effect_scale,
        };
        let mut record = generate_synthetic_subject(&sub)?;
        record.subject_id = format!("s{i:03}");
        records.push(record);
        planted.push(class);
    }
    let scores: Vec<u8> = records.iter().map(|r| r.pss_score).collect();
    Ok(SyntheticCohort {
        labels_two: crate::data::label_two_class(&scores)?,
        labels_three: crate::data::label_three_class(&scores)?,
        records,
        planted,
    })
}

fn planted_class_for(i: usize, n: usize, scheme: LabelScheme) -> StressLevel {
    let u = (i as f64 + 0.5) / n as f64;
    match scheme {
        LabelScheme::TwoClass => {
            // 22 : 18
            if u < 22.0 / 40.0 {
                StressLevel::NonStressed
            } else {
                StressLevel::Stressed
            }
        }
        LabelScheme::ThreeClass => {
            // 12 : 19 : 9
            if u < 12.0 / 40.0 {
                StressLevel::NonStressed
            } else if u < 31.0 / 40.0 {
                StressLevel::MildlyStressed
            } else {
                StressLevel::Stressed
            }
        }
    }
}

/// Deterministic per-subject RNG context used by tests that probe draw
/// stability across releases.
pub fn subject_seed(cohort_seed: u64, index: usize) -> u64 {
    derive_seed(cohort_seed, &[index as u64])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Band;
    use crate::preprocess::{band_powers, StftConfig};

    fn quick(seed: u64, class: StressLevel) -> SynthSpec {
        SynthSpec {
            duration_seconds: 12.0,
            ..SynthSpec::new(seed, class)
        }
    }

    #[test]
    fn same_spec_is_bit_identical() {
        let spec = quick(99, StressLevel::Stressed);
        let a = generate_synthetic_subject(&spec).unwrap();
        let b = generate_synthetic_subject(&spec).unwrap();
        assert_eq!(a.pss_score, b.pss_score);
        assert_eq!(a.eeg, b.eeg);
        assert_eq!(a.gsr, b.gsr);
        assert_eq!(a.ppg, b.ppg);
    }

    #[test]
    fn scores_stay_in_the_planted_interval() {
        for class in [
            StressLevel::NonStressed,
            StressLevel::MildlyStressed,
            StressLevel::Stressed,
        ] {
            for seed in 0..30 {
                let spec = SynthSpec {
                    duration_seconds: 0.5,
                    ..SynthSpec::new(seed, class)
                };
                let (lo, hi) = spec.score_interval();
                let r = generate_synthetic_subject(&spec).unwrap();
                assert!((lo..=hi).contains(&r.pss_score), "{class}: {}", r.pss_score);
            }
        }
    }

    #[test]
    fn stressed_subjects_have_higher_theta_power_at_tp9() {
        // Generator-level oracle: mean theta power across >= 20 seeds per
        // class, measured by the real STFT path.
        let mean_theta = |class: StressLevel| -> f64 {
            let mut total = 0.0;
            for seed in 0..20u64 {
                let rec = generate_synthetic_subject(&quick(1000 + seed, class)).unwrap();
                let bp = band_powers(&rec.eeg, &StftConfig::default()).unwrap();
                let tp9 = bp.channel_index("TP9").unwrap();
                total += bp.mean_power(tp9, Band::Theta);
            }
            total / 20.0
        };
        let stressed = mean_theta(StressLevel::Stressed);
        let non = mean_theta(StressLevel::NonStressed);
        assert!(
            stressed > non,
            "theta TP9 power: stressed {stressed} vs non-stressed {non}"
        );
    }

    #[test]
    fn zero_effect_scale_removes_class_information() {
        let theta_for = |class: StressLevel, seed: u64| {
            let spec = SynthSpec {
                effect_scale: 0.0,
                ..quick(seed, class)
            };
            let rec = generate_synthetic_subject(&spec).unwrap();
            let bp = band_powers(&rec.eeg, &StftConfig::default()).unwrap();
            bp.mean_power(0, Band::Theta)
        };
        // same seed, different planted class: identical signal content except
        // for the score draw's effect, which effect_scale 0 silences
        let a = theta_for(StressLevel::Stressed, 5);
        let b = theta_for(StressLevel::NonStressed, 5);
        assert!((a - b).abs() / a < 0.2, "{a} vs {b}");
    }

    #[test]
    fn cohort_is_deterministic_and_self_consistent() {
        let spec = CohortSpec {
            duration_seconds: 2.0,
            ..CohortSpec::new(12, LabelScheme::ThreeClass, 7)
        };
        let a = generate_cohort(&spec).unwrap();
        let b = generate_cohort(&spec).unwrap();
        assert_eq!(a.scores(), b.scores());
        assert_eq!(a.records[3].eeg, b.records[3].eeg);

        // manifest labels are exactly what the labeling rules produce
        assert_eq!(
            a.labels_two,
            crate::data::label_two_class(&a.scores()).unwrap()
        );
        assert_eq!(
            a.labels_three,
            crate::data::label_three_class(&a.scores()).unwrap()
        );
        assert_eq!(a.records.len(), 12);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut spec = quick(1, StressLevel::MildlyStressed);
        spec.scheme = LabelScheme::TwoClass; // mildly stressed is three-class only
        assert!(generate_synthetic_subject(&spec).is_err());

        let mut spec = quick(1, StressLevel::Stressed);
        spec.duration_seconds = 0.0;
        assert!(generate_synthetic_subject(&spec).is_err());
    }
}
