//! EEG artifact screening on per-epoch variance and kurtosis.
//!
//! The recording is cut into fixed-length epochs; an epoch is kept only if
//! every channel stays below both thresholds. Rejected epochs are excised
//! from all channels so the channels stay aligned. A trailing stretch
//! shorter than one epoch is dropped.

use crate::data::{EegRecording, SignalChannel};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Variance rejection rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum VarianceThreshold {
    /// Reject epochs whose variance exceeds this absolute value (µV²).
    Absolute(f64),
    /// Reject epochs whose variance exceeds this multiple of the channel's
    /// median epoch variance.
    MedianFold(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArtifactConfig {
    pub variance: VarianceThreshold,
    /// Non-excess kurtosis cutoff (Gaussian background sits near 3).
    pub kurtosis_threshold: f64,
    pub epoch_seconds: f64,
}

impl Default for ArtifactConfig {
    fn default() -> Self {
        ArtifactConfig {
            variance: VarianceThreshold::MedianFold(5.0),
            kurtosis_threshold: 8.0,
            epoch_seconds: 1.0,
        }
    }
}

impl ArtifactConfig {
    pub fn validate(&self) -> Result<()> {
        let var_ok = match self.variance {
            VarianceThreshold::Absolute(v) => v >= 0.0,
            VarianceThreshold::MedianFold(f) => f >= 0.0,
        };
        if !var_ok || self.kurtosis_threshold < 0.0 {
            return Err(Error::Config(
                "artifact thresholds must be non-negative".into(),
            ));
        }
        if !(self.epoch_seconds > 0.0) {
            return Err(Error::Config(format!(
                "artifact epoch must be positive, got {} s",
                self.epoch_seconds
            )));
        }
        Ok(())
    }
}

/// Screen a recording; returns the cleaned recording and the rejection mask
/// (`true` = epoch removed).
pub fn screen_artifacts(
    eeg: &EegRecording,
    cfg: &ArtifactConfig,
) -> Result<(EegRecording, Vec<bool>)> {
    cfg.validate()?;
    let epoch_len = (cfg.epoch_seconds * eeg.sample_rate()).round() as usize;
    if epoch_len == 0 {
        return Err(Error::Config("artifact epoch shorter than one sample".into()));
    }
    let n_epochs = eeg.samples_per_channel() / epoch_len;
    if n_epochs == 0 {
        return Err(Error::Config(format!(
            "recording shorter than one {}-s epoch",
            cfg.epoch_seconds
        )));
    }

    // Per-channel epoch statistics.
    let mut variances = vec![vec![0.0; n_epochs]; eeg.channels().len()];
    let mut kurtoses = vec![vec![0.0; n_epochs]; eeg.channels().len()];
    for (ci, ch) in eeg.channels().iter().enumerate() {
        for e in 0..n_epochs {
            let epoch = &ch.samples[e * epoch_len..(e + 1) * epoch_len];
            let (var, kurt) = variance_kurtosis(epoch);
            variances[ci][e] = var;
            kurtoses[ci][e] = kurt;
        }
    }

    let mut mask = vec![false; n_epochs];
    for (ci, _) in eeg.channels().iter().enumerate() {
        let var_cut = match cfg.variance {
            VarianceThreshold::Absolute(v) => v,
            VarianceThreshold::MedianFold(f) => f * median(&variances[ci]),
        };
        for e in 0..n_epochs {
            if variances[ci][e] > var_cut || kurtoses[ci][e] > cfg.kurtosis_threshold {
                mask[e] = true;
            }
        }
    }

    let kept: Vec<usize> = (0..n_epochs).filter(|e| !mask[*e]).collect();
    if kept.is_empty() {
        return Err(Error::AllEpochsRejected(n_epochs));
    }

    let channels = eeg
        .channels()
        .iter()
        .map(|ch| {
            let mut samples = Vec::with_capacity(kept.len() * epoch_len);
            for &e in &kept {
                samples.extend_from_slice(&ch.samples[e * epoch_len..(e + 1) * epoch_len]);
            }
            SignalChannel::new(ch.name.clone(), ch.sample_rate, samples)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok((EegRecording::new(channels)?, mask))
}

/// Population variance and non-excess kurtosis (m4/m2²) of one epoch.
/// A constant epoch has kurtosis 0 by convention: it is never spiky.
fn variance_kurtosis(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let m2 = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let m4 = x.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
    let kurt = if m2 > 0.0 { m4 / (m2 * m2) } else { 0.0 };
    (m2, kurt)
}

fn median(xs: &[f64]) -> f64 {
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noisy_eeg(n: usize, spike_epoch: Option<usize>) -> EegRecording {
        let rate = 256.0;
        let channels = crate::data::EEG_CHANNELS
            .iter()
            .enumerate()
            .map(|(ci, name)| {
                let mut rng = crate::rng::rng_for(5, &[ci as u64]);
                let mut samples: Vec<f64> = (0..n)
                    .map(|_| crate::rng::standard_normal(&mut rng) * 10.0)
                    .collect();
                if let (Some(e), true) = (spike_epoch, ci == 0) {
                    for s in samples.iter_mut().skip(e * 256).take(256) {
                        *s *= 10.0;
                    }
                }
                SignalChannel::new(*name, rate, samples).unwrap()
            })
            .collect();
        EegRecording::new(channels).unwrap()
    }

    #[test]
    fn infinite_thresholds_are_a_no_op() {
        let eeg = noisy_eeg(256 * 8, None);
        let cfg = ArtifactConfig {
            variance: VarianceThreshold::Absolute(f64::INFINITY),
            kurtosis_threshold: f64::INFINITY,
            epoch_seconds: 1.0,
        };
        let (clean, mask) = screen_artifacts(&eeg, &cfg).unwrap();
        assert!(mask.iter().all(|m| !m));
        assert_eq!(clean.channels(), eeg.channels());
    }

    #[test]
    fn amplitude_spike_masks_exactly_its_epoch() {
        // A 10x amplitude spike in epoch 3 lifts that epoch's variance by
        // ~100x, far above the 5x-median default.
        let eeg = noisy_eeg(256 * 8, Some(3));
        let (clean, mask) = screen_artifacts(&eeg, &ArtifactConfig::default()).unwrap();
        assert_eq!(
            mask,
            vec![false, false, false, true, false, false, false, false]
        );
        assert_eq!(clean.samples_per_channel(), 256 * 7);
    }

    #[test]
    fn zero_thresholds_reject_everything() {
        let eeg = noisy_eeg(256 * 4, None);
        let cfg = ArtifactConfig {
            variance: VarianceThreshold::Absolute(0.0),
            kurtosis_threshold: 0.0,
            epoch_seconds: 1.0,
        };
        assert!(matches!(
            screen_artifacts(&eeg, &cfg),
            Err(Error::AllEpochsRejected(4))
        ));
    }

    #[test]
    fn trailing_partial_epoch_is_dropped() {
        let eeg = noisy_eeg(256 * 3 + 100, None);
        let cfg = ArtifactConfig {
            variance: VarianceThreshold::Absolute(f64::INFINITY),
            kurtosis_threshold: f64::INFINITY,
            epoch_seconds: 1.0,
        };
        let (clean, mask) = screen_artifacts(&eeg, &cfg).unwrap();
        assert_eq!(mask.len(), 3);
        assert_eq!(clean.samples_per_channel(), 256 * 3);
    }
}
