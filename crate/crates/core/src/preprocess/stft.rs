//! Short-time FFT band-power decomposition.
//!
//! Each channel is cut into tapered windows (256 samples with 90 % overlap by
//! default), a one-sided periodogram is computed per window, and per-band
//! absolute power is the sum of periodogram bins whose frequency falls in the
//! band's range. Powers are linear (µV²), never log-scaled: the asymmetry
//! features downstream subtract and divide absolute powers.

use crate::data::{Band, EegRecording};
use crate::error::{Error, Result};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Taper {
    /// 0.54 - 0.46 cos(2πn/(N-1)); the default leakage control.
    Hamming,
    /// No taper; exact Parseval bookkeeping.
    Rectangular,
}

impl Taper {
    fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            Taper::Rectangular => vec![1.0; n],
            Taper::Hamming => (0..n)
                .map(|i| {
                    0.54 - 0.46 * (std::f64::consts::TAU * i as f64 / (n as f64 - 1.0)).cos()
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StftConfig {
    /// Window length in samples.
    pub window_size: usize,
    /// Fraction of the window shared between consecutive windows, in [0, 1).
    pub overlap_fraction: f64,
    pub taper: Taper,
}

impl Default for StftConfig {
    fn default() -> Self {
        StftConfig {
            window_size: 256,
            overlap_fraction: 0.90,
            taper: Taper::Hamming,
        }
    }
}

impl StftConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window_size < 2 {
            return Err(Error::Config(format!(
                "STFT window size must be >= 2, got {}",
                self.window_size
            )));
        }
        if !(0.0..1.0).contains(&self.overlap_fraction) {
            return Err(Error::Config(format!(
                "STFT overlap must be in [0, 1), got {}",
                self.overlap_fraction
            )));
        }
        Ok(())
    }

    /// Hop between window starts: window * (1 - overlap), rounded, at least 1.
    pub fn hop(&self) -> usize {
        let hop = (self.window_size as f64 * (1.0 - self.overlap_fraction)).round();
        (hop as usize).max(1)
    }

    /// Number of windows for a signal of `n` samples: floor((n - w)/hop) + 1.
    pub fn window_count(&self, n: usize) -> usize {
        if n < self.window_size {
            0
        } else {
            (n - self.window_size) / self.hop() + 1
        }
    }
}

/// One-sided periodogram of a tapered frame.
///
/// Bin `k` holds the power at frequency `k * rate / N`; the total over all
/// bins equals the mean square of the tapered frame (discrete Parseval).
pub fn periodogram(frame: &[f64], taper: Taper) -> Vec<f64> {
    let n = frame.len();
    let coeffs = taper.coefficients(n);
    let mut buf: Vec<Complex<f64>> = frame
        .iter()
        .zip(&coeffs)
        .map(|(x, w)| Complex::new(x * w, 0.0))
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    one_sided_power(&buf)
}

fn one_sided_power(spectrum: &[Complex<f64>]) -> Vec<f64> {
    let n = spectrum.len();
    let n_bins = n / 2 + 1;
    let scale = 1.0 / (n as f64 * n as f64);
    (0..n_bins)
        .map(|k| {
            let doubled = k != 0 && !(n.is_multiple_of(2) && k == n / 2);
            let c = if doubled { 2.0 } else { 1.0 };
            c * spectrum[k].norm_sqr() * scale
        })
        .collect()
}

/// Per-channel, per-band, per-window absolute power from the STFT.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandPowerSeries {
    pub channel_names: Vec<String>,
    pub n_windows: usize,
    /// Window-center times in seconds.
    pub window_times: Vec<f64>,
    /// Flat [channel][band][window] layout; windows contiguous.
    powers: Vec<f64>,
}

impl BandPowerSeries {
    pub fn n_channels(&self) -> usize {
        self.channel_names.len()
    }

    pub fn channel_index(&self, name: &str) -> Option<usize> {
        self.channel_names.iter().position(|c| c == name)
    }

    /// Per-window power series for one channel and band.
    pub fn series(&self, channel: usize, band: Band) -> &[f64] {
        let base = (channel * Band::ALL.len() + band.index()) * self.n_windows;
        &self.powers[base..base + self.n_windows]
    }

    /// Mean over windows of the per-window band power.
    pub fn mean_power(&self, channel: usize, band: Band) -> f64 {
        let s = self.series(channel, band);
        s.iter().sum::<f64>() / s.len() as f64
    }
}

/// Decompose a recording into per-band power time series.
pub fn band_powers(eeg: &EegRecording, cfg: &StftConfig) -> Result<BandPowerSeries> {
    cfg.validate()?;
    let n = eeg.samples_per_channel();
    let w = cfg.window_size;
    if n < w {
        return Err(Error::Config(format!(
            "recording of {n} samples is shorter than the {w}-sample STFT window"
        )));
    }
    let rate = eeg.sample_rate();
    let hop = cfg.hop();
    let n_windows = cfg.window_count(n);
    let coeffs = cfg.taper.coefficients(w);

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(w);

    // Precompute which periodogram bins feed each band.
    let n_bins = w / 2 + 1;
    let bin_band: Vec<Option<usize>> = (0..n_bins)
        .map(|k| {
            let f = k as f64 * rate / w as f64;
            Band::ALL.iter().position(|b| b.contains_hz(f))
        })
        .collect();

    let n_bands = Band::ALL.len();
    let mut powers = vec![0.0; eeg.channels().len() * n_bands * n_windows];
    let mut scratch = vec![Complex::new(0.0, 0.0); w];

    for (ci, ch) in eeg.channels().iter().enumerate() {
        for wi in 0..n_windows {
            let start = wi * hop;
            for (j, slot) in scratch.iter_mut().enumerate() {
                *slot = Complex::new(ch.samples[start + j] * coeffs[j], 0.0);
            }
            fft.process(&mut scratch);
            let bins = one_sided_power(&scratch);
            for (k, p) in bins.iter().enumerate() {
                if let Some(b) = bin_band[k] {
                    powers[(ci * n_bands + b) * n_windows + wi] += p;
                }
            }
        }
    }

    let window_times = (0..n_windows)
        .map(|wi| (wi * hop) as f64 / rate + (w as f64 - 1.0) / (2.0 * rate))
        .collect();

    Ok(BandPowerSeries {
        channel_names: eeg.channels().iter().map(|c| c.name.clone()).collect(),
        n_windows,
        window_times,
        powers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::SignalChannel;
    use proptest::prelude::*;

    fn eeg_from(f: impl Fn(usize, f64) -> f64, n: usize) -> EegRecording {
        let rate = 256.0;
        let channels = crate::data::EEG_CHANNELS
            .iter()
            .enumerate()
            .map(|(ci, name)| {
                let samples = (0..n).map(|i| f(ci, i as f64 / rate)).collect();
                SignalChannel::new(*name, rate, samples).unwrap()
            })
            .collect();
        EegRecording::new(channels).unwrap()
    }

    #[test]
    fn default_hop_is_26_samples() {
        // 256 * (1 - 0.90) = 25.6, rounded up to 26.
        assert_eq!(StftConfig::default().hop(), 26);
    }

    #[test]
    fn window_count_formula_is_exact() {
        let cfg = StftConfig::default();
        for n in [256usize, 257, 281, 282, 46080] {
            let expected = (n - 256) / 26 + 1;
            assert_eq!(cfg.window_count(n), expected, "n = {n}");
        }
    }

    #[test]
    fn ten_hz_sine_lands_in_alpha() {
        let eeg = eeg_from(|_, t| (std::f64::consts::TAU * 10.0 * t).sin(), 2560);
        for taper in [Taper::Hamming, Taper::Rectangular] {
            let cfg = StftConfig {
                taper,
                ..StftConfig::default()
            };
            let bp = band_powers(&eeg, &cfg).unwrap();
            for wi in 0..bp.n_windows {
                let alpha = bp.series(0, Band::Alpha)[wi];
                let total: f64 = Band::ALL.iter().map(|b| bp.series(0, *b)[wi]).sum();
                assert!(
                    alpha >= 0.90 * total,
                    "window {wi}, taper {taper:?}: alpha {alpha} of {total}"
                );
            }
        }
    }

    #[test]
    fn zero_signal_has_zero_power() {
        let eeg = eeg_from(|_, _| 0.0, 1024);
        let bp = band_powers(&eeg, &StftConfig::default()).unwrap();
        for ch in 0..4 {
            for b in Band::ALL {
                assert!(bp.series(ch, b).iter().all(|p| *p == 0.0));
            }
        }
    }

    #[test]
    fn parseval_holds_for_rectangular_taper() {
        let mut rng = crate::rng::rng_for(11, &[3]);
        let frame: Vec<f64> = (0..256).map(|_| crate::rng::standard_normal(&mut rng)).collect();
        let bins = periodogram(&frame, Taper::Rectangular);
        let spectral: f64 = bins.iter().sum();
        let mean_square = frame.iter().map(|x| x * x).sum::<f64>() / frame.len() as f64;
        let rel = (spectral - mean_square).abs() / mean_square;
        assert!(rel < 1e-6, "rel err {rel}");
    }

    #[test]
    fn theta_alpha_gap_bins_feed_no_band() {
        // 7.5 Hz sits in the printed 7-8 Hz gap between theta and alpha.
        assert!(Band::ALL.iter().all(|b| !b.contains_hz(7.5)));
        assert!(Band::Theta.contains_hz(6.99));
        assert!(Band::Alpha.contains_hz(8.0));
    }

    #[test]
    fn short_channel_is_rejected() {
        let eeg = eeg_from(|_, _| 1.0, 100);
        assert!(matches!(
            band_powers(&eeg, &StftConfig::default()),
            Err(Error::Config(_))
        ));
    }

    proptest! {
        #[test]
        fn scaling_signal_scales_power_quadratically(
            seed in any::<u64>(),
            k in 0.1f64..10.0,
        ) {
            let mut rng = crate::rng::rng_for(seed, &[7]);
            let base: Vec<f64> = (0..600)
                .map(|_| crate::rng::standard_normal(&mut rng))
                .collect();
            let eeg1 = eeg_from(|_, t| base[(t * 256.0).round() as usize % base.len()], 600);
            let eeg2 = eeg_from(
                |_, t| k * base[(t * 256.0).round() as usize % base.len()],
                600,
            );
            let cfg = StftConfig::default();
            let bp1 = band_powers(&eeg1, &cfg).unwrap();
            let bp2 = band_powers(&eeg2, &cfg).unwrap();
            for b in Band::ALL {
                for (p1, p2) in bp1.series(0, b).iter().zip(bp2.series(0, b)) {
                    if *p1 > 1e-300 {
                        let rel = (p2 - k * k * p1).abs() / (k * k * p1);
                        prop_assert!(rel < 1e-9, "band {b:?}: {p2} vs {}", k * k * p1);
                    }
                }
            }
        }
    }
}
