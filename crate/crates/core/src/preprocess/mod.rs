//! Signal conditioning ahead of feature extraction: Savitzky-Golay smoothing
//! for GSR/PPG, statistical artifact screening for EEG, and the STFT
//! band-power decomposition every EEG feature is built on.

mod artifact;
mod savgol;
mod stft;

pub use artifact::{screen_artifacts, ArtifactConfig, VarianceThreshold};
pub use savgol::{savitzky_golay, sg_interior_weights, SgConfig};
pub use stft::{band_powers, periodogram, BandPowerSeries, StftConfig, Taper};
