//! Browser demo bindings: three interactive views over the pipeline.
//!
//! Each export returns a JSON string the static page renders onto canvases:
//!
//! * [`synth_preview`]: generate a synthetic subject and show its signals,
//!   per-band EEG power and extracted features;
//! * [`smooth_preview`]: Savitzky-Golay smoothing of a noisy pulse wave
//!   with adjustable window and polynomial order;
//! * [`confusion_metrics`]: accuracy/precision/recall/F/kappa from a pasted
//!   confusion matrix.
//!
//! Build with `wasm-pack build --target web` (see the workspace README).

use serde::Serialize;
use stresslab::data::{Band, LabelScheme, SignalChannel, StressLevel};
use stresslab::evaluate::{metrics, ConfusionMatrix};
use stresslab::features::{assemble_subject_features, FeatureConfig};
use stresslab::ingest::synth::{generate_synthetic_subject, SynthSpec};
use stresslab::preprocess::{band_powers, savitzky_golay, SgConfig, StftConfig};
use stresslab::rng::{rng_for, standard_normal};
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct Trace {
    name: String,
    /// Downsampled samples for plotting.
    samples: Vec<f64>,
    sample_step: usize,
    sample_rate: f64,
}

#[derive(Serialize)]
struct BandBar {
    band: String,
    /// Mean absolute power per channel, canonical channel order.
    tp9: f64,
    af7: f64,
    af8: f64,
    tp10: f64,
}

#[derive(Serialize)]
struct SynthPreview {
    pss_score: u8,
    planted_class: String,
    scheme: String,
    duration_seconds: f64,
    traces: Vec<Trace>,
    band_power: Vec<BandBar>,
    features: Vec<(String, f64)>,
}

#[derive(Serialize)]
struct ErrorReply {
    error: String,
}

fn err_json(message: impl std::fmt::Display) -> String {
    serde_json::to_string(&ErrorReply {
        error: message.to_string(),
    })
    .unwrap()
}

fn downsample(sig: &SignalChannel, max_points: usize) -> Trace {
    let step = (sig.len() / max_points).max(1);
    Trace {
        name: sig.name.clone(),
        samples: sig.samples.iter().step_by(step).copied().collect(),
        sample_step: step,
        sample_rate: sig.sample_rate,
    }
}

fn parse_class(label: &str) -> Option<StressLevel> {
    match label {
        "non-stressed" => Some(StressLevel::NonStressed),
        "mildly-stressed" => Some(StressLevel::MildlyStressed),
        "stressed" => Some(StressLevel::Stressed),
        _ => None,
    }
}

/// Generate one synthetic subject and summarize it for plotting.
#[wasm_bindgen]
pub fn synth_preview(seed: u32, class: &str, effect_scale: f64, duration_seconds: f64) -> String {
    let Some(planted) = parse_class(class) else {
        return err_json(format!("unknown class '{class}'"));
    };
    let spec = SynthSpec {
        duration_seconds: duration_seconds.clamp(5.0, 60.0),
        effect_scale: effect_scale.clamp(0.0, 3.0),
        scheme: LabelScheme::ThreeClass,
        ..SynthSpec::new(seed as u64, planted)
    };
    let record = match generate_synthetic_subject(&spec) {
        Ok(r) => r,
        Err(e) => return err_json(e),
    };
    let bp = match band_powers(&record.eeg, &StftConfig::default()) {
        Ok(b) => b,
        Err(e) => return err_json(e),
    };
    let features = match assemble_subject_features(&record, &FeatureConfig::default()) {
        Ok(f) => f,
        Err(e) => return err_json(e),
    };

    let band_power = Band::ALL
        .iter()
        .map(|b| BandBar {
            band: b.name().to_string(),
            tp9: bp.mean_power(0, *b),
            af7: bp.mean_power(1, *b),
            af8: bp.mean_power(2, *b),
            tp10: bp.mean_power(3, *b),
        })
        .collect();

    let mut traces = vec![downsample(record.eeg.channel("TP9").unwrap(), 1500)];
    traces.push(downsample(&record.gsr, 1500));
    traces.push(downsample(&record.ppg, 1500));

    let reply = SynthPreview {
        pss_score: record.pss_score,
        planted_class: planted.name().to_string(),
        scheme: spec.scheme.name().to_string(),
        duration_seconds: spec.duration_seconds,
        traces,
        band_power,
        features: features
            .entries()
            .map(|(def, value)| (def.name.clone(), value))
            .collect(),
    };
    serde_json::to_string(&reply).unwrap()
}

#[derive(Serialize)]
struct SmoothPreview {
    raw: Vec<f64>,
    smoothed: Vec<f64>,
    window: usize,
    order: usize,
}

/// Savitzky-Golay smoothing of a noisy pulse-like test signal.
#[wasm_bindgen]
pub fn smooth_preview(window: usize, order: usize, noise: f64, seed: u32) -> String {
    let mut rng = rng_for(seed as u64, &[b'd' as u64]);
    let n = 600;
    let rate = 256.0;
    let raw: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / rate;
            let cycle = std::f64::consts::TAU * 1.2 * t;
            cycle.sin() + 0.3 * (2.0 * cycle + 0.8).sin() + noise * standard_normal(&mut rng)
        })
        .collect();
    let signal = match SignalChannel::new("pulse", rate, raw.clone()) {
        Ok(s) => s,
        Err(e) => return err_json(e),
    };
    let cfg = SgConfig {
        window_length: window,
        poly_order: order,
    };
    match savitzky_golay(&signal, &cfg) {
        Ok(sm) => serde_json::to_string(&SmoothPreview {
            raw,
            smoothed: sm.samples,
            window,
            order,
        })
        .unwrap(),
        Err(e) => err_json(e),
    }
}

#[derive(Serialize)]
struct MetricsReply {
    accuracy: f64,
    weighted_f1: f64,
    macro_f1: f64,
    kappa: f64,
    classes: Vec<String>,
    precision: Vec<f64>,
    recall: Vec<f64>,
    f1: Vec<f64>,
    support: Vec<u64>,
}

/// Metrics from a pasted confusion matrix (integer rows, comma separated).
#[wasm_bindgen]
pub fn confusion_metrics(text: &str) -> String {
    let mut counts: Vec<Vec<u64>> = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row: Result<Vec<u64>, _> = line
            .split([',', ';', ' '])
            .filter(|c| !c.is_empty())
            .map(|c| c.trim().parse::<u64>())
            .collect();
        match row {
            Ok(r) if !r.is_empty() => counts.push(r),
            _ => return err_json(format!("'{line}' is not a row of counts")),
        }
    }
    let classes: Vec<StressLevel> = match counts.len() {
        2 => vec![StressLevel::NonStressed, StressLevel::Stressed],
        3 => vec![
            StressLevel::NonStressed,
            StressLevel::MildlyStressed,
            StressLevel::Stressed,
        ],
        k => return err_json(format!("need a 2x2 or 3x3 matrix, got {k} rows")),
    };
    let cm = match ConfusionMatrix::from_counts(classes, counts) {
        Ok(c) => c,
        Err(e) => return err_json(e),
    };
    match metrics(&cm) {
        Ok(m) => serde_json::to_string(&MetricsReply {
            accuracy: m.accuracy,
            weighted_f1: m.weighted_f1,
            macro_f1: m.macro_f1,
            kappa: m.kappa,
            classes: m.per_class.iter().map(|c| c.class.name().to_string()).collect(),
            precision: m.per_class.iter().map(|c| c.precision).collect(),
            recall: m.per_class.iter().map(|c| c.recall).collect(),
            f1: m.per_class.iter().map(|c| c.f1).collect(),
            support: m.per_class.iter().map(|c| c.support).collect(),
        })
        .unwrap(),
        Err(e) => err_json(e),
    }
}
