//! Multimodal perceived-stress classification pipeline.
//!
//! This crate implements a batch pipeline that classifies perceived stress
//! (two or three levels, derived from Perceived Stress Scale questionnaire
//! scores) from three wearable physiological modalities:
//!
//! * **EEG**: four channels (TP9, AF7, AF8, TP10) at 256 Hz,
//! * **GSR**: galvanic skin response (skin resistance),
//! * **PPG**: photoplethysmography (blood volume pulse).
//!
//! The stages, each its own module:
//!
//! ```text
//! ingest ─► preprocess ─► features ─► select ─► classify ─► evaluate
//!   │          │             │           │          │           │
//!   │          │             │           │          │           └─ LOOCV, confusion
//!   │          │             │           │          │              matrix, F-score, kappa
//!   │          │             │           │          └─ MLP / SVM-RBF / Naive Bayes
//!   │          │             │           └─ band selection, wrapper selection,
//!   │          │             │              early/late feature fusion
//!   │          │             └─ DASM, RASM, correlation, mean band power;
//!   │          │                kurtosis, entropy, SdMar, variance
//!   │          └─ Savitzky-Golay smoothing, artifact screening,
//!   │             STFT band-power decomposition
//!   └─ device CSV parsing + seeded synthetic cohorts
//! ```
//!
//! The [`stats`] module provides the significance analysis (two-sample t-test
//! and one-way ANOVA) applied to raw band powers and GSR/PPG summaries, and
//! [`pipeline`] wires all stages together for the CLI, the tests and the
//! browser demo.
//!
//! Everything is deterministic given a master seed: fold seeds, candidate
//! seeds and synthetic subjects are derived with [`rng::derive_seed`], so
//! results are independent of thread count and scheduling.

// `!(x > 0.0)` is the NaN-rejecting config guard (x <= 0.0 would accept
// NaN); indexed loops stay in the numeric kernels where iterator chains
// obscure the arithmetic.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod classify;
pub mod data;
pub mod error;
pub mod evaluate;
pub mod features;
pub mod ingest;
pub mod pipeline;
pub mod preprocess;
pub mod rng;
pub mod select;
pub mod stats;

pub use data::{
    Band, EegRecording, LabelScheme, LabeledDataset, SignalChannel, StressLevel, SubjectRecord,
};
pub use error::{Error, Result};

#[cfg(feature = "parallel")]
pub(crate) fn par_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.into_par_iter().map(f).collect()
}

// Serial fallback keeps the wasm build free of thread primitives; output
// ordering is identical to the parallel path.
#[cfg(not(feature = "parallel"))]
pub(crate) fn par_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    items.into_iter().map(f).collect()
}
