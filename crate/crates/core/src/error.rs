//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A labeling or statistics operation received an empty cohort.
    #[error("cohort is empty")]
    EmptyCohort,

    /// A PSS score fell outside the 0..=40 questionnaire range.
    #[error("PSS score {0} outside 0..=40")]
    PssScoreOutOfRange(i64),

    /// Invalid configuration value (window sizes, thresholds, iteration counts...).
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A CSV file did not have a required column.
    #[error("{file}: missing required column '{column}'")]
    MissingColumn { file: String, column: String },

    /// Malformed CSV content (non-numeric cell, ragged row, bad timestamps...).
    #[error("{file}: {message}")]
    CsvFormat { file: String, message: String },

    /// A recording ended up with no usable samples.
    #[error("{0}: recording is empty")]
    EmptyRecording(String),

    /// Sample rate differs from the one the pipeline is fixed to.
    #[error("{context}: sample rate {found:.3} Hz, expected {expected:.3} Hz (resampling is not supported)")]
    SampleRateMismatch {
        context: String,
        found: f64,
        expected: f64,
    },

    /// Signal data violated a structural invariant (channel naming, lengths, non-finite values).
    #[error("invalid signal data: {0}")]
    InvalidSignal(String),

    /// Artifact screening rejected every epoch.
    #[error("artifact screening rejected all {0} epochs")]
    AllEpochsRejected(usize),

    /// A feature is mathematically undefined on the given data.
    #[error("feature '{feature}' undefined: {reason}")]
    FeatureUndefined { feature: String, reason: String },

    /// Dataset rows/labels/names disagree in length or alignment.
    #[error("dataset mismatch: {0}")]
    DatasetMismatch(String),

    /// A statistical test received unusable groups.
    #[error("statistics: {0}")]
    Stats(String),

    /// Classifier training was asked to do something impossible.
    #[error("training error: {0}")]
    Training(String),

    /// Prediction input does not match the trained model.
    #[error("prediction input mismatch: {0}")]
    PredictMismatch(String),

    /// Model (de)serialization failed.
    #[error("model serialization: {0}")]
    ModelFormat(String),

    /// Underlying I/O error with the offending path attached.
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// Wraps any of the above with the subject it occurred on.
    #[error("subject '{subject_id}': {source}")]
    Subject {
        subject_id: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Attach a subject id to an error bubbling out of a per-subject stage.
    pub fn for_subject(self, subject_id: &str) -> Error {
        Error::Subject {
            subject_id: subject_id.to_string(),
            source: Box::new(self),
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Error {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
