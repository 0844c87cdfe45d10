use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {reason}", path.display())]
    Audio { path: PathBuf, reason: String },

    #[error("empty audio")]
    EmptyAudio,

    #[error("audio too short: {samples} samples, need at least {required}")]
    TooShort { samples: usize, required: usize },

    #[error("invalid frame spec: {0}")]
    FrameSpec(String),

    #[error("need at least {required} frames, got {got}")]
    TooFewFrames { got: usize, required: usize },

    #[error("no model for phone '{0}'")]
    MissingModel(String),

    #[error("phone '{0}' has no training examples")]
    NoExamples(String),

    #[error("seed labels do not tile the utterance: {0}")]
    NonTiling(String),

    #[error("no valid alignment path: {frames} frames for a minimum of {min_frames}")]
    NoPath { frames: usize, min_frames: usize },

    #[error("no phones to align")]
    NoPhones,

    #[error("utterance '{id}': {source}")]
    Utterance {
        id: String,
        #[source]
        source: Box<Error>,
    },

    #[error("word '{0}' has no vowel")]
    Vowelless(String),

    #[error("phone '{phone}' is not mapped for language '{language}'")]
    UnmappedPhone { language: String, phone: String },

    #[error("phone count mismatch: {0}")]
    PhoneCountMismatch(String),

    #[error("sequence mismatch: {0}")]
    Mismatch(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("syllable count {0} outside 1..=5")]
    SyllableCount(usize),

    #[error("syllable [{start}, {end}] contains no energy frames")]
    EmptySyllable { start: f64, end: f64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("missing tier '{0}'")]
    MissingTier(String),

    #[error("unknown contour label '{0}'")]
    UnknownLabel(String),

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
