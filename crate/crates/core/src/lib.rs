//! Batch speech-prosody annotation.
//!
//! Given a 16 kHz waveform and its phonetic transcription the pipeline
//! produces time-aligned phone, syllable and word tiers, a 1–5 relative
//! intensity index per syllable, 1–3 break indices at word boundaries and
//! one of 31 pitch-contour labels per syllable. It also trains the
//! monophone alignment models and scores words for contour-based language
//! identification.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`, which is what the pipeline uses.

pub mod align;
pub mod audio;
pub mod config;
pub mod document;
pub mod error;
pub mod eval;
pub mod events;
pub mod features;
pub mod langid;
pub mod phones;
pub mod pipeline;
pub mod pitch;
pub mod scalar;
pub mod synth;

pub use config::Config;
pub use document::AnnotationDocument;
pub use error::{Error, Result};
pub use pipeline::{Annotator, Transcription};
pub use scalar::Scalar;

pub type AudioBuffer = audio::AudioBuffer<f64>;
pub type AudioBufferF32 = audio::AudioBuffer<f32>;
pub type FrameSequence = audio::FrameSequence<f64>;
pub type FeatureVector = features::FeatureVector<f64>;
pub type EnergyTrack = features::EnergyTrack<f64>;
pub type ModelSet = align::ModelSet<f64>;
pub type ModelSetF32 = align::ModelSet<f32>;
pub type PitchTrack = pitch::PitchTrack<f64>;
pub type SmoothedContour = pitch::SmoothedContour<f64>;
