//! End-to-end annotation of one utterance.

use std::path::Path;

use rayon::prelude::*;

use crate::align::{
    attach_syllables, derive_word_boundaries, force_align, iterative_refine, train_seed_models, CorpusUtterance,
    LabeledSpan, OnsetRules, PhonemeSegment, Refinement, SeedUtterance, SyllableSegment, Syllabifier, WordSegment,
    WordSpec,
};
use crate::audio::{frame_signal, quantize_time, AudioBuffer, FrameClock};
use crate::config::Config;
use crate::document::{AnnotationDocument, BreakPoint, Interval, SyllableAnnotation};
use crate::error::{Error, Result};
use crate::events::{assign_break_indices, compute_rii, detect_silences};
use crate::features::{energy_track, flatness_track, FeatureConfig, MfccExtractor};
use crate::phones::{map_phones, Inventory, Phone, PhoneMapping, SILENCE};
use crate::pitch::{classify_contour, detect_gcis, f0_track, smooth_syllable_contour};
use crate::ModelSet;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranscribedWord {
    pub text: String,
    pub phones: Vec<String>,
}

/// Words with their phone strings, optionally tagged with a language.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Transcription {
    pub language: Option<String>,
    pub words: Vec<TranscribedWord>,
}

impl Transcription {
    /// One word per line, `word<TAB>phone phone ...`. A `#lang xx` line sets
    /// the language; other `#` lines and blank lines are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if let Some(lang) = line.strip_prefix("#lang") {
                out.language = Some(lang.trim().to_owned());
                continue;
            }
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |m: &str| Error::Parse {
                line: i + 1,
                message: m.to_owned(),
            };
            let (word, phones) = line.split_once('\t').ok_or_else(|| bad("expected 'word<TAB>phones'"))?;
            let phones: Vec<String> = phones.split_whitespace().map(str::to_owned).collect();
            if word.trim().is_empty() || phones.is_empty() {
                return Err(bad("word and phones must both be present"));
            }
            if phones.iter().any(|p| p == SILENCE) {
                return Err(bad("silence is inserted automatically between words"));
            }
            out.words.push(TranscribedWord {
                text: word.trim().to_owned(),
                phones,
            });
        }
        Ok(out)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::parse(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    /// `sil`, then each word's phones followed by `sil`.
    pub fn phone_sequence(&self) -> Vec<String> {
        let mut seq = vec![SILENCE.to_owned()];
        for w in &self.words {
            seq.extend(w.phones.iter().cloned());
            seq.push(SILENCE.to_owned());
        }
        seq
    }
}

/// Trained models plus the settings needed to annotate with them.
#[derive(Debug, Clone)]
pub struct Annotator {
    pub models: ModelSet,
    pub syllabifier: Syllabifier,
    pub config: Config,
}

fn stage(name: &'static str) -> impl Fn(Error) -> Error {
    move |e| e.in_stage(name)
}

impl Annotator {
    pub fn new(models: ModelSet, config: Config) -> Self {
        Self {
            models,
            syllabifier: Syllabifier::new(OnsetRules::default()),
            config,
        }
    }

    /// Aligns, syllabifies and labels one utterance. Errors name the stage
    /// that failed.
    pub fn annotate(
        &self,
        audio: &AudioBuffer<f64>,
        transcription: &Transcription,
        language: &str,
        audio_ref: &str,
    ) -> Result<AnnotationDocument> {
        let cfg = &self.config;
        if transcription.words.is_empty() {
            return Err(Error::NoPhones.in_stage("alignment"));
        }
        let phones = transcription.phone_sequence();
        let labels = self.models.resolve(language, &phones).map_err(stage("transcription"))?;

        let mut audio = audio.clone();
        audio.remove_dc();
        let feature_frames = frame_signal(&audio, &self.models.features.frame).map_err(stage("features"))?;
        let features = MfccExtractor::new(&self.models.features)
            .extract(&feature_frames)
            .map_err(stage("features"))?;
        let alignment =
            force_align(&self.models, &labels, &features, feature_frames.clock()).map_err(stage("alignment"))?;
        let segments: Vec<PhonemeSegment> = alignment
            .segments
            .iter()
            .zip(&phones)
            .map(|(s, label)| PhonemeSegment {
                phone: Phone {
                    label: label.clone(),
                    ..s.phone.clone()
                },
                ..s.clone()
            })
            .collect();

        let specs: Vec<WordSpec> = transcription
            .words
            .iter()
            .map(|w| WordSpec {
                text: w.text.clone(),
                phone_count: w.phones.len(),
            })
            .collect();
        let mut words = derive_word_boundaries(&segments, &specs).map_err(stage("words"))?;
        for w in &mut words {
            attach_syllables(w, &self.syllabifier, language).map_err(stage("syllables"))?;
        }
        let syllables: Vec<&SyllableSegment> = words.iter().flat_map(|w| &w.syllables).collect();
        let owned: Vec<SyllableSegment> = syllables.iter().map(|&s| s.clone()).collect();

        let frames = frame_signal(&audio, &cfg.frame).map_err(stage("intensity"))?;
        let clock = frames.clock();
        let rii = compute_rii(&owned, &energy_track(&frames), clock).map_err(stage("intensity"))?;

        let runs = detect_silences(&flatness_track(&frames), cfg.silence_threshold, clock);
        let boundaries = word_boundaries(&segments, &words);
        let indices = assign_break_indices(&runs, &boundaries, &cfg.breaks);

        let gcis = detect_gcis(&audio, &segments, &cfg.gci);
        let track = f0_track::<f64>(&gcis, clock, frames.len());
        let syllables = owned
            .iter()
            .zip(rii)
            .map(|(s, rii)| {
                let contour = smooth_syllable_contour(&track, s.start, s.end);
                SyllableAnnotation {
                    start: s.start,
                    end: s.end,
                    text: s.text.clone(),
                    rii,
                    label: classify_contour(&contour, &cfg.contour),
                    unvoiced: !contour.voiced,
                }
            })
            .collect();

        Ok(AnnotationDocument {
            audio: audio_ref.to_owned(),
            duration: feature_frames.quantized_duration(),
            phones: segments
                .iter()
                .filter(|s| s.end > s.start)
                .map(|s| Interval::new(s.start, s.end, s.phone.label.clone()))
                .collect(),
            syllables,
            words: words.iter().map(|w| Interval::new(w.start, w.end, w.text.clone())).collect(),
            breaks: boundaries
                .iter()
                .zip(indices)
                .map(|(&time, index)| BreakPoint { time, index })
                .collect(),
        })
    }
}

/// Boundary time after each word: the middle of the silence that follows
/// it, or the word's end when that silence was skipped.
fn word_boundaries(segments: &[PhonemeSegment], words: &[WordSegment]) -> Vec<f64> {
    words
        .iter()
        .map(|w| match segments.iter().find(|s| s.phone.is_silence && s.start == w.end) {
            Some(s) if s.end > s.start => quantize_time(0.5 * (s.start + s.end)),
            _ => w.end,
        })
        .collect()
}

/// Audio plus transcription for training; `seed_labels` marks the
/// hand-labelled subset.
#[derive(Debug, Clone)]
pub struct TrainingUtterance {
    pub id: String,
    pub audio: AudioBuffer<f64>,
    pub transcription: Transcription,
    pub seed_labels: Option<Vec<Interval>>,
}

/// Seeds models from the labelled utterances, then refines them on all
/// utterances with `config.iterations` segmental k-means passes.
///
/// With a mapping, phone labels are translated to shared labels using
/// each transcription's language and `inventory` must list the shared
/// labels.
pub fn train_models(
    utterances: &[TrainingUtterance],
    inventory: Inventory,
    mapping: Option<PhoneMapping>,
    config: &Config,
) -> Result<Refinement<f64>> {
    let features = FeatureConfig {
        frame: config.frame,
        ..FeatureConfig::default()
    };
    let extractor = MfccExtractor::<f64>::new(&features);
    let clock = FrameClock::new(&features.frame, features.sample_rate);
    let language_of = |u: &TrainingUtterance| -> Result<String> {
        match (&mapping, &u.transcription.language) {
            (_, Some(l)) => Ok(l.clone()),
            (None, None) => Ok(String::new()),
            (Some(_), None) => Err(Error::Config(format!("utterance '{}' has no #lang line", u.id))),
        }
    };
    let map_label = |language: &str, label: &str| -> Result<String> {
        match &mapping {
            Some(m) => Ok(map_phones(m, language, &[label])?.remove(0)),
            None => Ok(label.to_owned()),
        }
    };

    let prepared = utterances
        .par_iter()
        .map(|u| {
            let mut audio = u.audio.clone();
            audio.remove_dc();
            let frames = frame_signal(&audio, &features.frame)?;
            let feats = extractor.extract(&frames)?;
            Ok((u, feats))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut seed = Vec::new();
    let mut corpus = Vec::with_capacity(prepared.len());
    for (u, feats) in prepared {
        let language = language_of(u)?;
        let wrap = |e: Error| Error::Utterance {
            id: u.id.clone(),
            source: Box::new(e),
        };
        if let Some(labels) = &u.seed_labels {
            let spans = labels
                .iter()
                .map(|iv| {
                    Ok(LabeledSpan {
                        label: map_label(&language, &iv.text)?,
                        start: clock.frame_at(iv.start),
                        end: clock.frame_at(iv.end),
                    })
                })
                .filter(|s: &Result<LabeledSpan>| s.as_ref().map_or(true, |s| s.end > s.start))
                .collect::<Result<Vec<_>>>()
                .map_err(wrap)?;
            seed.push(SeedUtterance {
                id: u.id.clone(),
                features: feats.clone(),
                spans,
            });
        }
        let phones = u.transcription.phone_sequence();
        let phones = match &mapping {
            Some(m) => map_phones(m, &language, &phones).map_err(wrap)?,
            None => phones,
        };
        corpus.push(CorpusUtterance {
            id: u.id.clone(),
            features: feats,
            phones,
        });
    }
    if seed.is_empty() {
        return Err(Error::EmptyInput("seed labels".into()));
    }
    let mut models: ModelSet = train_seed_models(&seed, &inventory, features, &config.train)?;
    if let Some(m) = mapping {
        models = models.with_mapping(m);
    }
    iterative_refine(&models, &corpus, config.iterations, clock, &config.train)
}
