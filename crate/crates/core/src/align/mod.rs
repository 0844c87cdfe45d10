//! Monophone GMM-HMM training and forced alignment, plus the syllable and
//! word tiers built on top of the phone alignment.

pub mod gmm;
pub mod model;
pub mod segment;
pub mod syllable;
pub mod train;
pub mod viterbi;
pub mod words;

pub use gmm::DiagGmm;
pub use model::{HmmState, ModelMode, ModelSet, MonophoneModel, MODEL_FILE_VERSION};
pub use segment::{PhonemeSegment, SyllableSegment, WordSegment};
pub use syllable::{OnsetRules, Syllabifier};
pub use train::{
    align_corpus, iterative_refine, reestimate, train_seed_models, CorpusUtterance, LabeledSpan, Refinement,
    SeedUtterance, TrainConfig,
};
pub use viterbi::{expand_units, force_align, min_frames, AlignUnit, Alignment};
pub use words::{attach_syllables, derive_word_boundaries, WordSpec};
