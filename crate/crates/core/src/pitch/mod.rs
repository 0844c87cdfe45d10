//! GCI detection, F0 tracking, syllable contour smoothing and the 31-class
//! contour labels.

pub mod contour;
pub mod gci;
pub mod label;
pub mod polyfit;
pub mod track;

pub use contour::{classify_contour, smooth_syllable_contour, synthesize_contour, ContourConfig, SmoothedContour};
pub use gci::{detect_gcis, GciConfig, GciSequence};
pub use label::{ContourLabel, Range, Shape};
pub use track::{f0_from_gcis, f0_track, PitchTrack};
