//! Syllable intensity indices and silence-driven break indices.

use serde::{Deserialize, Serialize};

use crate::align::SyllableSegment;
use crate::audio::FrameClock;
use crate::error::{Error, Result};
use crate::features::EnergyTrack;
use crate::scalar::Scalar;

/// Relative intensity index, 1 (weakest) to 5.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RelativeIntensity(u8);

impl RelativeIntensity {
    /// Lower edges of bins 2..=5.
    pub const EDGES: [f64; 4] = [0.2, 0.4, 0.6, 0.8];

    pub fn new(value: u8) -> Option<Self> {
        (1..=5).contains(&value).then_some(Self(value))
    }

    /// Bins normalized energy into contiguous 0.2-wide bins:
    /// `[0,0.2)→1, [0.2,0.4)→2, [0.4,0.6)→3, [0.6,0.8)→4, [0.8,1]→5`.
    pub fn from_normalized<T: Scalar>(e_n: T) -> Self {
        let above = Self::EDGES.iter().filter(|&&edge| e_n >= T::lit(edge)).count();
        Self(1 + above as u8)
    }

    pub fn value(self) -> u8 {
        self.0
    }
}

fn frame_range(clock: FrameClock, start: f64, end: f64, n_frames: usize) -> std::ops::Range<usize> {
    let lo = clock.frame_at(start).min(n_frames);
    let hi = clock.frame_at(end).min(n_frames);
    lo..hi
}

/// Per syllable: mean normalized frame energy over its span, divided by the
/// largest such mean in the utterance, then binned.
pub fn compute_rii<T: Scalar>(
    syllables: &[SyllableSegment],
    energy: &EnergyTrack<T>,
    clock: FrameClock,
) -> Result<Vec<RelativeIntensity>> {
    let means = syllables
        .iter()
        .map(|s| {
            let r = frame_range(clock, s.start, s.end, energy.normalized.len());
            if r.is_empty() {
                return Err(Error::EmptySyllable {
                    start: s.start,
                    end: s.end,
                });
            }
            let n = T::from_usize_lossy(r.len());
            Ok(energy.normalized[r].iter().copied().sum::<T>() / n)
        })
        .collect::<Result<Vec<T>>>()?;
    let max = means.iter().copied().fold(T::zero(), T::max);
    Ok(means
        .into_iter()
        .map(|m| {
            let e_n = if max > T::zero() { m / max } else { T::zero() };
            RelativeIntensity::from_normalized(e_n)
        })
        .collect())
}

/// Maximal run of frames whose spectral flatness reaches the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SilenceRun {
    pub start: f64,
    pub first_frame: usize,
    pub frames: usize,
    /// `frames × hop`, in milliseconds.
    pub length_ms: f64,
}

impl SilenceRun {
    pub fn end(&self) -> f64 {
        self.start + self.length_ms / 1000.0
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && t <= self.end()
    }
}

pub const DEFAULT_SF_THRESHOLD: f64 = 0.75;

pub fn detect_silences<T: Scalar>(sf: &[T], threshold: T, clock: FrameClock) -> Vec<SilenceRun> {
    let hop_ms = clock.hop_samples as f64 * 1000.0 / f64::from(clock.sample_rate);
    let mut runs = Vec::new();
    let mut open: Option<usize> = None;
    for i in 0..=sf.len() {
        let silent = i < sf.len() && sf[i] >= threshold;
        match (open, silent) {
            (None, true) => open = Some(i),
            (Some(s), false) => {
                let frames = i - s;
                runs.push(SilenceRun {
                    start: clock.time(s),
                    first_frame: s,
                    frames,
                    length_ms: frames as f64 * hop_ms,
                });
                open = None;
            }
            _ => {}
        }
    }
    runs
}

/// Break strength at a word boundary, 1 to 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BreakIndex(u8);

impl BreakIndex {
    pub fn new(value: u8) -> Option<Self> {
        (1..=3).contains(&value).then_some(Self(value))
    }

    pub fn value(self) -> u8 {
        self.0
    }
}

/// Silence-length thresholds, in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BreakThresholds {
    pub minor_ms: f64,
    pub major_ms: f64,
}

impl Default for BreakThresholds {
    fn default() -> Self {
        Self {
            minor_ms: 80.0,
            major_ms: 290.0,
        }
    }
}

impl BreakThresholds {
    pub fn classify(&self, length_ms: f64) -> BreakIndex {
        if length_ms < self.minor_ms {
            BreakIndex(1)
        } else if length_ms < self.major_ms {
            BreakIndex(2)
        } else {
            BreakIndex(3)
        }
    }
}

/// One break index per boundary, from the length of the silence run that
/// covers the boundary time (zero when none does).
pub fn assign_break_indices(runs: &[SilenceRun], boundaries: &[f64], thresholds: &BreakThresholds) -> Vec<BreakIndex> {
    boundaries
        .iter()
        .map(|&b| {
            let l = runs
                .iter()
                .find(|r| r.contains(b))
                .map_or(0.0, |r| r.length_ms);
            thresholds.classify(l)
        })
        .collect()
}
