use serde::{Deserialize, Serialize};

use super::gci::GciSequence;
use crate::audio::{FrameClock, FrameSequence};
use crate::scalar::Scalar;

/// Per-frame F0; `None` marks an unvoiced frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PitchTrack<T> {
    pub times: Vec<f64>,
    pub f0: Vec<Option<T>>,
}

impl<T: Scalar> PitchTrack<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn voiced(&self) -> impl Iterator<Item = (f64, T)> + '_ {
        self.times.iter().zip(&self.f0).filter_map(|(&t, f)| f.map(|f| (t, f)))
    }
}

/// Shortest and longest accepted GCI spacing, in seconds.
pub const MIN_PERIOD: f64 = 0.002;
pub const MAX_PERIOD: f64 = 0.020;

/// F0 per frame of `frames`. See [`f0_track`].
pub fn f0_from_gcis<T: Scalar>(gcis: &GciSequence, frames: &FrameSequence<T>) -> PitchTrack<T> {
    f0_track(gcis, frames.clock(), frames.len())
}

/// Frame `k` owns the interval `[t_k, t_k + hop)`. Each consecutive GCI pair
/// whose spacing lies in `[MIN_PERIOD, MAX_PERIOD]` contributes its spacing
/// to the frame holding the pair's midpoint; F0 is the reciprocal of the
/// mean contributed spacing.
pub fn f0_track<T: Scalar>(gcis: &GciSequence, clock: FrameClock, n_frames: usize) -> PitchTrack<T> {
    let mut sums = vec![0.0f64; n_frames];
    let mut counts = vec![0usize; n_frames];
    let hop = clock.hop_seconds();
    for pair in gcis.times.windows(2) {
        let period = pair[1] - pair[0];
        // Tolerate rounding of spacings that sit exactly on a limit.
        if !(MIN_PERIOD - 1e-9..=MAX_PERIOD + 1e-9).contains(&period) {
            continue;
        }
        let mid = 0.5 * (pair[0] + pair[1]);
        let k = (mid / hop + 1e-9).floor();
        if k < 0.0 || k as usize >= n_frames {
            continue;
        }
        sums[k as usize] += period;
        counts[k as usize] += 1;
    }
    PitchTrack {
        times: (0..n_frames).map(|k| clock.time(k)).collect(),
        f0: sums
            .iter()
            .zip(&counts)
            .map(|(&s, &n)| (n > 0).then(|| T::lit(n as f64 / s)))
            .collect(),
    }
}
