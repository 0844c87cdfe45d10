//! Frame-level measurements: short-term energy, spectral flatness and
//! the 39-dimensional cepstral vectors used for alignment.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::audio::{FrameSequence, FrameSpec};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const N_CEPS: usize = 13;
pub const FEATURE_DIM: usize = 3 * N_CEPS;

const MAG_FLOOR: f64 = 1e-10;
const MEL_FLOOR: f64 = 1e-10;

/// Mean squared amplitude of a frame.
pub fn short_term_energy<T: Scalar>(frame: &[T]) -> T {
    if frame.is_empty() {
        return T::zero();
    }
    frame.iter().map(|&x| x * x).sum::<T>() / T::from_usize_lossy(frame.len())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyTrack<T> {
    pub energy: Vec<T>,
    pub normalized: Vec<T>,
}

/// Divides every frame energy by the utterance maximum. All-zero input stays zero.
pub fn normalize_energy<T: Scalar>(energies: &[T]) -> EnergyTrack<T> {
    let max = energies.iter().copied().fold(T::zero(), T::max);
    let normalized = if max > T::zero() {
        energies.iter().map(|&e| e / max).collect()
    } else {
        vec![T::zero(); energies.len()]
    };
    EnergyTrack {
        energy: energies.to_vec(),
        normalized,
    }
}

/// Magnitude spectra of zero-padded frames, sharing one FFT plan.
pub struct SpectralAnalyzer<T: Scalar> {
    nfft: usize,
    fft: Arc<dyn Fft<T>>,
}

impl<T: Scalar> SpectralAnalyzer<T> {
    pub fn new(nfft: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(nfft);
        Self { nfft, fft }
    }

    pub fn nfft(&self) -> usize {
        self.nfft
    }

    fn transform(&self, frame: &[T], window: Option<&[T]>) -> Vec<Complex<T>> {
        let mut buf = vec![Complex::new(T::zero(), T::zero()); self.nfft];
        for (i, (slot, &x)) in buf.iter_mut().zip(frame).enumerate() {
            let w = window.map_or(T::one(), |w| w[i]);
            slot.re = x * w;
        }
        self.fft.process(&mut buf);
        buf
    }

    /// `|S_k|` for `k = 1..=nfft/2` with a rectangular window.
    pub fn magnitudes(&self, frame: &[T]) -> Vec<T> {
        let spec = self.transform(frame, None);
        spec[1..=self.nfft / 2].iter().map(|c| c.norm()).collect()
    }

    /// Ratio of geometric to arithmetic mean of the magnitude spectrum.
    ///
    /// Magnitudes are floored at 1e-10, so digital silence evaluates to
    /// exactly 1 and the result always lies in (0, 1].
    pub fn spectral_flatness(&self, frame: &[T]) -> T {
        let floor = T::lit(MAG_FLOOR);
        let mags = self.magnitudes(frame);
        let n = T::from_usize_lossy(mags.len());
        let (log_sum, sum) = mags.iter().fold((T::zero(), T::zero()), |(l, s), &m| {
            let m = m.max(floor);
            (l + m.ln(), s + m)
        });
        let sf = (log_sum / n).exp() / (sum / n);
        sf.min(T::one())
    }

    fn power_spectrum(&self, frame: &[T], window: &[T]) -> Vec<T> {
        let spec = self.transform(frame, Some(window));
        spec[..=self.nfft / 2].iter().map(|c| c.norm_sqr()).collect()
    }
}

pub fn spectral_flatness<T: Scalar>(frame: &[T], spec: &FrameSpec) -> T {
    SpectralAnalyzer::new(spec.nfft).spectral_flatness(frame)
}

/// Per-frame spectral flatness over a whole frame sequence.
pub fn flatness_track<T: Scalar>(frames: &FrameSequence<T>) -> Vec<T> {
    let analyzer = SpectralAnalyzer::new(frames.spec.nfft);
    frames
        .frames
        .iter()
        .map(|f| analyzer.spectral_flatness(f))
        .collect()
}

pub fn energy_track<T: Scalar>(frames: &FrameSequence<T>) -> EnergyTrack<T> {
    let raw: Vec<T> = frames.frames.iter().map(|f| short_term_energy(f)).collect();
    normalize_energy(&raw)
}

/// Cepstral feature settings, stored with trained models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub frame: FrameSpec,
    pub sample_rate: u32,
    pub n_filters: usize,
    pub n_ceps: usize,
    pub low_hz: f64,
    pub high_hz: f64,
    pub delta_window: usize,
    pub mean_normalize: bool,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            frame: FrameSpec::default(),
            sample_rate: crate::audio::TARGET_RATE,
            n_filters: 26,
            n_ceps: N_CEPS,
            low_hz: 0.0,
            high_hz: 8000.0,
            delta_window: 2,
            mean_normalize: true,
        }
    }
}

/// 13 cepstra, 13 deltas, 13 delta-deltas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector<T>(pub [T; FEATURE_DIM]);

impl<T> AsRef<[T]> for FeatureVector<T> {
    fn as_ref(&self) -> &[T] {
        &self.0
    }
}

impl<T: Scalar> FeatureVector<T> {
    pub fn statics(&self) -> &[T] {
        &self.0[..N_CEPS]
    }
}

fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// MFCC front end with precomputed filterbank, window and DCT tables.
pub struct MfccExtractor<T: Scalar> {
    analyzer: SpectralAnalyzer<T>,
    window: Vec<T>,
    filters: Vec<Vec<(usize, T)>>,
    dct: Vec<Vec<T>>,
    config: FeatureConfig,
}

impl<T: Scalar> MfccExtractor<T> {
    pub fn new(config: &FeatureConfig) -> Self {
        assert_eq!(config.n_ceps, N_CEPS, "feature layout is fixed at 13 cepstra");
        let frame_len = config.frame.frame_samples(config.sample_rate);
        let nfft = config.frame.nfft;
        let window = (0..frame_len)
            .map(|i| {
                let phase = 2.0 * std::f64::consts::PI * i as f64 / (frame_len as f64 - 1.0);
                T::lit(0.54 - 0.46 * phase.cos())
            })
            .collect();

        let mel_lo = hz_to_mel(config.low_hz);
        let mel_hi = hz_to_mel(config.high_hz);
        let m = config.n_filters;
        let edges: Vec<f64> = (0..m + 2)
            .map(|i| mel_to_hz(mel_lo + (mel_hi - mel_lo) * i as f64 / (m + 1) as f64))
            .collect();
        let bin_hz = f64::from(config.sample_rate) / nfft as f64;
        let filters = (0..m)
            .map(|j| {
                let (lo, mid, hi) = (edges[j], edges[j + 1], edges[j + 2]);
                (0..=nfft / 2)
                    .filter_map(|k| {
                        let f = k as f64 * bin_hz;
                        let w = if f > lo && f <= mid {
                            (f - lo) / (mid - lo)
                        } else if f > mid && f < hi {
                            (hi - f) / (hi - mid)
                        } else {
                            0.0
                        };
                        (w > 0.0).then(|| (k, T::lit(w)))
                    })
                    .collect()
            })
            .collect();

        let dct = (0..config.n_ceps)
            .map(|k| {
                let norm = if k == 0 {
                    (1.0 / m as f64).sqrt()
                } else {
                    (2.0 / m as f64).sqrt()
                };
                (0..m)
                    .map(|j| {
                        let arg = std::f64::consts::PI * k as f64 * (j as f64 + 0.5) / m as f64;
                        T::lit(norm * arg.cos())
                    })
                    .collect()
            })
            .collect();

        Self {
            analyzer: SpectralAnalyzer::new(nfft),
            window,
            filters,
            dct,
            config: config.clone(),
        }
    }

    /// Static cepstra of one frame (before mean normalization).
    pub fn cepstra(&self, frame: &[T]) -> [T; N_CEPS] {
        let power = self.analyzer.power_spectrum(frame, &self.window);
        let floor = T::lit(MEL_FLOOR);
        let log_mel: Vec<T> = self
            .filters
            .iter()
            .map(|f| {
                let e: T = f.iter().map(|&(k, w)| power[k] * w).sum();
                e.max(floor).ln()
            })
            .collect();
        let mut out = [T::zero(); N_CEPS];
        for (c, row) in out.iter_mut().zip(&self.dct) {
            *c = row.iter().zip(&log_mel).map(|(&a, &b)| a * b).sum();
        }
        out
    }

    pub fn extract(&self, frames: &FrameSequence<T>) -> Result<Vec<FeatureVector<T>>> {
        if frames.len() < 3 {
            return Err(Error::TooFewFrames {
                got: frames.len(),
                required: 3,
            });
        }
        let mut statics: Vec<[T; N_CEPS]> = frames.frames.iter().map(|f| self.cepstra(f)).collect();
        if self.config.mean_normalize {
            let n = T::from_usize_lossy(statics.len());
            let mut mean = [T::zero(); N_CEPS];
            for s in &statics {
                for (m, &v) in mean.iter_mut().zip(s) {
                    *m = *m + v;
                }
            }
            for m in &mut mean {
                *m = *m / n;
            }
            for s in &mut statics {
                for (v, &m) in s.iter_mut().zip(&mean) {
                    *v = *v - m;
                }
            }
        }
        let deltas = regression_deltas(&statics, self.config.delta_window);
        let accel = regression_deltas(&deltas, self.config.delta_window);
        Ok(statics
            .iter()
            .zip(&deltas)
            .zip(&accel)
            .map(|((s, d), a)| {
                let mut v = [T::zero(); FEATURE_DIM];
                v[..N_CEPS].copy_from_slice(s);
                v[N_CEPS..2 * N_CEPS].copy_from_slice(d);
                v[2 * N_CEPS..].copy_from_slice(a);
                FeatureVector(v)
            })
            .collect())
    }
}

/// Linear-regression deltas over `±width` frames; edges replicate the end frames.
fn regression_deltas<T: Scalar>(rows: &[[T; N_CEPS]], width: usize) -> Vec<[T; N_CEPS]> {
    let n = rows.len() as isize;
    let denom = T::lit(2.0 * (1..=width).map(|k| (k * k) as f64).sum::<f64>());
    (0..n)
        .map(|t| {
            let mut out = [T::zero(); N_CEPS];
            for k in 1..=width as isize {
                let fwd = &rows[(t + k).min(n - 1) as usize];
                let back = &rows[(t - k).max(0) as usize];
                let kf = T::lit(k as f64);
                for (o, (&f, &b)) in out.iter_mut().zip(fwd.iter().zip(back)) {
                    *o = *o + kf * (f - b);
                }
            }
            for o in &mut out {
                *o = *o / denom;
            }
            out
        })
        .collect()
}

pub fn compute_features<T: Scalar>(frames: &FrameSequence<T>) -> Result<Vec<FeatureVector<T>>> {
    let config = FeatureConfig {
        frame: frames.spec,
        sample_rate: frames.sample_rate,
        ..FeatureConfig::default()
    };
    MfccExtractor::new(&config).extract(frames)
}
