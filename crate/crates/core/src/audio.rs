//! Waveform loading, resampling and framing.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Analysis sample rate every downstream stage assumes.
pub const TARGET_RATE: u32 = 16_000;

/// Mono waveform with amplitudes in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer<T> {
    pub samples: Vec<T>,
    pub sample_rate: u32,
}

impl<T: Scalar> AudioBuffer<T> {
    pub fn new(samples: Vec<T>, sample_rate: u32) -> Self {
        Self {
            samples,
            sample_rate,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate)
    }

    /// Subtracts the utterance mean. Applied once before framing.
    pub fn remove_dc(&mut self) {
        if self.samples.is_empty() {
            return;
        }
        let mean = self.samples.iter().copied().sum::<T>() / T::from_usize_lossy(self.len());
        for s in &mut self.samples {
            *s = *s - mean;
        }
    }
}

/// Frame geometry: window length and hop in seconds, FFT size in points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FrameSpec {
    pub frame_len: f64,
    pub hop: f64,
    pub nfft: usize,
}

impl Default for FrameSpec {
    fn default() -> Self {
        Self {
            frame_len: 0.020,
            hop: 0.010,
            nfft: 512,
        }
    }
}

impl FrameSpec {
    pub fn frame_samples(&self, rate: u32) -> usize {
        (self.frame_len * f64::from(rate)).round() as usize
    }

    pub fn hop_samples(&self, rate: u32) -> usize {
        (self.hop * f64::from(rate)).round() as usize
    }

    pub fn validate(&self, rate: u32) -> Result<()> {
        let frame = self.frame_samples(rate);
        let hop = self.hop_samples(rate);
        if frame == 0 || hop == 0 {
            return Err(Error::FrameSpec("frame and hop must be at least one sample".into()));
        }
        if hop > frame {
            return Err(Error::FrameSpec(format!(
                "hop ({hop} samples) exceeds frame length ({frame} samples)"
            )));
        }
        if self.nfft < frame {
            return Err(Error::FrameSpec(format!(
                "nfft {} shorter than frame length {frame}",
                self.nfft
            )));
        }
        Ok(())
    }
}

/// Start time in seconds of frame `index`, rounded to the microsecond grid
/// used by every time value in the annotation tiers.
pub fn frame_time(index: usize, hop_samples: usize, rate: u32) -> f64 {
    quantize_time((index * hop_samples) as f64 / f64::from(rate))
}

/// Rounds a time to whole microseconds.
pub fn quantize_time(t: f64) -> f64 {
    (t * 1e6).round() / 1e6
}

/// Converts between frame indices and seconds on the hop grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameClock {
    pub hop_samples: usize,
    pub sample_rate: u32,
}

impl FrameClock {
    pub fn new(spec: &FrameSpec, sample_rate: u32) -> Self {
        Self {
            hop_samples: spec.hop_samples(sample_rate),
            sample_rate,
        }
    }

    pub fn time(&self, frame: usize) -> f64 {
        frame_time(frame, self.hop_samples, self.sample_rate)
    }

    /// Nearest frame index to a time; negative times map to 0.
    pub fn frame_at(&self, t: f64) -> usize {
        let f = t * f64::from(self.sample_rate) / self.hop_samples as f64;
        f.round().max(0.0) as usize
    }

    pub fn hop_seconds(&self) -> f64 {
        self.hop_samples as f64 / f64::from(self.sample_rate)
    }
}

/// Overlapping raw sample windows. No window function is applied here.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence<T> {
    pub frames: Vec<Vec<T>>,
    pub frame_times: Vec<f64>,
    pub spec: FrameSpec,
    pub sample_rate: u32,
}

impl<T> FrameSequence<T> {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn hop_samples(&self) -> usize {
        self.spec.hop_samples(self.sample_rate)
    }

    pub fn clock(&self) -> FrameClock {
        FrameClock::new(&self.spec, self.sample_rate)
    }

    /// Frame-quantized duration: `len() * hop`.
    pub fn quantized_duration(&self) -> f64 {
        frame_time(self.len(), self.hop_samples(), self.sample_rate)
    }
}

pub fn frame_signal<T: Scalar>(audio: &AudioBuffer<T>, spec: &FrameSpec) -> Result<FrameSequence<T>> {
    spec.validate(audio.sample_rate)?;
    let frame = spec.frame_samples(audio.sample_rate);
    let hop = spec.hop_samples(audio.sample_rate);
    let n = audio.len();
    if n < frame {
        return Err(Error::TooShort {
            samples: n,
            required: frame,
        });
    }
    let count = (n - frame) / hop + 1;
    let frames = (0..count)
        .map(|k| audio.samples[k * hop..k * hop + frame].to_vec())
        .collect();
    let frame_times = (0..count)
        .map(|k| frame_time(k, hop, audio.sample_rate))
        .collect();
    Ok(FrameSequence {
        frames,
        frame_times,
        spec: *spec,
        sample_rate: audio.sample_rate,
    })
}

/// Reads a PCM WAV file, averages channels to mono and resamples to 16 kHz.
/// Amplitudes are not peak-normalized.
pub fn load_audio<T: Scalar>(path: impl AsRef<Path>) -> Result<AudioBuffer<T>> {
    let path = path.as_ref();
    let audio_err = |reason: String| Error::Audio {
        path: path.to_path_buf(),
        reason,
    };
    let reader = hound::WavReader::open(path).map_err(|e| match e {
        hound::Error::IoError(io) => Error::io(path, io),
        other => audio_err(other.to_string()),
    })?;
    let spec = reader.spec();
    if spec.sample_format != hound::SampleFormat::Int {
        return Err(audio_err("unsupported encoding: only integer PCM is accepted".into()));
    }
    if !matches!(spec.bits_per_sample, 8 | 16 | 24) {
        return Err(audio_err(format!(
            "unsupported encoding: {}-bit PCM",
            spec.bits_per_sample
        )));
    }
    if !(1..=2).contains(&spec.channels) {
        return Err(audio_err(format!("unsupported channel count {}", spec.channels)));
    }
    let scale = 1.0 / f64::from(1u32 << (spec.bits_per_sample - 1));
    let raw = reader
        .into_samples::<i32>()
        .map(|s| s.map(|v| f64::from(v) * scale))
        .collect::<std::result::Result<Vec<f64>, _>>()
        .map_err(|e| audio_err(e.to_string()))?;

    let channels = usize::from(spec.channels);
    let mono: Vec<f64> = raw
        .chunks_exact(channels)
        .map(|c| c.iter().sum::<f64>() / channels as f64)
        .collect();
    if mono.is_empty() {
        return Err(Error::EmptyAudio);
    }
    let samples = if spec.sample_rate == TARGET_RATE {
        mono
    } else {
        resample(&mono, spec.sample_rate, TARGET_RATE)
    };
    Ok(AudioBuffer::new(
        samples.into_iter().map(T::lit).collect(),
        TARGET_RATE,
    ))
}

/// Writes 16-bit mono PCM. Samples are clipped to [-1, 1].
pub fn write_wav<T: Scalar>(audio: &AudioBuffer<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: audio.sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let to_err = |e: hound::Error| match e {
        hound::Error::IoError(io) => Error::io(path, io),
        other => Error::Audio {
            path: path.to_path_buf(),
            reason: other.to_string(),
        },
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(to_err)?;
    for &s in &audio.samples {
        let v = (s.as_f64().clamp(-1.0, 1.0) * 32767.0).round() as i16;
        writer.write_sample(v).map_err(to_err)?;
    }
    writer.finalize().map_err(to_err)
}

const KAISER_BETA: f64 = 7.857; // ~80 dB stopband
const CUTOFF: f64 = 0.45; // fraction of the lower sample rate
const HALF_WIDTH: f64 = 32.0; // in periods of the lower rate

/// Kaiser-windowed sinc resampler. Output length is `ceil(n * to / from)`.
pub fn resample(input: &[f64], from: u32, to: u32) -> Vec<f64> {
    if from == to {
        return input.to_vec();
    }
    let n_in = input.len();
    let n_out = (n_in as u64 * u64::from(to)).div_ceil(u64::from(from)) as usize;
    let ratio = f64::from(to) / f64::from(from);
    let scale = ratio.min(1.0);
    // Cutoff in cycles per input sample.
    let fc = CUTOFF * scale;
    let half = HALF_WIDTH / scale;
    let i0_beta = bessel_i0(KAISER_BETA);

    (0..n_out)
        .map(|n| {
            let t = n as f64 / ratio;
            let lo = (t - half).ceil().max(0.0) as usize;
            let hi = ((t + half).floor() as usize).min(n_in.saturating_sub(1));
            let mut acc = 0.0;
            for (k, &x) in input.iter().enumerate().take(hi + 1).skip(lo) {
                let u = t - k as f64;
                let r = u / half;
                let w = bessel_i0(KAISER_BETA * (1.0 - r * r).max(0.0).sqrt()) / i0_beta;
                acc += x * 2.0 * fc * sinc(2.0 * fc * u) * w;
            }
            acc
        })
        .collect()
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let half = x / 2.0;
    for k in 1..64 {
        term *= (half / k as f64) * (half / k as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}
