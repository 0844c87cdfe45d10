//! Deterministic synthetic speech for tests and demos.
//!
//! Voiced phones are a differenced impulse train (so the signal carries no
//! DC) shaped by a cascade of three formant resonators; unvoiced phones are band-passed noise; silence is a faint
//! noise floor. The impulse times are returned as ground-truth GCIs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::audio::{AudioBuffer, TARGET_RATE};
use crate::document::Interval;
use crate::phones::{Inventory, Phone};
use crate::pipeline::{TrainingUtterance, TranscribedWord, Transcription};

/// How a phone is rendered.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sound {
    Voiced { formants: [f64; 3], gain: f64 },
    Noise { centre: f64, bandwidth: f64, gain: f64 },
    Silence,
}

/// Phones the synthesizer knows.
pub fn sound(label: &str) -> Option<Sound> {
    let v = |f1, f2, f3| Sound::Voiced {
        formants: [f1, f2, f3],
        gain: 1.0,
    };
    let nasal = |f2| Sound::Voiced {
        formants: [250.0, f2, 2500.0],
        gain: 0.4,
    };
    let noise = |centre, bandwidth, gain| Sound::Noise {
        centre,
        bandwidth,
        gain,
    };
    Some(match label {
        "a" => v(700.0, 1200.0, 2600.0),
        "i" => v(300.0, 2300.0, 3000.0),
        "u" => v(350.0, 800.0, 2300.0),
        "e" => v(450.0, 1900.0, 2600.0),
        "o" => v(500.0, 900.0, 2500.0),
        "m" => nasal(1000.0),
        "n" => nasal(1600.0),
        "l" => Sound::Voiced {
            formants: [380.0, 1100.0, 2900.0],
            gain: 0.5,
        },
        "s" => noise(5500.0, 2000.0, 0.25),
        "k" => noise(2500.0, 1200.0, 0.2),
        "t" => noise(4000.0, 1500.0, 0.2),
        "p" => noise(1200.0, 1000.0, 0.15),
        "sil" => Sound::Silence,
        _ => return None,
    })
}

/// Inventory of every phone [`sound`] knows.
pub fn inventory() -> Inventory {
    let phones = ["a", "i", "u", "e", "o", "m", "n", "l", "s", "k", "t", "p"].map(|l| match sound(l) {
        Some(Sound::Voiced { .. }) if "aiueo".contains(l) => Phone::vowel(l),
        Some(Sound::Voiced { .. }) => Phone::consonant(l, true),
        _ => Phone::consonant(l, false),
    });
    Inventory::new(phones).expect("distinct labels")
}

/// Two-pole resonator with unit gain at its centre frequency.
#[derive(Debug, Clone, Copy, Default)]
struct Resonator {
    b0: f64,
    a1: f64,
    a2: f64,
    y1: f64,
    y2: f64,
}

impl Resonator {
    fn tune(&mut self, freq: f64, bandwidth: f64, rate: f64) {
        let r = (-std::f64::consts::PI * bandwidth / rate).exp();
        let theta = 2.0 * std::f64::consts::PI * freq / rate;
        self.a1 = 2.0 * r * theta.cos();
        self.a2 = -r * r;
        // |1 - a1 z^-1 - a2 z^-2| at z = e^{jθ}.
        let re = 1.0 - self.a1 * theta.cos() - self.a2 * (2.0 * theta).cos();
        let im = self.a1 * theta.sin() + self.a2 * (2.0 * theta).sin();
        self.b0 = (re * re + im * im).sqrt();
    }

    fn step(&mut self, x: f64) -> f64 {
        let y = self.b0 * x + self.a1 * self.y1 + self.a2 * self.y2;
        self.y2 = self.y1;
        self.y1 = y;
        y
    }
}

#[derive(Debug, Clone)]
pub struct SynthUtterance {
    pub audio: AudioBuffer<f64>,
    /// `(label, start, end)` in seconds, on sample boundaries.
    pub segments: Vec<(String, f64, f64)>,
    /// Excitation instants in seconds.
    pub gcis: Vec<f64>,
}

pub const FORMANT_BANDWIDTHS: [f64; 3] = [80.0, 110.0, 150.0];
/// Standard deviation of the background noise.
pub const NOISE_FLOOR: f64 = 1e-3;
/// RMS of a voiced phone with unit gain.
pub const VOICED_RMS: f64 = 0.1;

/// Energy of the cascade's impulse response.
fn impulse_energy(formants: &[Resonator; 3]) -> f64 {
    let mut fresh = formants.map(|r| Resonator { y1: 0.0, y2: 0.0, ..r });
    (0..4000)
        .map(|i| {
            let x = match i {
                0 => 1.0,
                1 => -1.0,
                _ => 0.0,
            };
            let y = fresh.iter_mut().fold(x, |acc, r| r.step(acc));
            y * y
        })
        .sum()
}

/// Renders `(label, duration)` pairs at 16 kHz. `f0` maps time to Hz.
///
/// Panics on a label unknown to [`sound`].
pub fn synthesize(phones: &[(&str, f64)], f0: impl Fn(f64) -> f64, seed: u64) -> SynthUtterance {
    let rate = f64::from(TARGET_RATE);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut samples = Vec::new();
    let mut segments = Vec::with_capacity(phones.len());
    let mut gcis = Vec::new();
    let mut formants = [Resonator::default(); 3];
    let mut band = Resonator::default();
    let mut phase = 0.0f64;
    let mut energy = 1.0;
    let mut previous = 0.0;
    for &(label, duration) in phones {
        let snd = sound(label).unwrap_or_else(|| panic!("no sound for phone '{label}'"));
        let start = samples.len();
        let n = (duration * rate).round() as usize;
        match snd {
            Sound::Voiced { formants: f, .. } => {
                for (res, (&freq, &bw)) in formants.iter_mut().zip(f.iter().zip(&FORMANT_BANDWIDTHS)) {
                    res.tune(freq, bw, rate);
                }
                energy = impulse_energy(&formants);
            }
            Sound::Noise { centre, bandwidth, .. } => band.tune(centre, bandwidth, rate),
            Sound::Silence => {}
        }
        for i in start..start + n {
            let t = i as f64 / rate;
            phase += f0(t) / rate;
            let pulse = if phase >= 1.0 {
                phase -= 1.0;
                true
            } else {
                false
            };
            let floor = NOISE_FLOOR * normal.sample(&mut rng);
            let y = match snd {
                Sound::Voiced { gain, .. } => {
                    if pulse {
                        gcis.push(t);
                    }
                    // Scaled so that a steady pulse train reaches VOICED_RMS.
                    let x = if pulse {
                        gain * VOICED_RMS * (rate / f0(t) / energy).sqrt()
                    } else {
                        0.0
                    };
                    let e = x - previous;
                    previous = x;
                    formants.iter_mut().fold(e, |acc, r| r.step(acc))
                }
                Sound::Noise { gain, .. } => {
                    previous = 0.0;
                    for r in &mut formants {
                        r.step(0.0);
                    }
                    band.step(gain * normal.sample(&mut rng))
                }
                Sound::Silence => {
                    previous = 0.0;
                    for r in &mut formants {
                        r.step(0.0);
                    }
                    0.0
                }
            };
            samples.push(y + floor);
        }
        segments.push((label.to_owned(), start as f64 / rate, samples.len() as f64 / rate));
    }
    SynthUtterance {
        audio: AudioBuffer::new(samples, TARGET_RATE),
        segments,
        gcis,
    }
}

/// Adds white Gaussian noise at `snr_db` relative to the signal power.
pub fn add_noise(audio: &AudioBuffer<f64>, snr_db: f64, seed: u64) -> AudioBuffer<f64> {
    let power = audio.samples.iter().map(|x| x * x).sum::<f64>() / audio.len().max(1) as f64;
    let sigma = (power / 10f64.powf(snr_db / 10.0)).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma.max(f64::MIN_POSITIVE)).expect("finite sigma");
    AudioBuffer::new(
        audio.samples.iter().map(|x| x + normal.sample(&mut rng)).collect(),
        audio.sample_rate,
    )
}

/// Words built only from phones [`sound`] knows, one character per phone.
pub const DEMO_WORDS: [&str; 10] = [
    "kamal", "nila", "pasu", "malai", "tami", "solai", "amma", "kili", "punal", "netu",
];

/// Silence before the first and after the last word.
pub const EDGE_SILENCE: f64 = 0.2;

fn nominal_duration(label: &str) -> f64 {
    match sound(label) {
        Some(Sound::Voiced { .. }) if "aiueo".contains(label) => 0.12,
        Some(Sound::Voiced { .. }) => 0.07,
        _ => 0.08,
    }
}

/// Renders `words` separated by `pauses` (seconds, one fewer than words)
/// with phone durations jittered by up to 20%.
pub fn utterance(words: &[&str], pauses: &[f64], f0: impl Fn(f64) -> f64, seed: u64) -> (SynthUtterance, Transcription) {
    assert_eq!(pauses.len() + 1, words.len(), "one pause between each pair of words");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9E37_79B9);
    let labels: Vec<Vec<String>> = words.iter().map(|w| w.chars().map(String::from).collect()).collect();
    let mut phones: Vec<(&str, f64)> = vec![("sil", EDGE_SILENCE)];
    for (i, word) in labels.iter().enumerate() {
        for p in word {
            phones.push((p, nominal_duration(p) * rng.random_range(0.8..1.2)));
        }
        phones.push(("sil", pauses.get(i).copied().unwrap_or(EDGE_SILENCE)));
    }
    let transcription = Transcription {
        language: None,
        words: words
            .iter()
            .zip(labels.iter())
            .map(|(w, p)| TranscribedWord {
                text: (*w).to_owned(),
                phones: p.clone(),
            })
            .collect(),
    };
    (synthesize(&phones, f0, seed), transcription)
}

/// `n` utterances of two or three random words with ground-truth phone
/// labels on every `seed_every`-th one.
pub fn training_set(n: usize, seed_every: usize, seed: u64) -> Vec<TrainingUtterance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let count = rng.random_range(2..=3);
            let words: Vec<&str> = (0..count).map(|_| DEMO_WORDS[rng.random_range(0..DEMO_WORDS.len())]).collect();
            let pauses: Vec<f64> = (1..count).map(|_| rng.random_range(0.05..0.4)).collect();
            let base = rng.random_range(90.0..160.0);
            let slope = rng.random_range(-40.0..10.0);
            let (u, transcription) = utterance(&words, &pauses, move |t| base + slope * t, rng.random());
            let seed_labels = (i % seed_every.max(1) == 0).then(|| {
                u.segments
                    .iter()
                    .map(|(l, s, e)| Interval::new(*s, *e, l.as_str()))
                    .collect()
            });
            TrainingUtterance {
                id: format!("utt{i:03}"),
                audio: u.audio,
                transcription,
                seed_labels,
            }
        })
        .collect()
}
