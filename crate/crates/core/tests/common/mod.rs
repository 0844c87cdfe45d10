#![allow(dead_code)]

use std::sync::OnceLock;

use prosody_core::pipeline::{train_models, Transcription};
use prosody_core::synth::{self, SynthUtterance};
use prosody_core::{Config, ModelSet};

/// Models trained once per test binary on synthetic speech.
pub fn synth_models() -> &'static ModelSet {
    static MODELS: OnceLock<ModelSet> = OnceLock::new();
    MODELS.get_or_init(|| {
        let corpus = synth::training_set(40, 2, 11);
        train_models(&corpus, synth::inventory(), None, &Config::default())
            .expect("training on synthetic speech")
            .models
    })
}

/// Two words around a 400 ms pause on a steady 100 Hz voice.
pub fn two_word_utterance() -> (SynthUtterance, Transcription) {
    synth::utterance(&["kamal", "nila"], &[0.4], |_| 100.0, 42)
}

/// Result of running GCI detection on a steady synthetic vowel.
#[derive(Debug)]
pub struct GciProbe {
    /// Share of detected spacings within 0.5 ms of the true period.
    pub spacing_ok: f64,
    pub median_f0: f64,
    pub detected: usize,
    pub truth: usize,
}

/// One second of /a/ at `f0` Hz, optionally with white noise at `snr_db`.
pub fn probe_gcis(f0: f64, snr_db: Option<f64>, seed: u64) -> GciProbe {
    use prosody_core::align::PhonemeSegment;
    use prosody_core::audio::{frame_signal, FrameSpec};
    use prosody_core::phones::Phone;
    use prosody_core::pitch::{detect_gcis, f0_from_gcis, GciConfig, PitchTrack};

    let u = synth::synthesize(&[("sil", 0.1), ("a", 1.0), ("sil", 0.1)], |_| f0, seed);
    let audio = match snr_db {
        Some(snr) => synth::add_noise(&u.audio, snr, seed + 1),
        None => u.audio.clone(),
    };
    let segments: Vec<PhonemeSegment> = u
        .segments
        .iter()
        .map(|(l, s, e)| PhonemeSegment {
            phone: if l == "a" { Phone::vowel(l) } else { Phone::silence() },
            start: *s,
            end: *e,
        })
        .collect();
    let gcis = detect_gcis(&audio, &segments, &GciConfig::default());
    let spacings: Vec<f64> = gcis.spacings().collect();
    let period = 1.0 / f0;
    let ok = spacings.iter().filter(|&&d| (d - period).abs() <= 0.5e-3).count();
    let frames = frame_signal(&audio, &FrameSpec::default()).unwrap();
    let track: PitchTrack<f64> = f0_from_gcis(&gcis, &frames);
    let mut voiced: Vec<f64> = track.f0.iter().flatten().copied().collect();
    voiced.sort_by(f64::total_cmp);
    GciProbe {
        spacing_ok: ok as f64 / spacings.len().max(1) as f64,
        median_f0: voiced.get(voiced.len() / 2).copied().unwrap_or(0.0),
        detected: gcis.len(),
        truth: u.gcis.len(),
    }
}

pub mod hmm {
    //! Feature sequences sampled from known phone HMMs, and an exhaustive
    //! path search used as an oracle for Viterbi.

    use prosody_core::align::{CorpusUtterance, DiagGmm, HmmState, LabeledSpan, MonophoneModel, SeedUtterance};
    use prosody_core::audio::{FrameClock, FrameSpec};
    use prosody_core::features::FeatureConfig;
    use prosody_core::phones::{Inventory, Phone, SILENCE};
    use prosody_core::ModelSet;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    pub fn clock() -> FrameClock {
        FrameClock::new(&FrameSpec::default(), 16_000)
    }

    /// Random single-Gaussian models over `dim` dimensions for `labels`
    /// plus `sil`.
    pub fn random_models(labels: &[String], dim: usize, spread: f64, rng: &mut ChaCha8Rng) -> ModelSet {
        let phones = labels.iter().map(|l| Phone::vowel(l));
        let inventory = Inventory::new(phones).unwrap();
        let mut set = ModelSet::new(FeatureConfig::default(), inventory.clone(), 1e-6);
        for label in inventory.labels() {
            let states = (0..3)
                .map(|_| {
                    let gmm = DiagGmm {
                        weights: vec![1.0],
                        means: vec![(0..dim).map(|_| rng.random_range(-spread..spread)).collect()],
                        variances: vec![(0..dim).map(|_| rng.random_range(0.5..1.5)).collect()],
                    };
                    HmmState::new(gmm, rng.random_range(0.5..0.8))
                })
                .collect();
            set.models.insert(
                label.to_owned(),
                MonophoneModel {
                    label: label.to_owned(),
                    states,
                },
            );
        }
        set.validate().unwrap();
        set
    }

    /// One utterance sampled from `models`: `sil`, `phones`, `sil`, with
    /// the true span of every phone in frames.
    pub fn sample(models: &ModelSet, phones: &[String], rng: &mut ChaCha8Rng) -> (Vec<Vec<f64>>, Vec<LabeledSpan>) {
        let normal = Normal::new(0.0, 1.0).unwrap();
        let mut feats = Vec::new();
        let mut spans = Vec::new();
        let seq: Vec<&str> = std::iter::once(SILENCE)
            .chain(phones.iter().map(String::as_str))
            .chain(std::iter::once(SILENCE))
            .collect();
        for label in seq {
            let start = feats.len();
            for state in &models.models[label].states {
                loop {
                    let x: Vec<f64> = state.gmm.means[0]
                        .iter()
                        .zip(&state.gmm.variances[0])
                        .map(|(m, v)| m + v.sqrt() * normal.sample(rng))
                        .collect();
                    feats.push(x);
                    if rng.random::<f64>() >= state.self_loop {
                        break;
                    }
                }
            }
            spans.push(LabeledSpan {
                label: label.to_owned(),
                start,
                end: feats.len(),
            });
        }
        (feats, spans)
    }

    pub struct Corpus {
        pub truth: ModelSet,
        pub utterances: Vec<(Vec<Vec<f64>>, Vec<LabeledSpan>)>,
    }

    impl Corpus {
        /// `n` utterances of 4 to 8 random phones drawn from `n_phones`
        /// 13-dimensional models.
        pub fn generate(n_phones: usize, n: usize, seed: u64) -> Self {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let labels: Vec<String> = (0..n_phones).map(|i| format!("p{i}")).collect();
            let truth = random_models(&labels, 13, 3.0, &mut rng);
            let utterances = (0..n)
                .map(|_| {
                    let len = rng.random_range(4..=8);
                    let phones: Vec<String> = (0..len).map(|_| labels[rng.random_range(0..n_phones)].clone()).collect();
                    sample(&truth, &phones, &mut rng)
                })
                .collect();
            Self { truth, utterances }
        }

        pub fn seed(&self, count: usize) -> Vec<SeedUtterance<Vec<f64>>> {
            self.utterances[..count]
                .iter()
                .enumerate()
                .map(|(i, (f, s))| SeedUtterance {
                    id: format!("seed{i}"),
                    features: f.clone(),
                    spans: s.clone(),
                })
                .collect()
        }

        pub fn corpus(&self) -> Vec<CorpusUtterance<Vec<f64>>> {
            self.utterances
                .iter()
                .enumerate()
                .map(|(i, (f, s))| CorpusUtterance {
                    id: format!("utt{i}"),
                    features: f.clone(),
                    phones: s.iter().map(|x| x.label.clone()).collect(),
                })
                .collect()
        }
    }

    /// Best path score by enumerating every legal state sequence.
    ///
    /// Edge silences have three states, interior ones only the middle
    /// state, and every silence may be skipped. Returns `None` when no
    /// path fits.
    pub fn brute_force_best(models: &ModelSet, phones: &[&str], feats: &[Vec<f64>]) -> Option<f64> {
        // Flat states: (unit, model state, last state of unit)
        let n = phones.len();
        let mut flat: Vec<(usize, usize)> = Vec::new();
        let mut first = Vec::new();
        let mut last = Vec::new();
        for (u, p) in phones.iter().enumerate() {
            let states: &[usize] = if *p == SILENCE && u != 0 && u + 1 != n { &[1] } else { &[0, 1, 2] };
            first.push(flat.len());
            for &s in states {
                flat.push((u, s));
            }
            last.push(flat.len() - 1);
        }
        let skippable = |u: usize| phones[u] == SILENCE;
        let state = |j: usize| &models.models[phones[flat[j].0]].states[flat[j].1];
        let emit = |j: usize, t: usize| state(j).gmm.log_likelihood(&feats[t]);
        let moves = |j: usize| -> Vec<(usize, f64)> {
            let s = state(j);
            let mut out = vec![(j, s.self_loop.ln())];
            let u = flat[j].0;
            if j != last[u] {
                out.push((j + 1, s.forward.ln()));
            } else {
                for v in u + 1..n {
                    out.push((first[v], s.forward.ln()));
                    if !skippable(v) {
                        break;
                    }
                }
            }
            out
        };
        let can_end = |j: usize| {
            let u = flat[j].0;
            j == last[u] && (u + 1..n).all(skippable)
        };

        fn walk(
            j: usize,
            t: usize,
            acc: f64,
            frames: usize,
            moves: &dyn Fn(usize) -> Vec<(usize, f64)>,
            emit: &dyn Fn(usize, usize) -> f64,
            can_end: &dyn Fn(usize) -> bool,
            best: &mut Option<f64>,
        ) {
            let acc = acc + emit(j, t);
            if t + 1 == frames {
                if can_end(j) && best.is_none_or(|b| acc > b) {
                    *best = Some(acc);
                }
                return;
            }
            for (k, w) in moves(j) {
                walk(k, t + 1, acc + w, frames, moves, emit, can_end, best);
            }
        }

        let mut best = None;
        for u in 0..n {
            walk(first[u], 0, 0.0, feats.len(), &moves, &emit, &can_end, &mut best);
            if !skippable(u) {
                break;
            }
        }
        best
    }
}

pub mod syllables {
    use prosody_core::phones::Phone;

    pub fn phones(text: &str) -> Vec<Phone> {
        text.split_whitespace()
            .map(|p| if "aeiou".contains(p) { Phone::vowel(p) } else { Phone::consonant(p, true) })
            .collect()
    }

    pub fn render(groups: &[Vec<Phone>]) -> String {
        groups
            .iter()
            .map(|g| g.iter().map(|p| p.label.as_str()).collect::<Vec<_>>().join(" "))
            .collect::<Vec<_>>()
            .join(" | ")
    }

    /// `(language, word, expected groups)`; an empty expectation means the
    /// word has no vowel.
    pub const RULE_TABLE: [(&str, &str, &str); 30] = [
        ("ta", "a", "a"),
        ("ta", "k a", "k a"),
        ("ta", "a k", "a k"),
        ("ta", "k a t", "k a t"),
        ("en", "s t r a", "s t r a"),
        ("en", "a s t", "a s t"),
        ("ta", "k a m a l", "k a | m a l"),
        ("ta", "p a t t u", "p a t | t u"),
        ("ta", "a i", "a | i"),
        ("ta", "a a a", "a | a | a"),
        ("en", "a p r a", "a | p r a"),
        ("ta", "a p r a", "a p | r a"),
        ("en", "a s t r a", "a | s t r a"),
        ("ta", "a s t r a", "a s t | r a"),
        ("en", "a n s t r a", "a n | s t r a"),
        ("en", "e k s t r a", "e k | s t r a"),
        ("en", "a t l a", "a t | l a"),
        ("hi", "a k r a", "a | k r a"),
        ("ta", "a k r a", "a k | r a"),
        ("hi", "a m b a", "a m | b a"),
        ("en", "s t a m p", "s t a m p"),
        ("ta", "k a m p a n", "k a m | p a n"),
        ("en", "a s k w a", "a | s k w a"),
        ("ta", "p a t a k a", "p a | t a | k a"),
        ("xx", "k a", "k a"),
        ("xx", "a p r a", "a p | r a"),
        ("ta", "o u", "o | u"),
        ("hi", "i n d i a", "i n | d i | a"),
        ("ta", "k", ""),
        ("en", "s t r", ""),
    ];
}

pub mod langid {
    use prosody_core::langid::{build_frequency_table, classify_word, score_word, split_train_test, DEFAULT_EPSILON, SPLIT_SEED};
    use prosody_core::pitch::ContourLabel;
    use rand::distr::weighted::WeightedIndex;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::Distribution;

    /// Label distribution of a synthetic language that puts `focus` of its
    /// mass evenly on `own` labels and spreads the rest over all 31.
    pub fn distribution(own: &[usize], focus: f64) -> Vec<f64> {
        let n = ContourLabel::COUNT as f64;
        (0..ContourLabel::COUNT)
            .map(|i| (1.0 - focus) / n + if own.contains(&i) { focus / own.len() as f64 } else { 0.0 })
            .collect()
    }

    pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
        0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }

    pub struct Experiment {
        pub tv: f64,
        pub test_words: usize,
        pub accuracy: f64,
    }

    /// Two languages with 5000 words each, one to five syllables; tables
    /// from a seeded 90/10 split, accuracy on the held-out tenth.
    pub fn two_language_experiment(seed: u64) -> Experiment {
        let all = ContourLabel::all();
        let pa = distribution(&(0..15).collect::<Vec<_>>(), 0.75);
        let pb = distribution(&(15..31).collect::<Vec<_>>(), 0.75);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut words: Vec<(&str, Vec<ContourLabel>)> = Vec::new();
        for (lang, p) in [("A", &pa), ("B", &pb)] {
            let dist = WeightedIndex::new(p).unwrap();
            for _ in 0..5000 {
                let n = rng.random_range(1..=5);
                words.push((lang, (0..n).map(|_| all[dist.sample(&mut rng)]).collect()));
            }
        }
        let (train, test) = split_train_test(&words, 0.1, SPLIT_SEED);
        let tables: Vec<_> = ["A", "B"]
            .iter()
            .map(|&lang| {
                let mine: Vec<Vec<ContourLabel>> = train.iter().filter(|w| w.0 == lang).map(|w| w.1.clone()).collect();
                build_frequency_table(&mine, lang, DEFAULT_EPSILON)
            })
            .collect();
        let correct = test
            .iter()
            .filter(|(lang, labels)| classify_word(&score_word(&tables, labels).unwrap()).unwrap().language == *lang)
            .count();
        Experiment {
            tv: total_variation(&pa, &pb),
            test_words: test.len(),
            accuracy: correct as f64 / test.len() as f64,
        }
    }
}

pub mod docs {
    use prosody_core::document::{BreakPoint, Interval, SyllableAnnotation};
    use prosody_core::events::{BreakIndex, RelativeIntensity};
    use prosody_core::pitch::ContourLabel;
    use prosody_core::AnnotationDocument;
    use rand::seq::IndexedRandom;
    use rand::Rng;
    use rand_chacha::ChaCha8Rng;

    const PIECES: [&str; 10] = ["a", "k", "\"q\"", "ṭa", "sil", "x y", "|", "ñ", "''", "ii"];

    fn text(rng: &mut ChaCha8Rng) -> String {
        let n = rng.random_range(1..=3);
        let s: String = (0..n).map(|_| *PIECES.choose(rng).unwrap()).collect::<Vec<_>>().join("");
        s.trim().to_owned()
    }

    fn non_empty_text(rng: &mut ChaCha8Rng) -> String {
        loop {
            let t = text(rng);
            if !t.is_empty() {
                return t;
            }
        }
    }

    /// A consistent document with microsecond times and awkward texts.
    pub fn random_document(rng: &mut ChaCha8Rng) -> AnnotationDocument {
        let n = rng.random_range(1..=15);
        let mut edges = vec![0i64];
        for _ in 0..n {
            let last = *edges.last().unwrap();
            edges.push(last + rng.random_range(1..300_000));
        }
        let t = |us: i64| us as f64 / 1e6;
        let phones: Vec<Interval> = edges.windows(2).map(|w| Interval::new(t(w[0]), t(w[1]), non_empty_text(rng))).collect();

        // Syllables over runs of phones, words over runs of syllables.
        let mut syllables = Vec::new();
        let mut i = 0;
        while i < n {
            let len = rng.random_range(1..=3).min(n - i);
            if rng.random_bool(0.8) {
                syllables.push(SyllableAnnotation {
                    start: t(edges[i]),
                    end: t(edges[i + len]),
                    text: non_empty_text(rng),
                    rii: RelativeIntensity::new(rng.random_range(1..=5)).unwrap(),
                    label: *ContourLabel::all().choose(rng).unwrap(),
                    unvoiced: rng.random_bool(0.2),
                });
            }
            i += len;
        }
        let mut words = Vec::new();
        let mut breaks = Vec::new();
        let mut j = 0;
        while j < syllables.len() {
            let len = rng.random_range(1..=2).min(syllables.len() - j);
            let w = Interval::new(syllables[j].start, syllables[j + len - 1].end, non_empty_text(rng));
            breaks.push(BreakPoint {
                time: w.end,
                index: BreakIndex::new(rng.random_range(1..=3)).unwrap(),
            });
            words.push(w);
            j += len;
        }
        AnnotationDocument {
            audio: format!("dir/{}.wav", non_empty_text(rng)),
            duration: t(*edges.last().unwrap() + rng.random_range(0..2) * 50_000),
            phones,
            syllables,
            words,
            breaks,
        }
    }
}
