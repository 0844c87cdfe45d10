//! The ten acceptance criteria, run in order with their time budgets.
//! Prints one PASS/FAIL line per criterion and exits non-zero on any FAIL.

mod common;

use std::f64::consts::TAU;
use std::time::{Duration, Instant};

use prosody_core::align::{force_align, iterative_refine, train_seed_models, TrainConfig};
use prosody_core::audio::{frame_signal, FrameSpec};
use prosody_core::document::{parse_lab, parse_textgrid, to_lab, to_textgrid};
use prosody_core::error::Error;
use prosody_core::events::{assign_break_indices, detect_silences, BreakThresholds, RelativeIntensity};
use prosody_core::features::{flatness_track, spectral_flatness, FeatureConfig};
use prosody_core::langid::{build_frequency_table, classify_word, score_word, CategoryTable, ContourFrequencyTable};
use prosody_core::phones::{Inventory, Phone};
use prosody_core::pitch::{classify_contour, synthesize_contour, ContourConfig, ContourLabel, Range, Shape, SmoothedContour};
use prosody_core::{synth, Annotator, Config};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn spectral_flatness_criterion() -> Outcome {
    let spec = FrameSpec::default();
    let mut impulse = vec![0.0f64; 320];
    impulse[0] = 1.0;
    let sf = spectral_flatness(&impulse, &spec);
    check((sf - 1.0).abs() <= 1e-6, || format!("impulse SF {sf}"))?;
    let sine: Vec<f64> = (0..320).map(|i| (TAU * 1000.0 * i as f64 / 16_000.0).sin()).collect();
    let sf_sine = spectral_flatness(&sine, &spec);
    check(sf_sine < 0.1, || format!("1 kHz SF {sf_sine}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let frame: Vec<f64> = (0..320).map(|_| rng.random_range(-1.0..1.0)).collect();
        let gain = 10f64.powf(rng.random_range(-3.0..3.0));
        let scaled: Vec<f64> = frame.iter().map(|x| x * gain).collect();
        worst = worst.max((spectral_flatness(&frame, &spec) - spectral_flatness(&scaled, &spec)).abs());
    }
    check(worst < 1e-9, || format!("scale deviation {worst:e}"))?;
    Ok(format!("impulse {sf:.9}, sine {sf_sine:.4}, max scale deviation {worst:.1e}"))
}

fn rii_criterion() -> Outcome {
    // Independent statement of the five bins.
    let bins = [(0.0, 0.2), (0.2, 0.4), (0.4, 0.6), (0.6, 0.8), (0.8, 1.0 + 1e-12)];
    let mut last = 1;
    for i in 0..=1000 {
        let e = i as f64 / 1000.0;
        let matches: Vec<usize> = bins.iter().enumerate().filter(|(_, &(lo, hi))| e >= lo && e < hi).map(|(k, _)| k + 1).collect();
        check(matches.len() == 1, || format!("E_N {e} matches {matches:?}"))?;
        let got = RelativeIntensity::from_normalized(e).value();
        check(usize::from(got) == matches[0], || format!("E_N {e}: bin {got}, expected {}", matches[0]))?;
        check(got >= last, || format!("bin decreases at {e}"))?;
        last = got;
    }
    for (e, bin) in [(0.2, 2), (0.4, 3), (0.6, 4), (0.8, 5)] {
        let got = RelativeIntensity::from_normalized(e).value();
        check(got == bin, || format!("E_N {e} -> {got}"))?;
    }
    Ok("1001 sweep points, edges 0.2/0.4/0.6/0.8 -> 2/3/4/5".into())
}

fn break_criterion() -> Outcome {
    let t = BreakThresholds::default();
    for (ms, idx) in [(79.99, 1), (80.0, 2), (289.99, 2), (290.0, 3)] {
        let got = t.classify(ms).value();
        check(got == idx, || format!("{ms} ms -> {got}"))?;
    }
    let (u, _) = synth::utterance(&["kamal", "nila", "pasu", "tami"], &[0.05, 0.15, 0.4], |_| 110.0, 3);
    let frames = frame_signal(&u.audio, &FrameSpec::default()).map_err(|e| e.to_string())?;
    let runs = detect_silences(&flatness_track(&frames), 0.75, frames.clock());
    // Word boundaries at the middle of each inserted pause.
    let pauses: Vec<&(String, f64, f64)> = u.segments[1..u.segments.len() - 1].iter().filter(|s| s.0 == "sil").collect();
    let bounds: Vec<f64> = pauses.iter().map(|s| 0.5 * (s.1 + s.2)).collect();
    let got: Vec<u8> = assign_break_indices(&runs, &bounds, &t).iter().map(|b| b.value()).collect();
    check(got == [1, 2, 3], || format!("pauses 50/150/400 ms -> {got:?}"))?;
    Ok(format!("edges exact; pauses 50/150/400 ms -> {got:?}"))
}

fn pitch_criterion() -> Outcome {
    let cfg = ContourConfig::default();
    let all = ContourLabel::all();
    let distinct: std::collections::BTreeSet<_> = all.iter().collect();
    check(all.len() == 31 && distinct.len() == 31, || "label space is not 31 distinct labels".into())?;
    let mut correct = 0;
    for &label in &all {
        let got = classify_contour(&SmoothedContour::from_coeffs(synthesize_contour(label, 120.0), 10), &cfg);
        correct += usize::from(got == label);
    }
    check(correct == 31, || format!("{correct}/31 generated contours classified correctly"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..10_000 {
        let c = [
            rng.random_range(50.0..400.0),
            rng.random_range(-500.0..500.0),
            rng.random_range(-900.0..900.0),
            rng.random_range(-700.0..700.0),
        ];
        let got = classify_contour(&SmoothedContour::from_coeffs(c, 10), &cfg);
        check(distinct.contains(&got), || format!("{c:?} -> {got} outside the label space"))?;
    }
    let flat = classify_contour(&SmoothedContour::from_coeffs([150.0, 5.0, 0.0, 0.0], 10), &cfg);
    check(flat == ContourLabel::Flat, || format!("D=5 -> {flat}"))?;
    check(!matches!(flat, ContourLabel::Shaped(Range::Small, Shape::H)), String::new)?;
    Ok("31/31 generated classes, 10000 random cubics stay in the label space".into())
}

fn gci_criterion() -> Outcome {
    let clean = common::probe_gcis(120.0, None, 21);
    check(clean.spacing_ok >= 0.95, || format!("clean spacing within 0.5 ms: {:.1}%", 100.0 * clean.spacing_ok))?;
    check((clean.median_f0 - 120.0).abs() <= 3.0, || format!("clean median F0 {:.2}", clean.median_f0))?;
    let noisy = common::probe_gcis(120.0, Some(20.0), 21);
    check((noisy.median_f0 - 120.0).abs() <= 5.0, || format!("20 dB median F0 {:.2}", noisy.median_f0))?;
    Ok(format!(
        "clean: {:.1}% spacings within 0.5 ms, median {:.2} Hz; 20 dB: median {:.2} Hz",
        100.0 * clean.spacing_ok,
        clean.median_f0,
        noisy.median_f0
    ))
}

fn alignment_criterion() -> Outcome {
    // (a) Viterbi against exhaustive enumeration.
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let labels: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
    let pool = ["sil", "a", "b", "c"];
    let mut compared = 0;
    for _ in 0..100 {
        let models = common::hmm::random_models(&labels, 2, 2.0, &mut rng);
        let phones: Vec<&str> = (0..rng.random_range(1..=3)).map(|_| pool[rng.random_range(0..4)]).collect();
        let feats: Vec<Vec<f64>> = (0..rng.random_range(1..=20))
            .map(|_| (0..2).map(|_| rng.random_range(-3.0..3.0)).collect())
            .collect();
        let oracle = common::hmm::brute_force_best(&models, &phones, &feats);
        match (force_align(&models, &phones, &feats, common::hmm::clock()), oracle) {
            (Ok(a), Some(best)) => {
                check((a.log_likelihood - best).abs() <= 1e-6, || format!("{phones:?}: {} vs {best}", a.log_likelihood))?;
                compared += 1;
            }
            (Err(Error::NoPath { .. }), None) => {}
            (got, want) => return Err(format!("{phones:?}: viterbi {:?}, oracle {want:?}", got.map(|a| a.log_likelihood))),
        }
    }

    // (b) Refinement on a corpus sampled from known models.
    let corpus = common::hmm::Corpus::generate(10, 200, 23);
    let inventory = Inventory::new((0..10).map(|i| Phone::vowel(&format!("p{i}")))).map_err(|e| e.to_string())?;
    let cfg = TrainConfig::default();
    let seed = train_seed_models::<f64, _>(&corpus.seed(20), &inventory, FeatureConfig::default(), &cfg).map_err(|e| e.to_string())?;
    let clock = common::hmm::clock();
    let r = iterative_refine(&seed, &corpus.corpus(), 5, clock, &cfg).map_err(|e| e.to_string())?;
    for w in r.log_likelihoods.windows(2) {
        check(w[1] >= w[0] - 1e-9 * w[0].abs(), || format!("log-likelihood fell: {:?}", r.log_likelihoods))?;
    }
    let (mut within, mut total) = (0usize, 0usize);
    for (al, (_, spans)) in r.alignments.iter().zip(&corpus.utterances) {
        for (seg, span) in al.segments.iter().zip(spans).skip(1) {
            total += 1;
            within += usize::from((seg.start - clock.time(span.start)).abs() <= 0.02 + 1e-9);
        }
    }
    let share = within as f64 / total as f64;
    check(share >= 0.9, || format!("{:.1}% of boundaries within 20 ms", 100.0 * share))?;
    Ok(format!(
        "{compared} brute-force matches; {:.1}% of {total} boundaries within 20 ms; log-likelihood {:.0} -> {:.0}",
        100.0 * share,
        r.log_likelihoods[0],
        r.log_likelihoods.last().unwrap()
    ))
}

fn syllabification_criterion() -> Outcome {
    use common::syllables::{phones, render, RULE_TABLE};
    use prosody_core::align::{OnsetRules, Syllabifier};

    let s = Syllabifier::new(OnsetRules::default());
    for (lang, word, expected) in RULE_TABLE {
        match s.syllabify(&phones(word), lang) {
            Ok(groups) => check(render(&groups) == expected, || format!("{lang} '{word}' -> '{}'", render(&groups)))?,
            Err(Error::Vowelless(_)) if expected.is_empty() => {}
            Err(e) => return Err(format!("{lang} '{word}': {e}")),
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let alphabet = ["a", "i", "u", "k", "s", "t", "r", "p", "l", "m"];
    let mut tested = 0;
    while tested < 1000 {
        let word: Vec<&str> = (0..rng.random_range(1..12)).map(|_| alphabet[rng.random_range(0..alphabet.len())]).collect();
        if !word.iter().any(|p| "aiu".contains(p)) {
            continue;
        }
        let w = phones(&word.join(" "));
        let lang = ["en", "hi", "ta"][tested % 3];
        let groups = s.syllabify(&w, lang).map_err(|e| e.to_string())?;
        check(groups.concat() == w, || format!("concatenation differs for {word:?}"))?;
        check(groups.iter().all(|g| g.iter().filter(|p| p.is_vowel).count() == 1), || format!("{word:?}"))?;
        tested += 1;
    }
    Ok(format!("{} table cases, {tested} random words", RULE_TABLE.len()))
}

fn langid_criterion() -> Outcome {
    let hat = ContourLabel::Shaped(Range::Medium, Shape::Hat);
    let (x, y) = (ContourLabel::Shaped(Range::Small, Shape::H), ContourLabel::Shaped(Range::Big, Shape::L));
    let table = |lang: &str, one: f64, fx: f64, fy: f64| ContourFrequencyTable {
        language: lang.into(),
        epsilon: 0.0,
        categories: [
            (1, CategoryTable { words: 1, empty: false, frequencies: [(hat, one)].into() }),
            (2, CategoryTable { words: 1, empty: false, frequencies: [(x, fx), (y, fy)].into() }),
        ]
        .into(),
    };
    let tables = [table("A", 0.6, 0.5, 0.1), table("B", 0.2, 0.2, 0.3)];
    let s1 = score_word(&tables, &[hat]).map_err(|e| e.to_string())?;
    let s2 = score_word(&tables, &[x, y]).map_err(|e| e.to_string())?;
    for (got, want) in [(s1[0].score, 0.6), (s1[1].score, 0.2), (s2[0].score, 0.6), (s2[1].score, 0.5)] {
        check((got - want).abs() <= 1e-12, || format!("toy score {got} vs {want}"))?;
    }

    let e = common::langid::two_language_experiment(7);
    check(e.tv >= 0.5, || format!("TV distance {}", e.tv))?;
    check(e.test_words == 1000, || format!("{} test words", e.test_words))?;
    check(e.accuracy >= 0.8, || format!("accuracy {:.1}%", 100.0 * e.accuracy))?;

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let all = ContourLabel::all();
    let random_words = |rng: &mut ChaCha8Rng, n: usize| -> Vec<Vec<ContourLabel>> {
        (0..n).map(|_| (0..rng.random_range(1..=5)).map(|_| all[rng.random_range(0..31)]).collect()).collect()
    };
    let a = random_words(&mut rng, 300);
    let b = random_words(&mut rng, 300);
    let tables = [build_frequency_table(&a, "a", 1e-4), build_frequency_table(&b, "b", 1e-4)];
    for k in [0.001, 0.5, 3.0, 1e4] {
        let scaled: Vec<_> = tables.iter().map(|t| t.scaled(k)).collect();
        for w in random_words(&mut rng, 200) {
            let before = classify_word(&score_word(&tables, &w).map_err(|e| e.to_string())?).unwrap();
            let after = classify_word(&score_word(&scaled, &w).map_err(|e| e.to_string())?).unwrap();
            check(before.tie || after.tie || before.language == after.language, || format!("scaling by {k} changed {w:?}"))?;
        }
    }
    Ok(format!("toy scores exact; TV {:.3}, accuracy {:.1}% on {} words; scaling invariant", e.tv, 100.0 * e.accuracy, e.test_words))
}

fn formats_criterion() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for i in 0..100 {
        let doc = common::docs::random_document(&mut rng);
        let text = to_textgrid(&doc);
        check(text.as_bytes().starts_with(b"File type = \"ooTextFile\"\n"), || "header bytes".into())?;
        let back = parse_textgrid(&text).map_err(|e| format!("doc {i}: {e}"))?;
        check(back == doc, || format!("doc {i}: TextGrid round trip differs"))?;
        let lab = parse_lab(&to_lab(&doc.phones)).map_err(|e| format!("doc {i}: {e}"))?;
        check(lab == doc.phones, || format!("doc {i}: lab round trip differs"))?;
    }
    Ok("100 random documents, TextGrid and lab lossless".into())
}

fn determinism_criterion() -> Outcome {
    let models = common::synth_models().clone();
    let (utt, transcription) = common::two_word_utterance();
    let annotator = Annotator::new(models, Config::default());
    let run = || -> Result<(String, String), String> {
        let doc = annotator.annotate(&utt.audio, &transcription, "", "two.wav").map_err(|e| e.to_string())?;
        Ok((to_textgrid(&doc), to_lab(&doc.phones)))
    };
    let first = run()?;
    let second = run()?;
    check(first == second, || "outputs differ between runs".into())?;
    Ok(format!("{} TextGrid bytes identical across runs", first.0.len()))
}

fn main() {
    let criteria: [(&str, u64, fn() -> Outcome); 10] = [
        ("spectral flatness", 1, spectral_flatness_criterion),
        ("relative intensity bins", 1, rii_criterion),
        ("break indices", 5, break_criterion),
        ("pitch classification", 5, pitch_criterion),
        ("GCI and F0", 30, gci_criterion),
        ("alignment", 300, alignment_criterion),
        ("syllabification", 1, syllabification_criterion),
        ("language identification", 10, langid_criterion),
        ("formats", 5, formats_criterion),
        ("end-to-end determinism", 10, determinism_criterion),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed >= Duration::from_secs(*budget) => {
                Err(format!("{detail}; took {elapsed:.2?}, budget {budget} s"))
            }
            other => other,
        };
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        failed += usize::from(outcome.is_err());
        println!("{tag} {:>2} {name} [{elapsed:.2?} / {budget} s]: {detail}", i + 1);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
